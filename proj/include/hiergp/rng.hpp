#pragma once

// Seedable random streams and the elementary sampling / density routines
// used by the samplers. All transforms are hand-rolled on top of a fixed
// engine so that a given (seed, stream) pair replays bit-identically.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hiergp/errors.hpp"

namespace hiergp {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// One random stream. Not shareable across threads; each chain owns one.
// Distinct stream ids on the same seed give independent sub-streams.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream),
        engine_(detail::splitmix64(seed ^ detail::splitmix64(stream ^ 0x51a9b2c3d4e5f607ULL))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // uniform on (0,1), both endpoints excluded
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;  // top 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

inline double sample_normal(double mean, double sd, RngHandle& rng) {
  if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean))
    throw invalid_parameter("sample_normal: sd must be finite and > 0");
  // Marsaglia polar method; the paired deviate is discarded.
  double u, v, s;
  do {
    u = 2.0 * rng.uniform() - 1.0;
    v = 2.0 * rng.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return mean + sd * u * std::sqrt(-2.0 * std::log(s) / s);
}

// Gamma(shape, rate) with density ∝ x^{shape-1} e^{-rate x}.
inline double sample_gamma(double shape, double rate, RngHandle& rng) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate))
    throw invalid_parameter("sample_gamma: shape and rate must be finite and > 0");
  if (shape < 1.0) {
    // boost to shape+1, then scale back by a uniform power
    const double g = sample_gamma(shape + 1.0, 1.0, rng);
    const double u = rng.uniform();
    return g * std::pow(u, 1.0 / shape) / rate;
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(0.0, 1.0, rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

// Inverse-gamma with density ∝ x^{-shape-1} e^{-rate/x}; mean rate/(shape-1).
inline double sample_inverse_gamma(double shape, double rate, RngHandle& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw invalid_parameter("sample_inverse_gamma: shape and rate must be > 0");
  return 1.0 / sample_gamma(shape, rate, rng);
}

inline double sample_beta(double a, double b, RngHandle& rng) {
  if (!(a > 0.0) || !(b > 0.0))
    throw invalid_parameter("sample_beta: both shapes must be > 0");
  const double x = sample_gamma(a, 1.0, rng);
  const double y = sample_gamma(b, 1.0, rng);
  double r = x / (x + y);
  // keep draws strictly inside (0,1); downstream takes log(nu) and log(1-nu)
  const double eps = std::numeric_limits<double>::min();
  if (r <= 0.0) r = eps;
  if (r >= 1.0) r = 1.0 - std::numeric_limits<double>::epsilon();
  return r;
}

inline std::size_t sample_categorical(std::span<const double> weights, RngHandle& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw invalid_parameter("sample_categorical: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw invalid_parameter("sample_categorical: all weights zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

// Draw from N(mean, cov) via a Cholesky factor of cov. Near-singular
// covariances get an escalating diagonal jitter of 1e-10..1e-4 x trace/dim
// before giving up.
inline Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                  RngHandle& rng) {
  const Eigen::Index n = mean.size();
  if (cov.rows() != n || cov.cols() != n)
    throw dimension_mismatch("sample_mvn: covariance shape does not match mean");
  const double base = std::max(cov.trace() / static_cast<double>(n), 1e-30);
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd shifted = cov;
    if (jitter > 0.0) shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) break;
    jitter = (jitter == 0.0) ? 1e-10 * base : 10.0 * jitter;
    if (jitter > 1e-4 * base) {
      std::ostringstream msg;
      msg << "sample_mvn: Cholesky failed after jitter ladder (trace/dim=" << base
          << ", max jitter tried=" << jitter / 10.0 << ")";
      throw numerical_error(msg.str());
    }
  }
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = sample_normal(0.0, 1.0, rng);
  return mean + llt.matrixL() * z;
}

inline double log_density_normal(double x, double mean, double var) {
  if (!(var > 0.0)) throw invalid_parameter("log_density_normal: var must be > 0");
  const double r = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * r * r / var;
}

inline double density_normal(double x, double mean, double var) {
  return std::exp(log_density_normal(x, mean, var));
}

// Student-t density at location 0 with `dof` degrees of freedom and squared
// scale `scale_sq`, i.e. the marginal of N(0, s2) with s2 ~ IG(dof/2, dof/2 * scale_sq).
inline double log_density_student_t(double x, double dof, double scale_sq) {
  if (!(dof > 0.0) || !(scale_sq > 0.0))
    throw invalid_parameter("log_density_student_t: dof and scale must be > 0");
  const double half = 0.5 * (dof + 1.0);
  return std::lgamma(half) - std::lgamma(0.5 * dof)
         - 0.5 * std::log(dof * std::numbers::pi * scale_sq)
         - half * std::log1p(x * x / (dof * scale_sq));
}

inline double density_student_t(double x, double dof, double scale_sq) {
  return std::exp(log_density_student_t(x, dof, scale_sq));
}

}  // namespace hiergp
