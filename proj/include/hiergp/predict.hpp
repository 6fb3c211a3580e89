#pragma once

// Posterior predictive evaluation: pointwise means, equal-tailed empirical
// quantile intervals, and the error / coverage metrics used by benchmarks.

#include <algorithm>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "hiergp/basis.hpp"
#include "hiergp/model.hpp"
#include "hiergp/rng.hpp"

namespace hiergp {

struct PredictionResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double level = 0.95;
  std::optional<Eigen::MatrixXd> samples;  // retained draws x points, when kept
};

struct PredictOptions {
  double level = 0.95;
  bool include_noise = false;
  bool keep_samples = false;
};

// f_b(x) = sum_k lambda_k phi_k(x) + centering offset
inline double eval_function_sample(const ChainState& state, const BasisFamily& family,
                                   const Eigen::VectorXd& x, double centering = 0.0) {
  const auto indices = enumerate_indices(state.trunc);
  double v = centering;
  for (std::size_t j = 0; j < indices.size(); ++j)
    v += state.lambda[static_cast<Eigen::Index>(j)] * eval_basis(family, indices[j], x);
  return v;
}

// type-1 empirical quantile (inverse ECDF) of a sorted vector
inline double empirical_quantile_sorted(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  if (n == 0) throw invalid_parameter("empirical_quantile: empty sample");
  const double pos = std::ceil(p * static_cast<double>(n));
  auto idx = static_cast<std::ptrdiff_t>(pos) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(n) - 1);
  return sorted[static_cast<std::size_t>(idx)];
}

inline PredictionResult predict(const PosteriorChain& chain, const Eigen::MatrixXd& points,
                                const PredictOptions& opts = {}, RngHandle* rng = nullptr) {
  if (chain.empty()) throw invalid_parameter("predict: empty chain");
  if (!(opts.level > 0.0 && opts.level < 1.0))
    throw invalid_parameter("predict: level must be in (0,1)");
  if (opts.include_noise && rng == nullptr)
    throw invalid_parameter("predict: include_noise requires an rng");

  const auto M = static_cast<Eigen::Index>(chain.size());
  const Eigen::Index P = points.rows();
  Eigen::MatrixXd draws(M, P);

  // reuse the design matrix while consecutive states share a truncation
  Eigen::MatrixXd design;
  const TruncationVector* built_for = nullptr;
  for (Eigen::Index b = 0; b < M; ++b) {
    const ChainState& st = chain.states[static_cast<std::size_t>(b)];
    if (built_for == nullptr || !(*built_for == st.trunc)) {
      design = build_design_matrix(chain.metadata.family, st.trunc, points);
      built_for = &st.trunc;
    }
    draws.row(b) = (design * st.lambda).transpose().array() + chain.metadata.centering;
    if (opts.include_noise) {
      const double sd = std::sqrt(st.theta_sq);
      for (Eigen::Index p = 0; p < P; ++p) draws(b, p) += sample_normal(0.0, sd, *rng);
    }
  }

  PredictionResult result;
  result.level = opts.level;
  result.mean = draws.colwise().mean();
  result.lower.resize(P);
  result.upper.resize(P);
  const double lo_p = 0.5 * (1.0 - opts.level);
  const double hi_p = 0.5 * (1.0 + opts.level);
  std::vector<double> column(static_cast<std::size_t>(M));
  for (Eigen::Index p = 0; p < P; ++p) {
    for (Eigen::Index b = 0; b < M; ++b) column[static_cast<std::size_t>(b)] = draws(b, p);
    std::sort(column.begin(), column.end());
    result.lower[p] = empirical_quantile_sorted(column, lo_p);
    result.upper[p] = empirical_quantile_sorted(column, hi_p);
  }
  if (opts.keep_samples) result.samples = std::move(draws);
  return result;
}

inline double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  if (predicted.size() != truth.size()) throw dimension_mismatch("rmse: length mismatch");
  return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(truth.size()));
}

inline double mean_absolute_error(const Eigen::VectorXd& predicted, const Eigen::VectorXd& truth) {
  if (predicted.size() != truth.size())
    throw dimension_mismatch("mean_absolute_error: length mismatch");
  return (predicted - truth).cwiseAbs().mean();
}

inline double empirical_coverage(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd& truth) {
  if (lower.size() != truth.size() || upper.size() != truth.size())
    throw dimension_mismatch("empirical_coverage: length mismatch");
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i)
    if (truth[i] >= lower[i] && truth[i] <= upper[i]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(truth.size());
}

inline double mean_interval_width(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != upper.size()) throw dimension_mismatch("mean_interval_width: length mismatch");
  return (upper - lower).mean();
}

}  // namespace hiergp
