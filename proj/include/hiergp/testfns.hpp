#pragma once

// Benchmark test functions and simulation of truths from the shrinkage prior.

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "hiergp/basis.hpp"
#include "hiergp/model.hpp"
#include "hiergp/predict.hpp"

namespace hiergp {

// Branin on its conventional domain [-5,10] x [0,15]. The printed variant
// drops the square on the quadratic x1 term; both share the canonical
// constants a=1, b=5.1/(4 pi^2), c=5/pi, r=6, s=10, t=1/(8 pi).
inline double testfn_branin(const Eigen::Vector2d& x, bool as_printed = false) {
  constexpr double a = 1.0;
  const double b = 5.1 / (4.0 * std::numbers::pi * std::numbers::pi);
  const double c = 5.0 / std::numbers::pi;
  constexpr double r = 6.0;
  constexpr double s = 10.0;
  const double t = 1.0 / (8.0 * std::numbers::pi);
  const double x1 = x[0], x2 = x[1];
  const double quad = as_printed ? (x2 - b * x1 + c * x1 - r) : (x2 - b * x1 * x1 + c * x1 - r);
  return a * quad * quad + s * (1.0 - t) * std::cos(x1) + s;
}

// affine map from [0,1]^2 to the conventional Branin domain
inline Eigen::Vector2d branin_domain(const Eigen::Vector2d& u) {
  return {-5.0 + 15.0 * u[0], 15.0 * u[1]};
}

inline double testfn_branin_unit(const Eigen::Vector2d& u, bool as_printed = false) {
  return testfn_branin(branin_domain(u), as_printed);
}

inline double testfn_cheng_sandu(const Eigen::Vector2d& x) {
  return std::cos(x[0] + x[1]) * std::exp(x[0] * x[1]);
}

// A function drawn from the prior: nu -> w -> sigma^2 -> lambda, evaluated
// with the sinusoidal basis. With sigma_inf_sq = 0 the inactive coefficients
// are exactly zero.
struct PriorFunction {
  TruncationVector trunc;
  BasisFamily family = sinusoidal_basis();
  Eigen::VectorXd lambda;
  Eigen::VectorXd sigma_sq;
  std::vector<Eigen::VectorXd> w;

  double operator()(const Eigen::VectorXd& x) const {
    const auto indices = enumerate_indices(trunc);
    double v = 0.0;
    for (std::size_t j = 0; j < indices.size(); ++j)
      v += lambda[static_cast<Eigen::Index>(j)] * eval_basis(family, indices[j], x);
    return v;
  }

  Eigen::VectorXd eval(const Eigen::MatrixXd& points) const {
    const Eigen::MatrixXd design = build_design_matrix(family, trunc, points);
    return design * lambda;
  }
};

inline PriorFunction simulate_from_prior(const TruncationVector& trunc,
                                         const Hyperparameters& hyper, RngHandle& rng) {
  PriorFunction fn;
  fn.trunc = trunc;
  PriorDraw draw = draw_from_prior(trunc, hyper, rng);
  fn.lambda = std::move(draw.lambda);
  fn.sigma_sq = std::move(draw.sigma_sq);
  fn.w = std::move(draw.w);
  return fn;
}

}  // namespace hiergp
