#pragma once

// Comparison models: plain least squares, l1-regularized least squares with
// K-fold cross-validated penalty, and a standard Matern-3/2 GP with
// grid-searched hyperparameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include "hiergp/errors.hpp"
#include "hiergp/rng.hpp"

namespace hiergp {

// minimum-norm least squares (pseudo-inverse semantics when rank-deficient)
inline Eigen::VectorXd ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& responses) {
  if (design.rows() != responses.size()) throw dimension_mismatch("ols_fit: shape mismatch");
  if (design.rows() < 1) throw invalid_parameter("ols_fit: empty data");
  return design.completeOrthogonalDecomposition().solve(responses);
}

struct LassoFit {
  Eigen::VectorXd coef;
  double intercept = 0.0;  // from centering; zero when data are centered
  double penalty = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;

  Eigen::VectorXd predict(const Eigen::MatrixXd& design) const {
    return (design * coef).array() + intercept;
  }
};

namespace detail {

// cyclic coordinate descent on 1/(2n) ||r||^2 + penalty * ||beta||_1
// for pre-centered data; returns false when max_sweeps was exhausted
inline bool lasso_cd(const Eigen::MatrixXd& xc, const Eigen::VectorXd& yc, double penalty,
                     Eigen::VectorXd& beta, int max_sweeps = 1000, double tol = 1e-10) {
  const double n = static_cast<double>(xc.rows());
  const Eigen::Index p = xc.cols();
  Eigen::VectorXd col_sq(p);
  for (Eigen::Index j = 0; j < p; ++j) col_sq[j] = xc.col(j).squaredNorm() / n;
  Eigen::VectorXd resid = yc - xc * beta;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq[j] <= 0.0) continue;
      const double old = beta[j];
      const double rho = xc.col(j).dot(resid) / n + col_sq[j] * old;
      double next = 0.0;
      if (rho > penalty)
        next = (rho - penalty) / col_sq[j];
      else if (rho < -penalty)
        next = (rho + penalty) / col_sq[j];
      if (next != old) {
        resid += xc.col(j) * (old - next);
        beta[j] = next;
        max_delta = std::max(max_delta, std::abs(next - old));
      }
    }
    if (max_delta < tol) return true;
  }
  return false;
}

}  // namespace detail

inline std::vector<double> default_penalty_grid(const Eigen::MatrixXd& xc,
                                                const Eigen::VectorXd& yc, int count = 30) {
  const double n = static_cast<double>(xc.rows());
  double lam_max = 0.0;
  for (Eigen::Index j = 0; j < xc.cols(); ++j)
    lam_max = std::max(lam_max, std::abs(xc.col(j).dot(yc)) / n);
  lam_max = std::max(lam_max, 1e-12);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  const double lam_min = lam_max * 1e-4;
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    grid.push_back(lam_max * std::pow(lam_min / lam_max, t));  // descending
  }
  return grid;
}

// Coordinate-descent lasso with K-fold CV over the penalty grid. Columns and
// responses are centered internally; fold assignment is a seeded shuffle, so
// the whole fit is deterministic for a fixed seed.
inline LassoFit lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& responses,
                          std::vector<double> penalty_grid = {}, int folds = 5,
                          std::uint64_t seed = 0) {
  if (design.rows() != responses.size()) throw dimension_mismatch("lasso_fit: shape mismatch");
  if (folds < 2) throw invalid_parameter("lasso_fit: folds must be >= 2");
  const Eigen::Index n = design.rows();
  if (n < folds) throw invalid_parameter("lasso_fit: need at least `folds` rows");

  const Eigen::RowVectorXd col_mean = design.colwise().mean();
  const double y_mean = responses.mean();
  const Eigen::MatrixXd xc = design.rowwise() - col_mean;
  const Eigen::VectorXd yc = responses.array() - y_mean;

  if (penalty_grid.empty()) penalty_grid = default_penalty_grid(xc, yc);
  std::sort(penalty_grid.begin(), penalty_grid.end(), std::greater<double>());

  // seeded shuffle for fold membership
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  RngHandle rng(seed, 0x10a550);
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.raw() % i);
    std::swap(perm[i - 1], perm[j]);
  }

  std::vector<double> cv_mse(penalty_grid.size(), 0.0);
  LassoFit fit;
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> test_rows, train_rows;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (static_cast<int>(i % static_cast<std::size_t>(folds)) == f)
        test_rows.push_back(perm[i]);
      else
        train_rows.push_back(perm[i]);
    }
    Eigen::MatrixXd xtr(static_cast<Eigen::Index>(train_rows.size()), design.cols());
    Eigen::VectorXd ytr(static_cast<Eigen::Index>(train_rows.size()));
    for (std::size_t i = 0; i < train_rows.size(); ++i) {
      xtr.row(static_cast<Eigen::Index>(i)) = xc.row(train_rows[i]);
      ytr[static_cast<Eigen::Index>(i)] = yc[train_rows[i]];
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
    for (std::size_t g = 0; g < penalty_grid.size(); ++g) {
      if (!detail::lasso_cd(xtr, ytr, penalty_grid[g], beta)) fit.converged = false;
      double sse = 0.0;
      for (Eigen::Index r : test_rows) {
        const double e = yc[r] - xc.row(r).dot(beta);
        sse += e * e;
      }
      cv_mse[g] += sse;
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < cv_mse.size(); ++g)
    if (cv_mse[g] < cv_mse[best]) best = g;  // ties keep the larger penalty

  fit.penalty = penalty_grid[best];
  fit.coef = Eigen::VectorXd::Zero(design.cols());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(design.cols());
  for (std::size_t g = 0; g <= best; ++g)  // warm-start path down to the chosen penalty
    if (!detail::lasso_cd(xc, yc, penalty_grid[g], beta)) fit.converged = false;
  fit.coef = beta;
  fit.intercept = y_mean - col_mean.transpose().dot(beta);
  if (!fit.converged)
    fit.warnings.push_back("lasso_fit: coordinate descent hit the sweep cap; using best iterate");
  return fit;
}

// ---------------------------------------------------------------------------
// Matern-3/2 GP

namespace detail {

// inverse standard normal CDF (Acklam's rational approximation + one Halley step)
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw invalid_parameter("normal_quantile: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley refinement against the exact CDF
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

inline double matern32(double r, double lengthscale) {
  const double s = std::sqrt(3.0) * r / lengthscale;
  return (1.0 + s) * std::exp(-s);
}

}  // namespace detail

struct MaternGpGrid {
  std::vector<double> lengthscales;  // empty -> defaults from the data
  std::vector<double> amplitude_sq;
  std::vector<double> nugget;
};

struct MaternGpFit {
  Eigen::MatrixXd points;
  Eigen::VectorXd alpha;  // K^-1 (y - mean)
  Eigen::MatrixXd kinv;   // for predictive variance
  double y_mean = 0.0;
  double lengthscale = 1.0;
  double amplitude_sq = 1.0;
  double nugget = 1e-8;
  double log_marginal = -std::numeric_limits<double>::infinity();
};

namespace detail {

inline Eigen::MatrixXd matern_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     double lengthscale, double amp_sq) {
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = amp_sq * matern32((a.row(i) - b.row(j)).norm(), lengthscale);
  return k;
}

inline double matern_log_marginal(const Eigen::LLT<Eigen::MatrixXd>& llt,
                                  const Eigen::VectorXd& yc) {
  const Eigen::VectorXd alpha = llt.solve(yc);
  double logdet = 0.0;
  const auto& L = llt.matrixLLT();
  for (Eigen::Index i = 0; i < L.rows(); ++i) logdet += std::log(L(i, i));
  return -0.5 * yc.dot(alpha) - logdet -
         0.5 * static_cast<double>(yc.size()) * std::log(2.0 * std::numbers::pi);
}

}  // namespace detail

// Hyperparameters by maximum marginal likelihood over a log-spaced grid;
// ill-conditioned kernels get their nugget escalated until Cholesky succeeds.
inline MaternGpFit matern_gp_fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& responses,
                                 MaternGpGrid grid = {}) {
  if (points.rows() != responses.size()) throw dimension_mismatch("matern_gp_fit: shape mismatch");
  if (points.rows() < 2) throw invalid_parameter("matern_gp_fit: need at least two points");

  const double y_var = std::max(
      (responses.array() - responses.mean()).square().sum() /
          static_cast<double>(responses.size()),
      1e-12);
  const double diam = std::sqrt(static_cast<double>(points.cols()));
  if (grid.lengthscales.empty())
    for (int i = 0; i < 10; ++i)
      grid.lengthscales.push_back(0.05 * diam * std::pow(40.0, i / 9.0));
  if (grid.amplitude_sq.empty())
    for (int i = 0; i < 5; ++i) grid.amplitude_sq.push_back(y_var * std::pow(10.0, i - 2.0));
  if (grid.nugget.empty())
    for (double f : {1e-8, 1e-6, 1e-4, 1e-2}) grid.nugget.push_back(f * y_var);

  const double y_mean = responses.mean();
  const Eigen::VectorXd yc = responses.array() - y_mean;

  MaternGpFit best;
  best.points = points;
  best.y_mean = y_mean;
  for (double ls : grid.lengthscales) {
    const Eigen::MatrixXd corr = detail::matern_kernel(points, points, ls, 1.0);
    for (double amp : grid.amplitude_sq) {
      for (double nug : grid.nugget) {
        double nug_eff = nug;
        Eigen::LLT<Eigen::MatrixXd> llt;
        for (int tries = 0;; ++tries) {
          Eigen::MatrixXd k = amp * corr;
          k.diagonal().array() += nug_eff;
          llt.compute(k);
          if (llt.info() == Eigen::Success) break;
          nug_eff *= 10.0;
          if (tries > 20) throw numerical_error("matern_gp_fit: kernel not factorizable");
        }
        const double lml = detail::matern_log_marginal(llt, yc);
        if (lml > best.log_marginal) {
          best.log_marginal = lml;
          best.lengthscale = ls;
          best.amplitude_sq = amp;
          best.nugget = nug_eff;
          best.alpha = llt.solve(yc);
          best.kinv = llt.solve(Eigen::MatrixXd::Identity(points.rows(), points.rows()));
        }
      }
    }
  }
  return best;
}

struct GpPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // includes the nugget

  Eigen::VectorXd lower(double level) const {
    const double zq = detail::normal_quantile(0.5 * (1.0 + level));
    return mean - zq * variance.cwiseSqrt();
  }
  Eigen::VectorXd upper(double level) const {
    const double zq = detail::normal_quantile(0.5 * (1.0 + level));
    return mean + zq * variance.cwiseSqrt();
  }
};

inline GpPrediction matern_gp_predict(const MaternGpFit& fit, const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd ks =
      detail::matern_kernel(points, fit.points, fit.lengthscale, fit.amplitude_sq);
  GpPrediction out;
  out.mean = (ks * fit.alpha).array() + fit.y_mean;
  out.variance.resize(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double reduction = ks.row(i) * fit.kinv * ks.row(i).transpose();
    out.variance[i] = std::max(fit.amplitude_sq + fit.nugget - reduction, 0.0);
  }
  return out;
}

}  // namespace hiergp
