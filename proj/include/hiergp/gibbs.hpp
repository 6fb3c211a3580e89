#pragma once

// Data-augmented Gibbs sampler for the hierarchical shrinkage GP. The
// univariate model is the d = 1 case of the general sweep; a wrapper with
// scalar arguments is provided at the bottom.

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "hiergp/adaptive.hpp"
#include "hiergp/basis.hpp"
#include "hiergp/model.hpp"
#include "hiergp/rng.hpp"

namespace hiergp {

// Conjugate-oracle mode: pin the spike/slab structure (and optionally the
// noise variance) so the chain reduces to Gaussian linear regression.
struct FreezeConfig {
  Eigen::VectorXd sigma_sq;            // fixed prior variances per coefficient
  std::optional<double> theta_sq;      // fixed noise variance when set
};

struct GibbsConfig {
  std::uint64_t iterations = 2000;
  std::optional<std::uint64_t> burn_in;  // default iterations / 2
  std::uint64_t thinning = 1;
  TruncationVector trunc;
  bool adaptive = false;
  AdaptiveConfig adapt;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::optional<FreezeConfig> freeze;
  // center sinusoidal-family responses by their sample mean (the basis has no
  // intercept); disable when the target is known to be mean-zero
  bool center_responses = true;

  std::uint64_t effective_burn_in() const { return burn_in.value_or(iterations / 2); }

  void validate() const {
    trunc.validate();
    if (iterations == 0) throw invalid_parameter("GibbsConfig: iterations must be > 0");
    if (effective_burn_in() >= iterations)
      throw invalid_parameter("GibbsConfig: burn_in must be < iterations");
    if (thinning == 0) throw invalid_parameter("GibbsConfig: thinning must be >= 1");
    if (adaptive) cfg_validate_adapt();
  }

 private:
  void cfg_validate_adapt() const { adapt.validate(); }
};

namespace detail {

// iterate cells l = (l_1..l_d), l_m in 1..C_m, last dimension fastest
inline bool next_cell(std::vector<int>& cell, const std::vector<int>& counts) {
  int m = static_cast<int>(cell.size()) - 1;
  while (m >= 0) {
    if (cell[static_cast<std::size_t>(m)] < counts[static_cast<std::size_t>(m)]) {
      ++cell[static_cast<std::size_t>(m)];
      return true;
    }
    cell[static_cast<std::size_t>(m)] = 1;
    --m;
  }
  return false;
}

}  // namespace detail

// Full conditional of the latent assignment z_k: over all cells l the weight
// is prod_m nu_{l_m,m} w_{l_m-1,m} times the slab t-density when every
// component clears its threshold (l_m > k_m) and the spike normal density
// otherwise. Computed in log space with max subtraction.
inline void step_z(ChainState& state, const Hyperparameters& hyper,
                   const std::vector<MultiIndex>& indices, std::size_t pos, RngHandle& rng) {
  const int d = state.dims();
  std::vector<int> counts(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) counts[static_cast<std::size_t>(m)] = state.trunc.count(m);

  const double lambda = state.lambda[static_cast<Eigen::Index>(pos)];
  const double log_spike = log_density_normal(lambda, 0.0, hyper.sigma_inf_sq);
  const double log_slab =
      log_density_student_t(lambda, 2.0 * hyper.a_sigma, hyper.b_sigma / hyper.a_sigma);

  // per-dimension log(nu_l * w_{l-1}) tables
  std::vector<std::vector<double>> log_nuw(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) {
    auto& tab = log_nuw[static_cast<std::size_t>(m)];
    tab.resize(static_cast<std::size_t>(counts[static_cast<std::size_t>(m)]));
    const auto& num = state.nu[static_cast<std::size_t>(m)];
    const auto& wm = state.w[static_cast<std::size_t>(m)];
    for (int l = 1; l <= counts[static_cast<std::size_t>(m)]; ++l)
      tab[static_cast<std::size_t>(l - 1)] = std::log(num[l - 1]) + std::log(wm[l - 1]);
  }

  const auto& k = indices[pos];
  const std::size_t n_cells = state.basis_count();
  std::vector<double> logw(n_cells);
  std::vector<int> cell(static_cast<std::size_t>(d), 1);
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0;; ++c) {
    double lw = 0.0;
    bool corner = true;
    for (int m = 0; m < d; ++m) {
      const int lm = cell[static_cast<std::size_t>(m)];
      lw += log_nuw[static_cast<std::size_t>(m)][static_cast<std::size_t>(lm - 1)];
      corner = corner && lm > k[static_cast<std::size_t>(m)];
    }
    lw += corner ? log_slab : log_spike;
    logw[c] = lw;
    max_logw = std::max(max_logw, lw);
    if (!detail::next_cell(cell, counts)) break;
  }
  if (!std::isfinite(max_logw))
    throw numerical_error("step_z: all cell weights vanished (non-finite state?)");

  std::vector<double> weights(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) weights[c] = std::exp(logw[c] - max_logw);
  const std::size_t chosen = sample_categorical(weights, rng);

  // decode flat cell id back to (l_1..l_d)
  std::size_t rem = chosen;
  for (int m = d - 1; m >= 0; --m) {
    const auto cm = static_cast<std::size_t>(counts[static_cast<std::size_t>(m)]);
    state.z(static_cast<Eigen::Index>(pos), m) = static_cast<int>(rem % cm) + 1;
    rem /= cm;
  }
}

// sigma^2_k = spike if any z component fails its threshold, else a slab draw
inline void step_sigma(ChainState& state, const Hyperparameters& hyper,
                       const std::vector<MultiIndex>& indices, std::size_t pos, RngHandle& rng) {
  const auto& k = indices[pos];
  bool spike = false;
  for (int m = 0; m < state.dims(); ++m)
    spike = spike || state.z(static_cast<Eigen::Index>(pos), m) <= k[static_cast<std::size_t>(m)];
  if (spike) {
    state.sigma_sq[static_cast<Eigen::Index>(pos)] = hyper.sigma_inf_sq;
  } else {
    const double lambda = state.lambda[static_cast<Eigen::Index>(pos)];
    state.sigma_sq[static_cast<Eigen::Index>(pos)] =
        sample_inverse_gamma(hyper.a_sigma + 0.5, hyper.b_sigma + 0.5 * lambda * lambda, rng);
  }
}

// nu_{j,m} | z ~ Beta(1 + #{z_{k,m} = j}, alpha + #{z_{k,m} > j}), then the
// cumulative weights for dimension m are recomputed from scratch. The final
// stick is pinned at 1 (proper truncation) and is not updated.
inline void step_nu(ChainState& state, const Hyperparameters& hyper, int m, int j,
                    RngHandle& rng) {
  if (j < 1 || j >= state.trunc.count(m))
    throw invalid_parameter("step_nu: stick index must be in 1..C_m-1 (last stick is pinned)");
  long eq = 0, gt = 0;
  for (Eigen::Index pos = 0; pos < state.z.rows(); ++pos) {
    const int zv = state.z(pos, m);
    if (zv == j) ++eq;
    if (zv > j) ++gt;
  }
  state.nu[static_cast<std::size_t>(m)][j - 1] =
      sample_beta(1.0 + static_cast<double>(eq), hyper.alpha + static_cast<double>(gt), rng);
  state.w[static_cast<std::size_t>(m)] = cumulative_weights(state.nu[static_cast<std::size_t>(m)]);
}

// theta^2 | - ~ IG(a_theta + n/2, b_theta + S'S/2), S = y - X Lambda
inline void step_theta(ChainState& state, const Eigen::MatrixXd& design,
                       const Eigen::VectorXd& responses, const Hyperparameters& hyper,
                       bool deterministic, RngHandle& rng) {
  const Eigen::VectorXd resid = responses - design * state.lambda;
  const double n = static_cast<double>(responses.size());
  state.theta_sq =
      sample_inverse_gamma(hyper.a_theta + 0.5 * n, hyper.b_theta + 0.5 * resid.squaredNorm(), rng);
  if (deterministic) state.theta_sq = std::max(state.theta_sq, 1e-8);
}

// Draw from N(V b, V), V = (D^-1 + X'X / theta^2)^-1, b = X'y / theta^2,
// expressed through the precision matrix. The system is symmetrically
// equilibrated before factorization; a diagonal jitter ladder handles
// near-singular cases.
inline Eigen::VectorXd sample_gaussian_conditional(const Eigen::VectorXd& prior_precision_diag,
                                                   const Eigen::MatrixXd& xtx,
                                                   const Eigen::VectorXd& xty, double theta_sq,
                                                   RngHandle& rng) {
  const Eigen::Index K = prior_precision_diag.size();
  Eigen::MatrixXd prec = xtx / theta_sq;
  prec.diagonal() += prior_precision_diag;
  Eigen::VectorXd b = xty / theta_sq;

  Eigen::VectorXd scale(K);
  for (Eigen::Index i = 0; i < K; ++i) {
    const double pii = prec(i, i);
    if (!(pii > 0.0) || !std::isfinite(pii))
      throw numerical_error("sample_gaussian_conditional: non-positive precision diagonal");
    scale[i] = 1.0 / std::sqrt(pii);
  }
  Eigen::MatrixXd prec_s = scale.asDiagonal() * prec * scale.asDiagonal();

  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd shifted = prec_s;
    if (jitter > 0.0) shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) break;
    jitter = (jitter == 0.0) ? 1e-10 : 10.0 * jitter;
    if (jitter > 1e-4) {
      std::ostringstream msg;
      msg << "sample_gaussian_conditional: factorization failed (dim=" << K
          << ", max jitter " << jitter / 10.0 << " on unit-diagonal system)";
      throw numerical_error(msg.str());
    }
  }

  const Eigen::VectorXd mean_s = llt.solve(scale.asDiagonal() * b);
  Eigen::VectorXd u(K);
  for (Eigen::Index i = 0; i < K; ++i) u[i] = sample_normal(0.0, 1.0, rng);
  const Eigen::VectorXd noise_s = llt.matrixU().solve(u);
  return scale.asDiagonal() * (mean_s + noise_s);
}

inline void step_lambda_precomputed(ChainState& state, const Eigen::MatrixXd& xtx,
                                    const Eigen::VectorXd& xty, RngHandle& rng) {
  Eigen::VectorXd d_inv(state.sigma_sq.size());
  for (Eigen::Index i = 0; i < d_inv.size(); ++i) {
    if (!(state.sigma_sq[i] > 0.0))
      throw numerical_error("step_lambda: non-positive coefficient variance");
    d_inv[i] = 1.0 / state.sigma_sq[i];
  }
  state.lambda = sample_gaussian_conditional(d_inv, xtx, xty, state.theta_sq, rng);
}

inline void step_lambda(ChainState& state, const Eigen::MatrixXd& design,
                        const Eigen::VectorXd& responses, RngHandle& rng) {
  step_lambda_precomputed(state, Eigen::MatrixXd(design.transpose() * design),
                          Eigen::VectorXd(design.transpose() * responses), rng);
}

namespace detail {

// Initial state: sticks from the prior, but every coefficient starts in the
// slab. A cold (mostly spiked) start can take very long to activate anything,
// since spiked coefficients are pinned near zero and the noise variance then
// absorbs the signal.
inline ChainState init_state(const TruncationVector& trunc, const Hyperparameters& hyper,
                             RngHandle& rng) {
  ChainState state;
  state.trunc = trunc;
  PriorDraw draw = draw_from_prior(trunc, hyper, rng);
  state.nu = std::move(draw.nu);
  state.w = std::move(draw.w);
  const auto K = static_cast<Eigen::Index>(trunc.size());
  state.sigma_sq.resize(K);
  state.lambda.resize(K);
  for (Eigen::Index j = 0; j < K; ++j) {
    state.sigma_sq[j] = sample_inverse_gamma(hyper.a_sigma, hyper.b_sigma, rng);
    state.lambda[j] = sample_normal(0.0, std::sqrt(state.sigma_sq[j]), rng);
  }
  state.z = Eigen::MatrixXi::Ones(K, trunc.dims());
  state.theta_sq = 1.0;
  return state;
}

// Shared driver: `make_design` rebuilds the design matrix whenever the
// truncation changes (only exercised by adaptive runs).
inline PosteriorChain run_gibbs_loop(
    const std::function<Eigen::MatrixXd(const TruncationVector&)>& make_design,
    const Eigen::VectorXd& responses, bool deterministic, const GibbsConfig& config,
    const Hyperparameters& hyper, ChainMetadata metadata) {
  config.validate();
  metadata.warnings = hyper.validate();
  if (!config.freeze && !(hyper.sigma_inf_sq > 0.0))
    throw invalid_parameter("run_chain: inference requires sigma_inf_sq > 0 (e.g. 1e-6)");

  RngHandle rng(config.seed, config.stream);
  ChainState state = init_state(config.trunc, hyper, rng);
  if (config.freeze) {
    if (config.freeze->sigma_sq.size() != static_cast<Eigen::Index>(config.trunc.size()))
      throw dimension_mismatch("FreezeConfig: sigma_sq length mismatch");
    state.sigma_sq = config.freeze->sigma_sq;
    if (config.freeze->theta_sq) state.theta_sq = *config.freeze->theta_sq;
  }

  Eigen::MatrixXd design = make_design(state.trunc);
  if (design.rows() != responses.size())
    throw dimension_mismatch("run_chain: design rows != responses");
  Eigen::MatrixXd xtx = design.transpose() * design;
  Eigen::VectorXd xty = design.transpose() * responses;
  auto indices = enumerate_indices(state.trunc);

  metadata.kind = SamplerKind::hiergp;
  metadata.trunc = config.trunc;
  metadata.hyper = hyper;
  metadata.seed = config.seed;
  metadata.stream = config.stream;
  metadata.iterations = config.iterations;
  metadata.burn_in = config.effective_burn_in();
  metadata.thinning = config.thinning;

  PosteriorChain chain;
  const std::uint64_t burn = config.effective_burn_in();
  for (std::uint64_t b = 1; b <= config.iterations; ++b) {
    try {
      if (!config.freeze) {
        for (std::size_t pos = 0; pos < indices.size(); ++pos)
          step_z(state, hyper, indices, pos, rng);
        for (std::size_t pos = 0; pos < indices.size(); ++pos)
          step_sigma(state, hyper, indices, pos, rng);
        for (int m = 0; m < state.dims(); ++m)
          for (int j = 1; j < state.trunc.count(m); ++j) step_nu(state, hyper, m, j, rng);
      }
      if (!(config.freeze && config.freeze->theta_sq))
        step_theta(state, design, responses, hyper, deterministic, rng);
      step_lambda_precomputed(state, xtx, xty, rng);

      if (config.adaptive && !config.freeze) {
        auto events = maybe_adapt(state, b, config.adapt, hyper, rng);
        if (!events.empty()) {
          metadata.adapt_events.insert(metadata.adapt_events.end(), events.begin(), events.end());
          design = make_design(state.trunc);
          xtx = design.transpose() * design;
          xty = design.transpose() * responses;
          indices = enumerate_indices(state.trunc);
        }
      }
    } catch (const numerical_error& e) {
      std::ostringstream msg;
      msg << e.what() << " [iteration " << b << "]";
      throw numerical_error(msg.str());
    }
    if (b > burn && (b - burn - 1) % config.thinning == 0) chain.states.push_back(state);
  }
  chain.metadata = std::move(metadata);
  return chain;
}

}  // namespace detail

// Run the Gibbs sampler on a pre-built design matrix. Adaptive truncation is
// not available here since columns cannot be regenerated.
inline PosteriorChain run_chain_design(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& responses,
                                       const GibbsConfig& config, const Hyperparameters& hyper,
                                       bool deterministic = false,
                                       ChainMetadata metadata = {}) {
  if (config.adaptive)
    throw invalid_parameter("run_chain_design: adaptive truncation needs a point-based design");
  if (design.cols() != static_cast<Eigen::Index>(config.trunc.size()))
    throw dimension_mismatch("run_chain_design: design columns != truncation size");
  return detail::run_gibbs_loop([&](const TruncationVector&) { return design; }, responses,
                                deterministic, config, hyper, std::move(metadata));
}

// Fit the model to a dataset. Sinusoidal-family responses are centered by
// their sample mean (the basis has no intercept); the offset is stored in the
// chain metadata and added back at prediction.
inline PosteriorChain run_chain(const Dataset& dataset, const BasisFamily& family,
                                const GibbsConfig& config, const Hyperparameters& hyper) {
  const bool sinus = family.kind == BasisKind::sinusoidal;
  dataset.validate(sinus);
  if (dataset.d() != config.trunc.dims())
    throw dimension_mismatch("run_chain: dataset dimension != truncation dimension");

  ChainMetadata metadata;
  metadata.family = family;
  Eigen::VectorXd y = dataset.responses;
  // start=0 truncations already contain the constant basis function
  if (sinus && config.trunc.start == 1 && config.center_responses) {
    metadata.centering = y.mean();
    y.array() -= metadata.centering;
  }
  auto make_design = [&dataset, family](const TruncationVector& trunc) {
    return build_design_matrix(family, trunc, dataset.points);
  };
  return detail::run_gibbs_loop(make_design, y, dataset.deterministic, config, hyper,
                                std::move(metadata));
}

// Univariate convenience wrapper (inputs on [0,1], scalar truncation).
inline PosteriorChain run_chain_univariate(const Eigen::VectorXd& xs, const Eigen::VectorXd& ys,
                                           int truncation, GibbsConfig config,
                                           const Hyperparameters& hyper,
                                           bool deterministic = false,
                                           BasisFamily family = sinusoidal_basis()) {
  Dataset data;
  data.points = xs;
  data.responses = ys;
  data.deterministic = deterministic;
  config.trunc = TruncationVector{{truncation}, family.kind == BasisKind::sinusoidal ? 1 : 0};
  return run_chain(data, family, config, hyper);
}

}  // namespace hiergp
