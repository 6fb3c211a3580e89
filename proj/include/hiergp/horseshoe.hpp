#pragma once

// Blocked Metropolis-within-Gibbs sampler for the global-local (horseshoe)
// variant. Local parameters sigma_k enter as precisions: the implied prior
// variance of lambda_k is theta^2 / (tau * sigma_k), which is what the
// sigma_sq field of recorded states reports.

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "hiergp/gibbs.hpp"
#include "hiergp/model.hpp"
#include "hiergp/rng.hpp"

namespace hiergp {

// domain bounds for the local-scale kernel; keep every conditional proper
inline constexpr double hs_local_min = 1e-12;
inline constexpr double hs_local_max = 1e6;

inline void hs_step_lambda(ChainState& state, const Eigen::MatrixXd& xtx,
                           const Eigen::VectorXd& xty, const Hyperparameters& hyper,
                           RngHandle& rng) {
  // D^-1 = tau * sigma_k / theta^2
  const Eigen::VectorXd d_inv = hyper.tau * state.hs_local / state.theta_sq;
  state.lambda = sample_gaussian_conditional(d_inv, xtx, xty, state.theta_sq, rng);
}

// One MH sweep over the local parameters. Targets, independently per k,
//   p(sigma) ∝ (1 + sigma)^-1 exp(-lambda_k^2 tau sigma / (2 theta^2))
// on [hs_local_min, hs_local_max], via a log-normal random walk with the
// given proposal log-sd. Returns the number of accepted moves.
inline long hs_step_local(ChainState& state, const Hyperparameters& hyper, double proposal_log_sd,
                          RngHandle& rng) {
  long accepted = 0;
  for (Eigen::Index k = 0; k < state.hs_local.size(); ++k) {
    const double lam = state.lambda[k];
    const double coef = lam * lam * hyper.tau / (2.0 * state.theta_sq);
    const double cur = state.hs_local[k];
    const double prop = cur * std::exp(proposal_log_sd * sample_normal(0.0, 1.0, rng));
    if (prop < hs_local_min || prop > hs_local_max) continue;
    const double log_target_cur = -std::log1p(cur) - coef * cur;
    const double log_target_prop = -std::log1p(prop) - coef * prop;
    // + log(prop/cur) corrects for the multiplicative proposal
    const double log_ratio = log_target_prop - log_target_cur + std::log(prop / cur);
    if (std::log(rng.uniform()) < log_ratio) {
      state.hs_local[k] = prop;
      ++accepted;
    }
  }
  return accepted;
}

inline void hs_step_theta(ChainState& state, const Eigen::MatrixXd& design,
                          const Eigen::VectorXd& responses, const Hyperparameters& hyper,
                          bool deterministic, RngHandle& rng) {
  step_theta(state, design, responses, hyper, deterministic, rng);
}

namespace detail {

inline PosteriorChain hs_run_loop(const Eigen::MatrixXd& design, const Eigen::VectorXd& responses,
                                  bool deterministic, const GibbsConfig& config,
                                  const Hyperparameters& hyper, ChainMetadata metadata) {
  config.validate();
  if (config.adaptive)
    throw invalid_parameter("hs_run_chain: adaptive truncation applies to the spike/slab sampler only");
  if (design.cols() != static_cast<Eigen::Index>(config.trunc.size()))
    throw dimension_mismatch("hs_run_chain: design columns != truncation size");
  metadata.warnings = hyper.validate();

  RngHandle rng(config.seed, config.stream);
  const auto K = static_cast<Eigen::Index>(config.trunc.size());
  const int d = config.trunc.dims();

  ChainState state;
  state.trunc = config.trunc;
  state.lambda = Eigen::VectorXd::Zero(K);
  state.hs_local = Eigen::VectorXd::Ones(K);
  state.theta_sq = 1.0;
  state.sigma_sq = Eigen::VectorXd::Ones(K);
  state.nu.assign(static_cast<std::size_t>(d), Eigen::VectorXd());
  state.w.assign(static_cast<std::size_t>(d), Eigen::VectorXd());
  for (int m = 0; m < d; ++m) {
    state.nu[static_cast<std::size_t>(m)] = Eigen::VectorXd::Zero(config.trunc.count(m));
    state.w[static_cast<std::size_t>(m)] =
        cumulative_weights(state.nu[static_cast<std::size_t>(m)]);
  }
  state.z = Eigen::MatrixXi::Ones(K, d);

  const bool frozen = config.freeze.has_value();
  Eigen::VectorXd frozen_d_inv;
  if (frozen) {
    if (config.freeze->sigma_sq.size() != K)
      throw dimension_mismatch("FreezeConfig: sigma_sq length mismatch");
    frozen_d_inv = config.freeze->sigma_sq.cwiseInverse();
    if (config.freeze->theta_sq) state.theta_sq = *config.freeze->theta_sq;
  }

  const Eigen::MatrixXd xtx = design.transpose() * design;
  const Eigen::VectorXd xty = design.transpose() * responses;

  metadata.kind = SamplerKind::hiergp2;
  metadata.trunc = config.trunc;
  metadata.hyper = hyper;
  metadata.seed = config.seed;
  metadata.stream = config.stream;
  metadata.iterations = config.iterations;
  metadata.burn_in = config.effective_burn_in();
  metadata.thinning = config.thinning;

  const std::uint64_t burn = config.effective_burn_in();
  double log_step = 0.0;  // log proposal sd, tuned toward 0.44 acceptance during burn-in
  long post_burn_accepts = 0, post_burn_proposals = 0;
  PosteriorChain chain;
  for (std::uint64_t b = 1; b <= config.iterations; ++b) {
    try {
      if (frozen) {
        state.lambda = sample_gaussian_conditional(frozen_d_inv, xtx, xty, state.theta_sq, rng);
      } else {
        hs_step_lambda(state, xtx, xty, hyper, rng);
        const long acc = hs_step_local(state, hyper, std::exp(log_step), rng);
        if (b <= burn) {
          const double rate = static_cast<double>(acc) / static_cast<double>(K);
          log_step += (rate - 0.44) / std::sqrt(static_cast<double>(b));
          log_step = std::clamp(log_step, -4.0, 4.0);
        } else {
          post_burn_accepts += acc;
          post_burn_proposals += K;
        }
      }
      if (!(config.freeze && config.freeze->theta_sq))
        hs_step_theta(state, design, responses, hyper, deterministic, rng);
    } catch (const numerical_error& e) {
      std::ostringstream msg;
      msg << e.what() << " [iteration " << b << "]";
      throw numerical_error(msg.str());
    }
    if (b > burn && (b - burn - 1) % config.thinning == 0) {
      if (!frozen)
        state.sigma_sq = (state.theta_sq / hyper.tau) * state.hs_local.cwiseInverse();
      else
        state.sigma_sq = config.freeze->sigma_sq;
      chain.states.push_back(state);
    }
  }
  if (post_burn_proposals > 0)
    metadata.hs_acceptance =
        static_cast<double>(post_burn_accepts) / static_cast<double>(post_burn_proposals);
  metadata.hs_proposal_log_sd = log_step;
  chain.metadata = std::move(metadata);
  return chain;
}

}  // namespace detail

inline PosteriorChain hs_run_chain_design(const Eigen::MatrixXd& design,
                                          const Eigen::VectorXd& responses,
                                          const GibbsConfig& config, const Hyperparameters& hyper,
                                          bool deterministic = false, ChainMetadata metadata = {}) {
  return detail::hs_run_loop(design, responses, deterministic, config, hyper,
                             std::move(metadata));
}

inline PosteriorChain hs_run_chain(const Dataset& dataset, const BasisFamily& family,
                                   const GibbsConfig& config, const Hyperparameters& hyper) {
  const bool sinus = family.kind == BasisKind::sinusoidal;
  dataset.validate(sinus);
  if (dataset.d() != config.trunc.dims())
    throw dimension_mismatch("hs_run_chain: dataset dimension != truncation dimension");

  ChainMetadata metadata;
  metadata.family = family;
  Eigen::VectorXd y = dataset.responses;
  if (sinus && config.trunc.start == 1 && config.center_responses) {
    metadata.centering = y.mean();
    y.array() -= metadata.centering;
  }
  const Eigen::MatrixXd design = build_design_matrix(family, config.trunc, dataset.points);
  return detail::hs_run_loop(design, y, dataset.deterministic, config, hyper,
                             std::move(metadata));
}

}  // namespace hiergp
