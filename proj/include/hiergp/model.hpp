#pragma once

// Model state shared by the samplers: hyperparameters, datasets, one Gibbs
// iterate (ChainState) and the recorded chain (PosteriorChain).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hiergp/basis.hpp"
#include "hiergp/errors.hpp"
#include "hiergp/rng.hpp"

namespace hiergp {

struct Hyperparameters {
  double alpha = 6.0;         // Beta(1, alpha) stick weights
  double a_sigma = 1.0;       // slab inverse-gamma shape
  double b_sigma = 1.0;       // slab inverse-gamma rate
  // weakly informative noise prior; a rate of order one would swamp the
  // residual sum of squares at the sample sizes used here
  double a_theta = 0.01;
  double b_theta = 0.01;
  double sigma_inf_sq = 1e-6; // spike variance; 0 only for prior simulation
  double tau = 1.0;           // global scale (HierGP2 only)

  std::vector<std::string> validate() const {
    if (!(alpha > 0.0) || !(a_sigma > 0.0) || !(b_sigma > 0.0) || !(a_theta > 0.0) ||
        !(b_theta > 0.0) || !(tau > 0.0) || !(sigma_inf_sq >= 0.0))
      throw invalid_parameter("Hyperparameters: all parameters must be positive "
                              "(sigma_inf_sq may be zero)");
    std::vector<std::string> warnings;
    const double slab_mode = b_sigma / (a_sigma + 1.0);
    if (!(sigma_inf_sq < slab_mode))
      warnings.push_back("spike variance sigma_inf_sq is not small relative to the slab mode");
    return warnings;
  }
};

struct Dataset {
  Eigen::MatrixXd points;     // n x d
  Eigen::VectorXd responses;  // n
  bool deterministic = false; // noiseless observations (emulation of exact code)

  Eigen::Index n() const { return points.rows(); }
  Eigen::Index d() const { return points.cols(); }

  void validate(bool require_unit_cube) const {
    if (points.rows() != responses.size())
      throw dimension_mismatch("Dataset: points/responses row mismatch");
    if (points.rows() < 1) throw invalid_parameter("Dataset: need at least one observation");
    if (require_unit_cube &&
        ((points.array() < 0.0).any() || (points.array() > 1.0).any()))
      throw invalid_parameter("Dataset: sinusoidal family requires points in [0,1]^d");
  }
};

// cumulative products w_j = prod_{i<=j} (1 - nu_i), with w_0 = 1
inline Eigen::VectorXd cumulative_weights(const Eigen::VectorXd& nu) {
  Eigen::VectorXd w(nu.size() + 1);
  w[0] = 1.0;
  for (Eigen::Index j = 0; j < nu.size(); ++j) w[j + 1] = w[j] * (1.0 - nu[j]);
  return w;
}

// One Gibbs iterate. Layout of lambda / sigma_sq / z rows follows
// enumerate_indices(trunc); nu[m] has count(m) entries (j = 1..C_m) and
// w[m] has count(m)+1 entries with w[m][0] = 1.
struct ChainState {
  TruncationVector trunc;
  Eigen::VectorXd lambda;
  Eigen::VectorXd sigma_sq;
  std::vector<Eigen::VectorXd> nu;
  std::vector<Eigen::VectorXd> w;
  Eigen::MatrixXi z;  // ||K|| x d, cell values in 1..C_m
  double theta_sq = 1.0;
  Eigen::VectorXd hs_local;  // local scale parameters, HierGP2 chains only

  int dims() const { return trunc.dims(); }
  std::size_t basis_count() const { return trunc.size(); }

  void refresh_weights() {
    for (int m = 0; m < dims(); ++m) w[static_cast<std::size_t>(m)] = cumulative_weights(nu[static_cast<std::size_t>(m)]);
  }

  void validate() const {
    const auto K = static_cast<Eigen::Index>(basis_count());
    if (lambda.size() != K || sigma_sq.size() != K)
      throw dimension_mismatch("ChainState: lambda/sigma_sq size mismatch");
    if (static_cast<int>(nu.size()) != dims() || static_cast<int>(w.size()) != dims())
      throw dimension_mismatch("ChainState: nu/w dimension mismatch");
    for (int m = 0; m < dims(); ++m) {
      const auto& num = nu[static_cast<std::size_t>(m)];
      const auto& wm = w[static_cast<std::size_t>(m)];
      if (num.size() != trunc.count(m) || wm.size() != trunc.count(m) + 1)
        throw dimension_mismatch("ChainState: nu/w length mismatch");
      if (wm[0] != 1.0) throw numerical_error("ChainState: w[0] must be 1");
      const Eigen::VectorXd expect = cumulative_weights(num);
      for (Eigen::Index j = 0; j < wm.size(); ++j)
        if (wm[j] != expect[j])
          throw numerical_error("ChainState: cumulative weight identity violated");
      for (Eigen::Index j = 1; j < wm.size(); ++j)
        if (wm[j] > wm[j - 1])
          throw numerical_error("ChainState: cumulative weights must be non-increasing");
    }
    if (z.rows() != K || z.cols() != dims())
      throw dimension_mismatch("ChainState: z shape mismatch");
    if (!(theta_sq > 0.0)) throw numerical_error("ChainState: theta_sq must be positive");
  }
};

// prior inclusion weight w_k = prod_m w_{k_m, m}
inline double prior_weight(const ChainState& state, const MultiIndex& k) {
  if (static_cast<int>(k.size()) != state.dims())
    throw dimension_mismatch("prior_weight: index dimension mismatch");
  double p = 1.0;
  for (std::size_t m = 0; m < k.size(); ++m) {
    const auto& wm = state.w[m];
    const int km = k[m];
    if (km < 0 || km >= wm.size()) throw invalid_parameter("prior_weight: index out of range");
    p *= wm[km];
  }
  return p;
}

inline double log_likelihood(const ChainState& state, const Eigen::MatrixXd& design,
                             const Eigen::VectorXd& responses) {
  if (design.rows() != responses.size() || design.cols() != state.lambda.size())
    throw dimension_mismatch("log_likelihood: shape mismatch");
  const Eigen::VectorXd resid = responses - design * state.lambda;
  const double n = static_cast<double>(responses.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi * state.theta_sq)
         - 0.5 * resid.squaredNorm() / state.theta_sq;
}

struct AdaptEvent {
  std::uint64_t iteration = 0;
  int dim = 0;
  int old_limit = 0;
  int new_limit = 0;
  std::string reason;  // "grow", "shrink", "capped"
};

enum class SamplerKind { hiergp, hiergp2 };

struct ChainMetadata {
  int schema_version = 1;
  SamplerKind kind = SamplerKind::hiergp;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  BasisFamily family;
  TruncationVector trunc;
  Hyperparameters hyper;
  double centering = 0.0;  // added back to every function evaluation
  std::uint64_t iterations = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thinning = 1;
  std::vector<AdaptEvent> adapt_events;
  std::vector<std::string> warnings;
  double hs_acceptance = -1.0;     // post-burn-in MH acceptance rate (hiergp2)
  double hs_proposal_log_sd = 0.0; // frozen after burn-in (hiergp2)
};

struct PosteriorChain {
  ChainMetadata metadata;
  std::vector<ChainState> states;  // post burn-in, thinned

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }

  // true unless truncation was adapted across retained states
  bool fixed_truncation() const {
    for (const auto& s : states)
      if (!(s.trunc == metadata.trunc)) return false;
    return true;
  }
};

// Draw (nu, w, sigma_sq, lambda) from the truncated prior. The final stick
// of every dimension is pinned at 1 so the latent-assignment categorical is
// exactly proper over its 1..C_m cells; consequently w_{C_m,m} = 0 and the
// top boundary index of each dimension sits in the spike. Used for chain
// initialization and for simulating test functions from the prior; with
// sigma_inf_sq = 0 the spiked coefficients are exactly zero.
struct PriorDraw {
  std::vector<Eigen::VectorXd> nu;
  std::vector<Eigen::VectorXd> w;
  Eigen::VectorXd sigma_sq;
  Eigen::VectorXd lambda;
};

inline PriorDraw draw_from_prior(const TruncationVector& trunc, const Hyperparameters& hyper,
                                 RngHandle& rng) {
  trunc.validate();
  const auto indices = enumerate_indices(trunc);
  PriorDraw draw;
  draw.nu.resize(static_cast<std::size_t>(trunc.dims()));
  draw.w.resize(static_cast<std::size_t>(trunc.dims()));
  for (int m = 0; m < trunc.dims(); ++m) {
    Eigen::VectorXd num(trunc.count(m));
    for (Eigen::Index j = 0; j + 1 < num.size(); ++j) num[j] = sample_beta(1.0, hyper.alpha, rng);
    num[num.size() - 1] = 1.0;
    draw.nu[static_cast<std::size_t>(m)] = num;
    draw.w[static_cast<std::size_t>(m)] = cumulative_weights(num);
  }
  draw.sigma_sq.resize(static_cast<Eigen::Index>(indices.size()));
  draw.lambda.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    double wk = 1.0;
    for (std::size_t m = 0; m < indices[j].size(); ++m) wk *= draw.w[m][indices[j][m]];
    const bool slab = rng.uniform() < wk;
    const double s2 = slab ? sample_inverse_gamma(hyper.a_sigma, hyper.b_sigma, rng)
                           : hyper.sigma_inf_sq;
    draw.sigma_sq[static_cast<Eigen::Index>(j)] = s2;
    draw.lambda[static_cast<Eigen::Index>(j)] =
        (s2 > 0.0) ? sample_normal(0.0, std::sqrt(s2), rng) : 0.0;
  }
  return draw;
}

}  // namespace hiergp
