#pragma once

// Adaptive truncation: with probability p(b) = exp(alpha0 + alpha1 * b) the
// sampler drops inactive basis columns per dimension (or appends a fresh
// spike-initialized one) and resizes the whole state consistently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hiergp/model.hpp"

namespace hiergp {

struct AdaptiveConfig {
  std::uint64_t b_bar = 200;  // first iteration eligible for adaptation
  double alpha0 = -1.0;
  double alpha1 = -5e-4;  // must be < 0 so adaptation diminishes
  int k_max = 16;         // hard cap on the per-dimension limit
  // Alternative activity count: distinct per-dimension index values with at
  // least one active column, instead of the raw sum of z-threshold clears.
  bool distinct_level_count = false;

  void validate() const {
    if (!(alpha1 < 0.0)) throw invalid_parameter("AdaptiveConfig: alpha1 must be negative");
    if (std::exp(alpha0 + alpha1 * static_cast<double>(b_bar)) > 1.0)
      throw invalid_parameter("AdaptiveConfig: p(b_bar) must lie in (0,1]");
    if (k_max < 1) throw invalid_parameter("AdaptiveConfig: k_max must be >= 1");
  }
};

namespace detail {

struct DimPlan {
  std::vector<int> kept_levels;  // surviving index values, original order
  int new_count = 0;
  const char* reason = "";
  bool changed = false;
};

inline bool is_spike(double sigma_sq, double sigma_inf_sq) { return sigma_sq == sigma_inf_sq; }

}  // namespace detail

// One adaptation opportunity at iteration b. Returns the events applied
// (empty when the gate does not fire or nothing changes).
inline std::vector<AdaptEvent> maybe_adapt(ChainState& state, std::uint64_t b,
                                           const AdaptiveConfig& cfg,
                                           const Hyperparameters& hyper, RngHandle& rng) {
  cfg.validate();
  if (b < cfg.b_bar) return {};
  const double p = std::exp(cfg.alpha0 + cfg.alpha1 * static_cast<double>(b));
  if (rng.uniform() >= p) return {};

  const auto indices = enumerate_indices(state.trunc);
  const int d = state.dims();
  const int start = state.trunc.start;
  const int cap_count = cfg.k_max - start + 1;

  std::vector<detail::DimPlan> plans(static_cast<std::size_t>(d));
  std::vector<AdaptEvent> events;
  bool any_changed = false;

  for (int m = 0; m < d; ++m) {
    auto& plan = plans[static_cast<std::size_t>(m)];
    const int count = state.trunc.count(m);

    // active levels: values v with at least one non-spike column at k_m = v
    std::vector<char> level_active(static_cast<std::size_t>(count), 0);
    long clears = 0;
    for (std::size_t pos = 0; pos < indices.size(); ++pos) {
      const int km = indices[pos][static_cast<std::size_t>(m)];
      if (state.z(static_cast<Eigen::Index>(pos), m) > km) ++clears;
      if (!detail::is_spike(state.sigma_sq[static_cast<Eigen::Index>(pos)], hyper.sigma_inf_sq))
        level_active[static_cast<std::size_t>(km - start)] = 1;
    }
    long active_levels = std::count(level_active.begin(), level_active.end(), 1);
    const long k_star = cfg.distinct_level_count ? active_levels : clears;

    if (k_star <= count) {
      // shrink: keep the active levels in order, then pad with fresh ones
      for (int v = 0; v < count; ++v)
        if (level_active[static_cast<std::size_t>(v)]) plan.kept_levels.push_back(start + v);
      const int want = std::max(static_cast<int>(k_star) + 1,
                                static_cast<int>(plan.kept_levels.size()) + 1);
      plan.new_count = std::max(std::min(want, cap_count), 1);
      plan.reason = want > cap_count ? "capped" : "shrink";
    } else if (count >= cap_count) {
      // growth blocked at the cap
      for (int v = 0; v < count; ++v) plan.kept_levels.push_back(start + v);
      plan.new_count = count;
      plan.reason = "capped";
    } else {
      for (int v = 0; v < count; ++v) plan.kept_levels.push_back(start + v);
      plan.new_count = count + 1;
      plan.reason = "grow";
    }
    if (plan.new_count < static_cast<int>(plan.kept_levels.size()))
      plan.kept_levels.resize(static_cast<std::size_t>(plan.new_count));
    plan.changed = plan.new_count != count ||
                   plan.kept_levels.size() != static_cast<std::size_t>(count);
    if (plan.changed || std::string(plan.reason) == "capped") {
      AdaptEvent ev;
      ev.iteration = b;
      ev.dim = m;
      ev.old_limit = state.trunc.limits[static_cast<std::size_t>(m)];
      ev.new_limit = start + plan.new_count - 1;
      ev.reason = plan.reason;
      events.push_back(ev);
    }
    any_changed = any_changed || plan.changed;
  }
  if (!any_changed) return events;

  // rebuild the state over the new truncation
  TruncationVector new_trunc;
  new_trunc.start = start;
  new_trunc.limits.resize(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m)
    new_trunc.limits[static_cast<std::size_t>(m)] =
        start + plans[static_cast<std::size_t>(m)].new_count - 1;

  // old flat position lookup by original index values
  const TruncationVector old_trunc = state.trunc;
  auto old_pos = [&](const MultiIndex& k) -> std::size_t {
    std::size_t pos = 0;
    for (int m = 0; m < d; ++m) {
      pos = pos * static_cast<std::size_t>(old_trunc.count(m)) +
            static_cast<std::size_t>(k[static_cast<std::size_t>(m)] - start);
    }
    return pos;
  };

  const auto new_indices = enumerate_indices(new_trunc);
  const auto new_size = static_cast<Eigen::Index>(new_indices.size());
  Eigen::VectorXd lambda(new_size), sigma_sq(new_size);
  Eigen::MatrixXi z(new_size, d);
  const double spike_sd = std::sqrt(std::max(hyper.sigma_inf_sq, 0.0));

  for (Eigen::Index pos = 0; pos < new_size; ++pos) {
    const auto& nk = new_indices[static_cast<std::size_t>(pos)];
    MultiIndex source(static_cast<std::size_t>(d));
    bool fresh = false;
    for (int m = 0; m < d; ++m) {
      const auto& kept = plans[static_cast<std::size_t>(m)].kept_levels;
      const auto slot = static_cast<std::size_t>(nk[static_cast<std::size_t>(m)] - start);
      if (slot < kept.size()) {
        source[static_cast<std::size_t>(m)] = kept[slot];
      } else {
        fresh = true;
        break;
      }
    }
    if (fresh) {
      sigma_sq[pos] = hyper.sigma_inf_sq;
      lambda[pos] = (spike_sd > 0.0) ? sample_normal(0.0, spike_sd, rng) : 0.0;
    } else {
      const std::size_t op = old_pos(source);
      sigma_sq[pos] = state.sigma_sq[static_cast<Eigen::Index>(op)];
      lambda[pos] = state.lambda[static_cast<Eigen::Index>(op)];
    }
    // keep the slab <-> z-clearance link intact until the next z sweep
    const bool slab = !detail::is_spike(sigma_sq[pos], hyper.sigma_inf_sq);
    for (int m = 0; m < d; ++m)
      z(pos, m) = slab ? new_trunc.count(m) : 1;
  }

  std::vector<Eigen::VectorXd> nu(static_cast<std::size_t>(d));
  for (int m = 0; m < d; ++m) {
    const auto& plan = plans[static_cast<std::size_t>(m)];
    Eigen::VectorXd num(plan.new_count);
    for (int j = 0; j < plan.new_count; ++j) {
      if (static_cast<std::size_t>(j) < plan.kept_levels.size()) {
        const int old_stick = plan.kept_levels[static_cast<std::size_t>(j)] - start;  // 0-based
        num[j] = state.nu[static_cast<std::size_t>(m)][old_stick];
      } else {
        num[j] = sample_beta(1.0, hyper.alpha, rng);
      }
    }
    // keep the proper-truncation structure: only the final stick is pinned
    for (int j = 0; j + 1 < plan.new_count; ++j)
      if (num[j] >= 1.0) num[j] = sample_beta(1.0, hyper.alpha, rng);
    num[plan.new_count - 1] = 1.0;
    nu[static_cast<std::size_t>(m)] = num;
  }

  state.trunc = new_trunc;
  state.lambda = std::move(lambda);
  state.sigma_sq = std::move(sigma_sq);
  state.z = std::move(z);
  state.nu = std::move(nu);
  state.w.resize(static_cast<std::size_t>(d));
  state.refresh_weights();
  state.validate();
  return events;
}

}  // namespace hiergp
