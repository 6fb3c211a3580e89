#pragma once

// Dynamical system recovery: RK4 trajectory generation, monomial library
// regression with per-coordinate shrinkage chains, sequential-thresholded
// least squares as the sparse baseline, and posterior forward ensembles.

#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "hiergp/basis.hpp"
#include "hiergp/baselines.hpp"
#include "hiergp/gibbs.hpp"
#include "hiergp/model.hpp"
#include "hiergp/predict.hpp"

namespace hiergp {

struct DynSystem {
  int dimension = 0;
  std::string name;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> rhs;
};

// dx/dt = -a x^3 + b y^3,  dy/dt = -b x^3 - a y^3
inline DynSystem make_cubic2d(double a = 0.1, double b = 2.0) {
  DynSystem sys;
  sys.dimension = 2;
  sys.name = "cubic2d";
  sys.rhs = [a, b](const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    const double x3 = x[0] * x[0] * x[0];
    const double y3 = x[1] * x[1] * x[1];
    dx[0] = -a * x3 + b * y3;
    dx[1] = -b * x3 - a * y3;
  };
  return sys;
}

inline DynSystem make_lorenz(double sigma = 10.0, double rho = 28.0, double beta = 8.0 / 3.0) {
  DynSystem sys;
  sys.dimension = 3;
  sys.name = "lorenz";
  sys.rhs = [sigma, rho, beta](const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx[0] = sigma * (x[1] - x[0]);
    dx[1] = x[0] * (rho - x[2]) - x[1];
    dx[2] = x[0] * x[1] - beta * x[2];
  };
  return sys;
}

// coefficient matrix Xi (||K|| x q) over the monomial library
struct CoefMatrix {
  Eigen::MatrixXd xi;
  TruncationVector trunc;  // start = 0 monomial library

  int dimension() const { return static_cast<int>(xi.cols()); }
};

// interpret a column-coefficient matrix as a vector field
inline DynSystem make_from_coef(const CoefMatrix& coef) {
  DynSystem sys;
  sys.dimension = coef.dimension();
  sys.name = "recovered";
  const auto indices = enumerate_indices(coef.trunc);
  const Eigen::MatrixXd xi = coef.xi;
  const BasisFamily fam = monomial_basis();
  sys.rhs = [indices, xi, fam](const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx.setZero();
    for (std::size_t j = 0; j < indices.size(); ++j) {
      const double phi = eval_basis(fam, indices[j], x);
      dx += phi * xi.row(static_cast<Eigen::Index>(j)).transpose();
    }
  };
  return sys;
}

struct TrajectoryData {
  Eigen::VectorXd times;
  Eigen::MatrixXd states;  // n x q
  Eigen::MatrixXd derivs;  // n x q
  double noise_var = 0.0;
  bool truncated = false;  // blow-up cut the trajectory short
};

namespace detail {

inline bool rk4_step(const DynSystem& sys, Eigen::VectorXd& x, double h) {
  const auto q = static_cast<Eigen::Index>(sys.dimension);
  Eigen::VectorXd k1(q), k2(q), k3(q), k4(q);
  sys.rhs(x, k1);
  sys.rhs(x + 0.5 * h * k1, k2);
  sys.rhs(x + 0.5 * h * k2, k3);
  sys.rhs(x + h * k3, k4);
  x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return x.allFinite() && x.cwiseAbs().maxCoeff() < 1e9;
}

}  // namespace detail

// Classical RK4 between samples, `substeps` internal steps per recorded dt.
// Derivatives are the exact f(x(t_i)). Blow-ups truncate with a flag.
inline TrajectoryData integrate(const DynSystem& sys, const Eigen::VectorXd& x0, double dt,
                                int steps, int substeps = 10) {
  if (!(dt > 0.0)) throw invalid_parameter("integrate: dt must be > 0");
  if (substeps < 1) throw invalid_parameter("integrate: substeps must be >= 1");
  if (x0.size() != sys.dimension) throw dimension_mismatch("integrate: x0 dimension mismatch");

  TrajectoryData traj;
  traj.times.resize(steps + 1);
  traj.states.resize(steps + 1, sys.dimension);
  traj.derivs.resize(steps + 1, sys.dimension);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd dx(sys.dimension);
  const double h = dt / substeps;
  int recorded = 0;
  for (int i = 0; i <= steps; ++i) {
    traj.times[i] = i * dt;
    traj.states.row(i) = x.transpose();
    sys.rhs(x, dx);
    traj.derivs.row(i) = dx.transpose();
    recorded = i + 1;
    if (i == steps) break;
    bool ok = true;
    for (int s = 0; s < substeps && ok; ++s) ok = detail::rk4_step(sys, x, h);
    if (!ok) {
      traj.truncated = true;
      break;
    }
  }
  if (recorded <= steps + 1 && traj.truncated) {
    traj.times.conservativeResize(recorded);
    traj.states.conservativeResize(recorded, Eigen::NoChange);
    traj.derivs.conservativeResize(recorded, Eigen::NoChange);
  }
  return traj;
}

// States are exact; the derivative targets get i.i.d. N(0, noise_var) noise.
inline TrajectoryData make_training_data(const DynSystem& sys, const Eigen::VectorXd& x0,
                                         double dt, int n, double noise_var, RngHandle& rng) {
  if (n < 1) throw invalid_parameter("make_training_data: n must be >= 1");
  TrajectoryData traj = integrate(sys, x0, dt, n - 1);
  traj.noise_var = noise_var;
  if (noise_var > 0.0) {
    const double sd = std::sqrt(noise_var);
    for (Eigen::Index i = 0; i < traj.derivs.rows(); ++i)
      for (Eigen::Index j = 0; j < traj.derivs.cols(); ++j)
        traj.derivs(i, j) += sample_normal(0.0, sd, rng);
  }
  return traj;
}

// per-dimension library size given as a count of powers 0..K-1
inline TruncationVector monomial_truncation(const std::vector<int>& library_size) {
  TruncationVector trunc;
  trunc.start = 0;
  for (int K : library_size) {
    if (K < 1) throw invalid_parameter("monomial_truncation: library size must be >= 1");
    trunc.limits.push_back(K - 1);
  }
  return trunc;
}

struct DynPosterior {
  std::vector<PosteriorChain> chains;  // one per coordinate
  TruncationVector trunc;
  std::vector<MultiIndex> indices;
  Eigen::VectorXd column_scale;  // library columns were standardized by these
  Eigen::MatrixXd library;       // raw Theta(X), shared by baselines

  std::size_t retained() const { return chains.empty() ? 0 : chains.front().size(); }

  CoefMatrix draw(std::size_t b) const {
    CoefMatrix coef;
    coef.trunc = trunc;
    coef.xi.resize(static_cast<Eigen::Index>(indices.size()),
                   static_cast<Eigen::Index>(chains.size()));
    for (std::size_t m = 0; m < chains.size(); ++m)
      coef.xi.col(static_cast<Eigen::Index>(m)) =
          chains[m].states[b].lambda.cwiseQuotient(column_scale);
    return coef;
  }

  CoefMatrix median() const {
    CoefMatrix coef;
    coef.trunc = trunc;
    const auto rows = static_cast<Eigen::Index>(indices.size());
    coef.xi.resize(rows, static_cast<Eigen::Index>(chains.size()));
    std::vector<double> buf(retained());
    for (std::size_t m = 0; m < chains.size(); ++m) {
      for (Eigen::Index j = 0; j < rows; ++j) {
        for (std::size_t b = 0; b < retained(); ++b)
          buf[b] = chains[m].states[b].lambda[j] / column_scale[j];
        std::sort(buf.begin(), buf.end());
        coef.xi(j, static_cast<Eigen::Index>(m)) = empirical_quantile_sorted(buf, 0.5);
      }
    }
    return coef;
  }

  CoefMatrix mean() const {
    CoefMatrix coef;
    coef.trunc = trunc;
    const auto rows = static_cast<Eigen::Index>(indices.size());
    coef.xi = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(chains.size()));
    for (std::size_t m = 0; m < chains.size(); ++m) {
      for (std::size_t b = 0; b < retained(); ++b)
        coef.xi.col(static_cast<Eigen::Index>(m)) += chains[m].states[b].lambda;
      coef.xi.col(static_cast<Eigen::Index>(m)) /=
          static_cast<double>(retained());
      coef.xi.col(static_cast<Eigen::Index>(m)).array() /= column_scale.array();
    }
    return coef;
  }

  // fraction of retained states in which term j sat in the slab
  Eigen::VectorXd slab_frequency(std::size_t coord) const {
    const auto& chain = chains.at(coord);
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(indices.size()));
    for (const auto& st : chain.states)
      for (Eigen::Index j = 0; j < freq.size(); ++j)
        if (st.sigma_sq[j] != chain.metadata.hyper.sigma_inf_sq) freq[j] += 1.0;
    return freq / static_cast<double>(chain.size());
  }

  // selected term = slab-indicator frequency above 0.5
  std::vector<std::size_t> selected(std::size_t coord, double threshold = 0.5) const {
    const Eigen::VectorXd freq = slab_frequency(coord);
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < freq.size(); ++j)
      if (freq[j] > threshold) out.push_back(static_cast<std::size_t>(j));
    return out;
  }
};

// Fit q independent shrinkage chains, one per derivative coordinate, on the
// shared monomial library. Library columns are standardized internally (the
// spike variance is only meaningful on a common column scale); reported
// coefficients are mapped back to raw units. Chains run concurrently.
inline DynPosterior fit_dynamics(const TrajectoryData& data, const std::vector<int>& library_size,
                                 const Hyperparameters& hyper, GibbsConfig config,
                                 int threads = 0) {
  const auto q = static_cast<std::size_t>(data.states.cols());
  if (library_size.size() != q)
    throw dimension_mismatch("fit_dynamics: library size per state dimension required");

  DynPosterior post;
  post.trunc = monomial_truncation(library_size);
  post.indices = enumerate_indices(post.trunc);
  post.library = build_design_matrix(monomial_basis(), post.trunc, data.states);

  const double n = static_cast<double>(post.library.rows());
  post.column_scale.resize(post.library.cols());
  for (Eigen::Index j = 0; j < post.library.cols(); ++j) {
    const double rms = post.library.col(j).norm() / std::sqrt(n);
    post.column_scale[j] = (rms > 0.0) ? rms : 1.0;
  }
  Eigen::MatrixXd scaled = post.library;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) scaled.col(j) /= post.column_scale[j];

  config.trunc = post.trunc;
  post.chains.resize(q);
  std::vector<std::exception_ptr> errors(q);

  auto worker = [&](std::size_t m) {
    try {
      GibbsConfig cfg = config;
      cfg.stream = config.stream + m;  // independent sub-stream per coordinate
      ChainMetadata metadata;
      metadata.family = monomial_basis();
      post.chains[m] = run_chain_design(scaled, data.derivs.col(static_cast<Eigen::Index>(m)),
                                        cfg, hyper, false, std::move(metadata));
    } catch (...) {
      errors[m] = std::current_exception();
    }
  };

  const auto hw = static_cast<int>(std::thread::hardware_concurrency());
  const int pool = threads > 0 ? threads : std::max(1, hw);
  if (pool <= 1 || q <= 1) {
    for (std::size_t m = 0; m < q; ++m) worker(m);
  } else {
    std::vector<std::thread> running;
    for (std::size_t m = 0; m < q; ++m) running.emplace_back(worker, m);
    for (auto& t : running) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return post;
}

inline TrajectoryData forward_simulate(const CoefMatrix& coef, const Eigen::VectorXd& x0,
                                       double dt, int steps, int substeps = 10) {
  return integrate(make_from_coef(coef), x0, dt, steps, substeps);
}

// Forward runs of `count` evenly thinned posterior draws.
struct EnsembleMember {
  std::size_t draw_index = 0;
  TrajectoryData trajectory;
};

inline std::vector<EnsembleMember> ensemble_forward(const DynPosterior& post, std::size_t count,
                                                    const Eigen::VectorXd& x0, double dt,
                                                    int steps, int substeps = 10) {
  const std::size_t M = post.retained();
  if (M == 0) throw invalid_parameter("ensemble_forward: empty posterior");
  count = std::min(count, M);
  std::vector<EnsembleMember> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t b = (count == 1) ? M - 1 : (i * (M - 1)) / (count - 1);
    EnsembleMember member;
    member.draw_index = b;
    member.trajectory = forward_simulate(post.draw(b), x0, dt, steps, substeps);
    out.push_back(std::move(member));
  }
  return out;
}

// mean-over-coordinates stddev across ensemble members at one time index
inline double ensemble_spread(const std::vector<EnsembleMember>& ensemble, int step) {
  if (ensemble.empty()) throw invalid_parameter("ensemble_spread: empty ensemble");
  const auto q = ensemble.front().trajectory.states.cols();
  double total = 0.0;
  for (Eigen::Index c = 0; c < q; ++c) {
    double mean = 0.0, count = 0.0;
    for (const auto& member : ensemble) {
      if (step < member.trajectory.states.rows()) {
        mean += member.trajectory.states(step, c);
        count += 1.0;
      }
    }
    if (count < 2.0) continue;
    mean /= count;
    double ss = 0.0;
    for (const auto& member : ensemble)
      if (step < member.trajectory.states.rows()) {
        const double dev = member.trajectory.states(step, c) - mean;
        ss += dev * dev;
      }
    total += std::sqrt(ss / (count - 1.0));
  }
  return total / static_cast<double>(q);
}

struct SindyFit {
  CoefMatrix coef;
  Eigen::VectorXd threshold;  // chosen per coordinate
  std::vector<std::string> warnings;
};

namespace detail {

// sequential thresholded least squares on one response column
inline Eigen::VectorXd stls(const Eigen::MatrixXd& library, const Eigen::VectorXd& y,
                            double threshold) {
  const Eigen::Index p = library.cols();
  std::vector<char> active(static_cast<std::size_t>(p), 1);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int pass = 0; pass < 64; ++pass) {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < p; ++j)
      if (active[static_cast<std::size_t>(j)]) cols.push_back(j);
    beta.setZero();
    if (cols.empty()) break;
    Eigen::MatrixXd sub(library.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = library.col(cols[c]);
    const Eigen::VectorXd bsub = ols_fit(sub, y);
    bool changed = false;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (std::abs(bsub[static_cast<Eigen::Index>(c)]) < threshold) {
        active[static_cast<std::size_t>(cols[c])] = 0;
        changed = true;
      } else {
        beta[cols[c]] = bsub[static_cast<Eigen::Index>(c)];
      }
    }
    if (!changed) break;
  }
  return beta;
}

}  // namespace detail

inline std::vector<double> default_threshold_grid() {
  std::vector<double> grid{0.0};
  for (int i = 0; i < 25; ++i) grid.push_back(1e-4 * std::pow(10.0 / 1e-4, i / 24.0));
  return grid;
}

// Per-coordinate STLS; the threshold is picked on a grid by held-out
// derivative MSE (every 5th row held out), then the fit is refreshed on the
// full data. Ties prefer the larger (sparser) threshold.
inline SindyFit sindy_baseline(const TrajectoryData& data, const std::vector<int>& library_size,
                               std::vector<double> threshold_grid = {}) {
  SindyFit fit;
  fit.coef.trunc = monomial_truncation(library_size);
  const Eigen::MatrixXd library =
      build_design_matrix(monomial_basis(), fit.coef.trunc, data.states);
  if (threshold_grid.empty()) threshold_grid = default_threshold_grid();
  std::sort(threshold_grid.begin(), threshold_grid.end(), std::greater<double>());

  const Eigen::Index n = library.rows();
  std::vector<Eigen::Index> hold, train;
  for (Eigen::Index i = 0; i < n; ++i) ((i % 5 == 4) ? hold : train).push_back(i);
  Eigen::MatrixXd lib_tr(static_cast<Eigen::Index>(train.size()), library.cols());
  Eigen::MatrixXd lib_ho(static_cast<Eigen::Index>(hold.size()), library.cols());
  for (std::size_t i = 0; i < train.size(); ++i) lib_tr.row(static_cast<Eigen::Index>(i)) = library.row(train[i]);
  for (std::size_t i = 0; i < hold.size(); ++i) lib_ho.row(static_cast<Eigen::Index>(i)) = library.row(hold[i]);

  const auto q = data.derivs.cols();
  fit.coef.xi.resize(library.cols(), q);
  fit.threshold.resize(q);
  for (Eigen::Index m = 0; m < q; ++m) {
    Eigen::VectorXd y_tr(lib_tr.rows()), y_ho(lib_ho.rows());
    for (std::size_t i = 0; i < train.size(); ++i) y_tr[static_cast<Eigen::Index>(i)] = data.derivs(train[i], m);
    for (std::size_t i = 0; i < hold.size(); ++i) y_ho[static_cast<Eigen::Index>(i)] = data.derivs(hold[i], m);

    double best_mse = std::numeric_limits<double>::infinity();
    double best_thresh = 0.0;
    for (double t : threshold_grid) {
      const Eigen::VectorXd beta = detail::stls(lib_tr, y_tr, t);
      const double mse = (y_ho - lib_ho * beta).squaredNorm() / static_cast<double>(y_ho.size());
      if (mse < best_mse) {
        best_mse = mse;
        best_thresh = t;
      }
    }
    fit.threshold[m] = best_thresh;
    const Eigen::VectorXd beta = detail::stls(library, data.derivs.col(m), best_thresh);
    if ((beta.array() == 0.0).all())
      fit.warnings.push_back("sindy_baseline: empty support in coordinate " + std::to_string(m));
    fit.coef.xi.col(m) = beta;
  }
  return fit;
}

}  // namespace hiergp
