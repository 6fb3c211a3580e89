// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Heavier studies reuse the benchmark harness; every tolerance is
// pinned in code.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "hiergp/hiergp.hpp"

using namespace hiergp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// criterion 1: frozen-structure chains vs a quadrature oracle

struct ConjugateOracle {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
};

// Posterior of (Lambda, theta^2) with Lambda ~ N(0, D), theta^2 ~ IG(a, b):
// integrate the conditional Gaussian over the 1-d theta^2 posterior grid.
ConjugateOracle conjugate_quadrature(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& d_diag, double a_theta,
                                     double b_theta) {
  const Eigen::Index n = y.size(), p = design.cols();
  const Eigen::MatrixXd xdx = design * d_diag.asDiagonal() * design.transpose();
  const int grid_n = 2400;
  std::vector<double> logw(grid_n), mu_acc, second_acc;
  std::vector<Eigen::VectorXd> mus(grid_n), vdiags(grid_n);
  std::vector<double> t2s(grid_n);
  double max_logw = -1e300;
  for (int i = 0; i < grid_n; ++i) {
    const double t2 = 1e-3 * std::pow(1e6, (i + 0.5) / grid_n);  // log grid 1e-3..1e3
    t2s[i] = t2;
    Eigen::MatrixXd cov = xdx;
    cov.diagonal().array() += t2;
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::VectorXd alpha = llt.solve(y);
    double logdet = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) logdet += std::log(llt.matrixLLT()(r, r));
    const double log_lik = -0.5 * y.dot(alpha) - logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
    const double log_prior = a_theta * std::log(b_theta) - std::lgamma(a_theta) -
                             (a_theta + 1.0) * std::log(t2) - b_theta / t2;
    logw[static_cast<std::size_t>(i)] = log_lik + log_prior + std::log(t2);  // log-grid measure
    max_logw = std::max(max_logw, logw[static_cast<std::size_t>(i)]);

    Eigen::MatrixXd prec = design.transpose() * design / t2;
    prec.diagonal() += d_diag.cwiseInverse();
    const Eigen::MatrixXd v = prec.inverse();
    mus[static_cast<std::size_t>(i)] = v * design.transpose() * y / t2;
    vdiags[static_cast<std::size_t>(i)] = v.diagonal();
  }
  double total = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p), second = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < grid_n; ++i) {
    const double w = std::exp(logw[static_cast<std::size_t>(i)] - max_logw);
    total += w;
    mean += w * mus[static_cast<std::size_t>(i)];
    second += w * (vdiags[static_cast<std::size_t>(i)] +
                   mus[static_cast<std::size_t>(i)].cwiseProduct(mus[static_cast<std::size_t>(i)]));
  }
  mean /= total;
  second /= total;
  ConjugateOracle oracle;
  oracle.mean = mean;
  oracle.var = second - mean.cwiseProduct(mean);
  return oracle;
}

void criterion_1() {
  const auto t0 = Clock::now();
  RngHandle data_rng(101);
  Eigen::MatrixXd design(10, 3);
  for (Eigen::Index i = 0; i < design.size(); ++i) design(i) = sample_normal(0, 1, data_rng);
  Eigen::VectorXd truth(3);
  truth << 1.2, -0.8, 2.0;
  Eigen::VectorXd y = design * truth;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sample_normal(0.0, 0.3, data_rng);
  Eigen::VectorXd d_diag(3);
  d_diag << 0.9, 1.4, 0.6;
  const Hyperparameters hyper;

  const ConjugateOracle oracle =
      conjugate_quadrature(design, y, d_diag, hyper.a_theta, hyper.b_theta);

  auto run_frozen = [&](bool horseshoe) {
    GibbsConfig cfg;
    cfg.trunc = TruncationVector{{3}, 1};
    cfg.iterations = 10000;
    cfg.burn_in = 2000;
    cfg.seed = horseshoe ? 102 : 103;
    cfg.freeze = FreezeConfig{d_diag, std::nullopt};
    return horseshoe ? hs_run_chain_design(design, y, cfg, hyper)
                     : run_chain_design(design, y, cfg, hyper);
  };

  bool pass = true;
  std::ostringstream detail;
  for (bool horseshoe : {false, true}) {
    const PosteriorChain chain = run_frozen(horseshoe);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3), second = Eigen::VectorXd::Zero(3);
    for (const auto& st : chain.states) {
      mean += st.lambda;
      second += st.lambda.cwiseProduct(st.lambda);
    }
    mean /= static_cast<double>(chain.size());
    second /= static_cast<double>(chain.size());
    const Eigen::VectorXd var = second - mean.cwiseProduct(mean);
    for (int j = 0; j < 3; ++j) {
      pass = pass && std::abs(mean[j] - oracle.mean[j]) <= 0.02 * std::abs(oracle.mean[j]);
      pass = pass && std::abs(var[j] - oracle.var[j]) <= 0.05 * oracle.var[j];
    }
    detail << (horseshoe ? "hiergp2" : "hiergp") << " mean err "
           << (mean - oracle.mean).cwiseAbs().maxCoeff() << " ";
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 10.0;
  detail << "(" << secs << " s)";
  report("criterion 1 (conjugate oracle equivalence)", pass, detail.str());
}

// ---------------------------------------------------------------------------
// criterion 2: prior law of the cumulative weights

void criterion_2() {
  const auto t0 = Clock::now();
  const double alpha = 6.0;
  RngHandle rng(104);
  const int draws = 100000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(9);
  for (int i = 0; i < draws; ++i) {
    double w = 1.0;
    for (int k = 1; k <= 8; ++k) {
      w *= 1.0 - sample_beta(1.0, alpha, rng);
      acc[k] += w;
    }
  }
  bool pass = true;
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double expect = std::pow(alpha / (1.0 + alpha), k);
    const double rel = std::abs(acc[k] / draws - expect) / expect;
    worst = std::max(worst, rel);
    pass = pass && rel <= 0.02;
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 5.0;
  std::ostringstream detail;
  detail << "max relative error " << worst << " (" << secs << " s)";
  report("criterion 2 (prior weight law)", pass, detail.str());
}

// ---------------------------------------------------------------------------
// criteria 3 and 4: the d=2 prior-simulation study

void criteria_3_4() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.function = "prior";
  cfg.models = {ModelKind::hiergp, ModelKind::hiergp2, ModelKind::ols, ModelKind::lasso,
                ModelKind::matern};
  cfg.d = 2;
  cfg.truncation = {8, 8};
  cfg.n_train = 70;
  cfg.n_test = 400;
  cfg.replications = 50;
  cfg.iterations = 2000;
  cfg.seed = 2027;
  cfg.noise_var = 0.01;  // observed responses carry noise; truths are exact
  cfg.threads = 0;

  const BenchmarkResult result = run_benchmark(cfg);

  auto median_first20 = [&](const std::string& model) {
    std::vector<double> vals;
    for (const auto& r : result.rows)
      if (r.model == model && r.replication < 20 && r.status == "ok") vals.push_back(r.rmse);
    std::sort(vals.begin(), vals.end());
    return empirical_quantile_sorted(vals, 0.5);
  };
  const double med_hier = median_first20("hiergp");
  const double med_ols = median_first20("ols");
  const double med_lasso = median_first20("lasso");
  const double med_matern = median_first20("matern");
  const double secs = seconds_since(t0);

  {
    const bool pass = med_hier < med_ols && med_hier < med_lasso && med_hier < med_matern &&
                      secs < 1800.0;
    std::ostringstream detail;
    detail << "median rmse over 20 reps: hiergp " << med_hier << " vs ols " << med_ols
           << ", lasso " << med_lasso << ", matern " << med_matern << " (" << secs << " s)";
    report("criterion 3 (emulation ordering)", pass, detail.str());
  }

  {
    // per-replication wins against both least-squares baselines, 50 reps
    int wins = 0, total = 0;
    for (int rep = 0; rep < 50; ++rep) {
      double h = -1, o = -1, l = -1;
      for (const auto& r : result.rows) {
        if (r.replication != rep || r.status != "ok") continue;
        if (r.model == "hiergp") h = r.rmse;
        if (r.model == "ols") o = r.rmse;
        if (r.model == "lasso") l = r.rmse;
      }
      if (h >= 0 && o >= 0 && l >= 0) {
        ++total;
        if (h < o && h < l) ++wins;
      }
    }
    std::ostringstream detail;
    detail << wins << "/" << total << " replications beat both least-squares baselines";
    report("criterion 3b (supplementary per-replication wins)", wins >= 45 && total == 50,
           detail.str());
  }

  {
    const double cover_hier = result.mean_metric("hiergp", &MetricsRow::coverage);
    const double width_hier = result.mean_metric("hiergp", &MetricsRow::width);
    const double width_matern = result.mean_metric("matern", &MetricsRow::width);
    const bool pass = cover_hier >= 0.90 && width_hier < width_matern;
    std::ostringstream detail;
    detail << "hiergp coverage " << cover_hier << ", width " << width_hier << " vs matern width "
           << width_matern;
    report("criterion 4 (coverage and width)", pass, detail.str());

    const double cover_hs = result.mean_metric("hiergp2", &MetricsRow::coverage);
    std::ostringstream d2;
    d2 << "hiergp2 coverage " << cover_hs;
    report("criterion 4b (supplementary horseshoe coverage)", cover_hs >= 0.95, d2.str());
  }
}

// ---------------------------------------------------------------------------
// criterion 5: cubic dynamical recovery

std::size_t term_at(const std::vector<MultiIndex>& indices, const MultiIndex& k) {
  for (std::size_t i = 0; i < indices.size(); ++i)
    if (indices[i] == k) return i;
  throw std::logic_error("term not in library");
}

double trajectory_rmse(const TrajectoryData& a, const TrajectoryData& b, int steps) {
  const Eigen::Index common =
      std::min<Eigen::Index>(std::min(a.states.rows(), b.states.rows()), steps + 1);
  double sse = 0.0;
  for (Eigen::Index i = 0; i < common; ++i)
    sse += (a.states.row(i) - b.states.row(i)).squaredNorm();
  // truncated (blown-up) trajectories pay the full penalty for missing rows
  const double denom = static_cast<double>((steps + 1) * a.states.cols());
  if (common < steps + 1) sse += 1e6 * static_cast<double>(steps + 1 - common);
  return std::sqrt(sse / denom);
}

void criterion_5() {
  const auto t0 = Clock::now();
  const double a = 0.1, b = 2.0;
  const DynSystem sys = make_cubic2d(a, b);
  const Eigen::Vector2d x0(2.0, 0.0);
  RngHandle rng(301);
  const TrajectoryData data = make_training_data(sys, x0, 0.04, 500, 0.01, rng);

  Hyperparameters hyper;
  GibbsConfig gc;
  gc.iterations = 2000;
  gc.seed = 1301;
  const DynPosterior post = fit_dynamics(data, {5, 5}, hyper, gc);
  const auto& idx = post.indices;
  const auto x3 = term_at(idx, {3, 0});
  const auto y3 = term_at(idx, {0, 3});
  const auto constant = term_at(idx, {0, 0});

  bool support_ok = true;
  for (std::size_t m = 0; m < 2; ++m) {
    auto sel = post.selected(m);
    std::set<std::size_t> got(sel.begin(), sel.end());
    got.erase(constant);  // structurally always slab-eligible
    support_ok = support_ok && got == std::set<std::size_t>{x3, y3};
  }

  const CoefMatrix med = post.median();
  const double m_x3_0 = med.xi(static_cast<Eigen::Index>(x3), 0);
  const double m_y3_0 = med.xi(static_cast<Eigen::Index>(y3), 0);
  const double m_x3_1 = med.xi(static_cast<Eigen::Index>(x3), 1);
  const double m_y3_1 = med.xi(static_cast<Eigen::Index>(y3), 1);
  const bool magnitude_ok = std::abs(m_x3_0 + a) <= 0.15 * a && std::abs(m_y3_0 - b) <= 0.15 * b &&
                            std::abs(m_x3_1 + b) <= 0.15 * b && std::abs(m_y3_1 + a) <= 0.15 * a;

  // the criterion is stated for the posterior-median coefficient matrix
  const TrajectoryData truth = integrate(sys, x0, 0.04, 500);
  const TrajectoryData ours = forward_simulate(med, x0, 0.04, 500);
  const SindyFit sindy = sindy_baseline(data, {5, 5});
  const TrajectoryData theirs = forward_simulate(sindy.coef, x0, 0.04, 500);
  const double rmse_ours = trajectory_rmse(ours, truth, 500);
  const double rmse_sindy = trajectory_rmse(theirs, truth, 500);

  const double secs = seconds_since(t0);
  const bool pass = support_ok && magnitude_ok && rmse_ours < rmse_sindy && secs < 900.0;
  std::ostringstream detail;
  detail << "support " << (support_ok ? "exact" : "wrong") << "; medians (" << m_x3_0 << ", "
         << m_y3_0 << "; " << m_x3_1 << ", " << m_y3_1 << "); forward rmse " << rmse_ours
         << " vs sindy " << rmse_sindy << " (" << secs << " s)";
  report("criterion 5 (cubic recovery)", pass, detail.str());

  // supplementary: posterior-mean forward solve beats the baseline pointwise
  // at most time points
  {
    const TrajectoryData mean_traj = forward_simulate(post.mean(), x0, 0.04, 500);
    const Eigen::Index common = std::min(mean_traj.states.rows(), theirs.states.rows());
    int better = 0, count = 0;
    for (Eigen::Index i = 0; i < common; ++i) {
      const double eo = (mean_traj.states.row(i) - truth.states.row(i)).norm();
      const double es = (theirs.states.row(i) - truth.states.row(i)).norm();
      ++count;
      if (eo <= es) ++better;
    }
    std::ostringstream d2;
    d2 << better << "/" << count << " time points at or below the baseline error";
    report("criterion 5b (supplementary pointwise ordering)",
           better >= static_cast<int>(0.8 * count), d2.str());
  }
}

// ---------------------------------------------------------------------------
// criterion 6: Lorenz recovery and chaotic ensemble divergence

void criterion_6() {
  const auto t0 = Clock::now();
  const double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
  const DynSystem sys = make_lorenz(sigma, rho, beta);
  Eigen::Vector3d x0(-8.0, 7.0, 27.0);
  RngHandle rng(107);
  const TrajectoryData data = make_training_data(sys, x0, 0.05, 200, 0.01, rng);

  Hyperparameters hyper;
  GibbsConfig gc;
  gc.iterations = 2000;
  gc.seed = 108;
  const DynPosterior post = fit_dynamics(data, {5, 5, 5}, hyper, gc);
  const auto& idx = post.indices;
  const CoefMatrix med = post.median();

  struct Term {
    MultiIndex k;
    int coord;
    double value;
  };
  const std::vector<Term> expected = {
      {{1, 0, 0}, 0, -sigma}, {{0, 1, 0}, 0, sigma},  {{1, 0, 0}, 1, rho},
      {{1, 0, 1}, 1, -1.0},   {{0, 1, 0}, 1, -1.0},   {{1, 1, 0}, 2, 1.0},
      {{0, 0, 1}, 2, -beta},
  };
  bool coef_ok = true;
  std::ostringstream coef_detail;
  for (const auto& term : expected) {
    const double got = med.xi(static_cast<Eigen::Index>(term_at(idx, term.k)), term.coord);
    const bool ok = std::abs(got - term.value) <= 0.15 * std::abs(term.value);
    coef_ok = coef_ok && ok;
    if (!ok) coef_detail << " [coord " << term.coord << " got " << got << " want " << term.value << "]";
  }

  const auto ensemble = ensemble_forward(post, 50, x0, 0.05, 200);
  const double spread_1 = ensemble_spread(ensemble, 20);    // t = 1
  const double spread_10 = ensemble_spread(ensemble, 200);  // t = 10
  const double ratio = spread_10 / std::max(spread_1, 1e-300);

  const double secs = seconds_since(t0);
  const bool pass = coef_ok && ratio > 5.0;
  std::ostringstream detail;
  detail << "7 coefficients " << (coef_ok ? "within 15%" : std::string("off:") + coef_detail.str())
         << "; spread ratio " << ratio << " (" << secs << " s)";
  report("criterion 6 (Lorenz recovery)", pass, detail.str());
}

// ---------------------------------------------------------------------------
// criterion 7: sampler micro-contract suite

void criterion_7() {
  const auto t0 = Clock::now();
  const std::string cmd = std::string(HIERGP_UNIT_TESTS_PATH) +
                          " \"[rng],[model],[gibbs],[horseshoe]\" > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  const bool pass = WEXITSTATUS(status) == 0 && secs < 300.0;
  std::ostringstream detail;
  detail << "exit " << WEXITSTATUS(status) << " (" << secs << " s)";
  report("criterion 7 (sampler micro-contracts)", pass, detail.str());
}

// ---------------------------------------------------------------------------
// criterion 8: determinism end to end

void criterion_8() {
  bool pass = true;
  std::ostringstream detail;

  // chains
  {
    RngHandle data_rng(109);
    Eigen::VectorXd xs(30), ys(30);
    for (int i = 0; i < 30; ++i) {
      xs[i] = data_rng.uniform();
      ys[i] = std::sin(2.0 * std::numbers::pi * xs[i]) + sample_normal(0.0, 0.1, data_rng);
    }
    GibbsConfig cfg;
    cfg.trunc = TruncationVector{{5}, 1};
    cfg.iterations = 400;
    cfg.seed = 110;
    std::ostringstream s1, s2;
    write_chain(run_chain_univariate(xs, ys, 5, cfg, Hyperparameters{}), s1);
    write_chain(run_chain_univariate(xs, ys, 5, cfg, Hyperparameters{}), s2);
    pass = pass && s1.str() == s2.str();
    detail << "chains " << (s1.str() == s2.str() ? "identical" : "DIFFER");
  }

  // benchmark files
  {
    ExperimentConfig cfg;
    cfg.models = {ModelKind::hiergp, ModelKind::ols, ModelKind::matern};
    cfg.truncation = {4, 4};
    cfg.n_train = 25;
    cfg.n_test = 40;
    cfg.replications = 3;
    cfg.iterations = 250;
    cfg.seed = 111;
    cfg.threads = 0;
    const fs::path d1 = fs::temp_directory_path() / "hiergp_acc_det1";
    const fs::path d2 = fs::temp_directory_path() / "hiergp_acc_det2";
    fs::remove_all(d1);
    fs::remove_all(d2);
    write_benchmark_outputs(run_benchmark(cfg), d1);
    write_benchmark_outputs(run_benchmark(cfg), d2);
    bool same = true;
    for (const char* f : {"metrics.csv", "summary.json", "seed_manifest.csv", "config.json"})
      same = same && slurp(d1 / f) == slurp(d2 / f);
    pass = pass && same;
    detail << ", benchmark csv/json " << (same ? "identical" : "DIFFER");
    fs::remove_all(d1);
    fs::remove_all(d2);
  }

  // trajectory ensembles
  {
    RngHandle rng(112);
    const DynSystem sys = make_cubic2d();
    const TrajectoryData data =
        make_training_data(sys, Eigen::Vector2d(2.0, 0.0), 0.04, 150, 0.01, rng);
    GibbsConfig gc;
    gc.iterations = 300;
    gc.seed = 113;
    Hyperparameters hyper;
    const DynPosterior p1 = fit_dynamics(data, {4, 4}, hyper, gc, 2);
    const DynPosterior p2 = fit_dynamics(data, {4, 4}, hyper, gc, 2);
    const auto e1 = ensemble_forward(p1, 10, Eigen::Vector2d(2.0, 0.0), 0.04, 100);
    const auto e2 = ensemble_forward(p2, 10, Eigen::Vector2d(2.0, 0.0), 0.04, 100);
    const fs::path f1 = fs::temp_directory_path() / "hiergp_acc_ens1.csv";
    const fs::path f2 = fs::temp_directory_path() / "hiergp_acc_ens2.csv";
    write_ensemble_csv(e1, f1);
    write_ensemble_csv(e2, f2);
    const bool same = slurp(f1) == slurp(f2);
    pass = pass && same;
    detail << ", ensembles " << (same ? "identical" : "DIFFER");
    fs::remove(f1);
    fs::remove(f2);
  }

  report("criterion 8 (determinism)", pass, detail.str());
}

// ---------------------------------------------------------------------------
// criterion 9: diminishing adaptation

void criterion_9() {
  const auto t0 = Clock::now();
  const std::uint64_t windows[] = {200, 1200, 2200, 3200};
  double mean_counts[3] = {0, 0, 0};
  bool invariants_ok = true;

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngHandle data_rng(seed, 7);
    Eigen::VectorXd xs(40), ys(40);
    for (int i = 0; i < 40; ++i) {
      xs[i] = data_rng.uniform();
      ys[i] = 1.2 * std::sin(2.0 * std::numbers::pi * xs[i]) + sample_normal(0.0, 0.1, data_rng);
    }
    Dataset data;
    data.points = xs;
    data.responses = ys;
    GibbsConfig cfg;
    cfg.trunc = TruncationVector{{6}, 1};
    cfg.iterations = 3200;
    cfg.burn_in = 1600;
    cfg.seed = seed;
    cfg.adaptive = true;
    cfg.adapt.b_bar = 200;
    cfg.adapt.alpha0 = -1.0;
    cfg.adapt.alpha1 = -5e-4;
    cfg.adapt.k_max = 12;
    const PosteriorChain chain = run_chain(data, sinusoidal_basis(), cfg, Hyperparameters{});
    for (const auto& ev : chain.metadata.adapt_events) {
      for (int w = 0; w < 3; ++w)
        if (ev.iteration >= windows[w] && ev.iteration < windows[w + 1]) mean_counts[w] += 1.0;
      invariants_ok = invariants_ok && ev.new_limit >= 1 && ev.new_limit <= cfg.adapt.k_max;
    }
    try {
      for (const auto& st : chain.states) st.validate();
    } catch (const std::exception&) {
      invariants_ok = false;
    }
  }
  for (double& c : mean_counts) c /= 10.0;
  const bool decreasing = mean_counts[0] >= mean_counts[1] && mean_counts[1] >= mean_counts[2];
  const double secs = seconds_since(t0);
  const bool pass = decreasing && invariants_ok;
  std::ostringstream detail;
  detail << "mean events per window " << mean_counts[0] << " / " << mean_counts[1] << " / "
         << mean_counts[2] << ", invariants " << (invariants_ok ? "hold" : "VIOLATED") << " ("
         << secs << " s)";
  report("criterion 9 (diminishing adaptation)", pass, detail.str());
}

}  // namespace

int main() {
  std::cout << "acceptance suite" << std::endl;
  const auto t0 = Clock::now();
  criterion_1();
  criterion_2();
  criteria_3_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
            << " (total " << seconds_since(t0) << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
