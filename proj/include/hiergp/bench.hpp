#pragma once

// Experiment orchestration: replicated emulation studies over the model zoo,
// with deterministic per-replication random streams and file outputs that
// reproduce bit-exactly under a fixed seed (timing lives in its own file).

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hiergp/baselines.hpp"
#include "hiergp/gibbs.hpp"
#include "hiergp/horseshoe.hpp"
#include "hiergp/predict.hpp"
#include "hiergp/serialize.hpp"
#include "hiergp/testfns.hpp"

namespace hiergp {

enum class ModelKind { hiergp, hiergp2, ols, lasso, matern, sindy };

inline std::string model_name(ModelKind m) {
  switch (m) {
    case ModelKind::hiergp: return "hiergp";
    case ModelKind::hiergp2: return "hiergp2";
    case ModelKind::ols: return "ols";
    case ModelKind::lasso: return "lasso";
    case ModelKind::matern: return "matern";
    case ModelKind::sindy: return "sindy";
  }
  return "?";
}

inline ModelKind model_from_name(const std::string& name) {
  if (name == "hiergp") return ModelKind::hiergp;
  if (name == "hiergp2") return ModelKind::hiergp2;
  if (name == "ols") return ModelKind::ols;
  if (name == "lasso") return ModelKind::lasso;
  if (name == "matern") return ModelKind::matern;
  if (name == "sindy") return ModelKind::sindy;
  throw invalid_parameter("unknown model: " + name);
}

struct ExperimentConfig {
  std::string function = "prior";  // prior | branin | chengsandu
  std::vector<ModelKind> models{ModelKind::hiergp, ModelKind::hiergp2, ModelKind::ols,
                                ModelKind::lasso, ModelKind::matern};
  int d = 2;
  std::vector<int> truncation{8, 8};  // per-dimension limit, sinusoidal start=1
  int n_train = 70;
  int n_test = 400;
  double level = 0.95;
  int replications = 50;
  std::uint64_t seed = 1;
  std::uint64_t iterations = 2000;
  double noise_var = 0.0;  // 0 = deterministic training responses
  int threads = 0;
  // centering policy; unset = center except for prior-simulated truths,
  // which are mean-zero and fully representable in the basis
  std::optional<bool> center;
  bool branin_as_printed = false;  // drop the square on the quadratic term
  Hyperparameters hyper;

  bool effective_center() const { return center.value_or(function != "prior"); }

  void validate() const {
    if (models.empty()) throw invalid_parameter("ExperimentConfig: empty model list");
    if (static_cast<int>(truncation.size()) != d)
      throw invalid_parameter("ExperimentConfig: truncation dims must match d");
    if (function != "prior" && function != "branin" && function != "chengsandu")
      throw invalid_parameter("ExperimentConfig: unknown function " + function);
    if (function != "prior" && d != 2)
      throw invalid_parameter("ExperimentConfig: built-in test functions are 2-d");
    if (n_train < 1 || n_test < 1 || replications < 1)
      throw invalid_parameter("ExperimentConfig: counts must be positive");
    if (!(level > 0.0 && level < 1.0))
      throw invalid_parameter("ExperimentConfig: level must be in (0,1)");
    for (ModelKind m : models)
      if (m == ModelKind::sindy)
        throw invalid_parameter("ExperimentConfig: sindy applies to the recover task");
    hyper.validate();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["function"] = function;
    std::vector<std::string> names;
    for (ModelKind m : models) names.push_back(model_name(m));
    j["models"] = names;
    j["d"] = d;
    j["truncation"] = truncation;
    j["n_train"] = n_train;
    j["n_test"] = n_test;
    j["level"] = level;
    j["replications"] = replications;
    j["seed"] = seed;
    j["iterations"] = iterations;
    j["noise_var"] = noise_var;
    j["center"] = effective_center();
    j["branin_as_printed"] = branin_as_printed;
    j["hyper"] = {{"alpha", hyper.alpha},     {"a_sigma", hyper.a_sigma},
                  {"b_sigma", hyper.b_sigma}, {"a_theta", hyper.a_theta},
                  {"b_theta", hyper.b_theta}, {"sigma_inf_sq", hyper.sigma_inf_sq},
                  {"tau", hyper.tau}};
    return j;
  }
};

struct MetricsRow {
  int replication = 0;
  std::string model;
  std::string status = "ok";
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double mae = std::numeric_limits<double>::quiet_NaN();
  double coverage = std::numeric_limits<double>::quiet_NaN();
  double width = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;  // reported separately; excluded from determinism
};

struct BenchmarkResult {
  ExperimentConfig config;
  std::vector<MetricsRow> rows;

  std::vector<double> metric(const std::string& model,
                             double MetricsRow::* field) const {
    std::vector<double> vals;
    for (const auto& r : rows)
      if (r.model == model && r.status == "ok" && std::isfinite(r.*field))
        vals.push_back(r.*field);
    return vals;
  }

  double median_metric(const std::string& model, double MetricsRow::* field) const {
    auto vals = metric(model, field);
    if (vals.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(vals.begin(), vals.end());
    return empirical_quantile_sorted(vals, 0.5);
  }

  double mean_metric(const std::string& model, double MetricsRow::* field) const {
    auto vals = metric(model, field);
    if (vals.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double v : vals) s += v;
    return s / static_cast<double>(vals.size());
  }
};

namespace detail {

// fixed stream roles per replication
inline constexpr std::uint64_t streams_per_rep = 16;
inline constexpr std::uint64_t stream_data = 0;

inline std::uint64_t rep_stream(int rep, std::uint64_t role) {
  return static_cast<std::uint64_t>(rep) * streams_per_rep + role;
}

inline Eigen::MatrixXd uniform_points(Eigen::Index n, Eigen::Index d, RngHandle& rng) {
  Eigen::MatrixXd pts(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = rng.uniform();
  return pts;
}

inline void run_tasks(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto hw = static_cast<int>(std::thread::hardware_concurrency());
  const int pool = std::max(1, threads > 0 ? threads : hw);
  if (pool == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> workers;
  const int spawn = std::min<int>(pool, static_cast<int>(count));
  for (int t = 0; t < spawn; ++t) workers.emplace_back(drain);
  for (auto& w : workers) w.join();
}

}  // namespace detail

// One emulation replication over all configured models.
inline std::vector<MetricsRow> run_replication(const ExperimentConfig& cfg, int rep) {
  const auto d = static_cast<Eigen::Index>(cfg.d);
  RngHandle data_rng(cfg.seed, detail::rep_stream(rep, detail::stream_data));

  TruncationVector trunc{cfg.truncation, 1};
  Hyperparameters sim_hyper = cfg.hyper;
  sim_hyper.sigma_inf_sq = 0.0;  // exact zeros when simulating the truth

  std::function<double(const Eigen::VectorXd&)> truth_fn;
  PriorFunction prior_fn;
  if (cfg.function == "prior") {
    prior_fn = simulate_from_prior(trunc, sim_hyper, data_rng);
    truth_fn = [&prior_fn](const Eigen::VectorXd& x) { return prior_fn(x); };
  } else if (cfg.function == "branin") {
    const bool printed = cfg.branin_as_printed;
    truth_fn = [printed](const Eigen::VectorXd& x) {
      return testfn_branin_unit({x[0], x[1]}, printed);
    };
  } else {
    truth_fn = [](const Eigen::VectorXd& x) { return testfn_cheng_sandu({x[0], x[1]}); };
  }

  Dataset train;
  train.points = detail::uniform_points(cfg.n_train, d, data_rng);
  train.responses.resize(cfg.n_train);
  for (Eigen::Index i = 0; i < train.responses.size(); ++i)
    train.responses[i] = truth_fn(train.points.row(i).transpose());
  train.deterministic = cfg.noise_var == 0.0;
  if (cfg.noise_var > 0.0) {
    const double sd = std::sqrt(cfg.noise_var);
    for (Eigen::Index i = 0; i < train.responses.size(); ++i)
      train.responses[i] += sample_normal(0.0, sd, data_rng);
  }

  Eigen::MatrixXd test_points = detail::uniform_points(cfg.n_test, d, data_rng);
  Eigen::VectorXd test_truth(cfg.n_test);
  for (Eigen::Index i = 0; i < test_truth.size(); ++i)
    test_truth[i] = truth_fn(test_points.row(i).transpose());

  const BasisFamily family = sinusoidal_basis();
  const Eigen::MatrixXd design = build_design_matrix(family, trunc, train.points);
  const Eigen::MatrixXd test_design = build_design_matrix(family, trunc, test_points);

  std::vector<MetricsRow> rows;
  std::uint64_t role = 1;
  for (ModelKind model : cfg.models) {
    MetricsRow row;
    row.replication = rep;
    row.model = model_name(model);
    const auto started = std::chrono::steady_clock::now();
    try {
      GibbsConfig gc;
      gc.iterations = cfg.iterations;
      gc.trunc = trunc;
      gc.seed = cfg.seed;
      gc.stream = detail::rep_stream(rep, role);
      gc.center_responses = cfg.effective_center();
      switch (model) {
        case ModelKind::hiergp: {
          const PosteriorChain chain = run_chain(train, family, gc, cfg.hyper);
          const PredictionResult pred = predict(chain, test_points, {cfg.level, false, false});
          row.rmse = rmse(pred.mean, test_truth);
          row.mae = mean_absolute_error(pred.mean, test_truth);
          row.coverage = empirical_coverage(pred.lower, pred.upper, test_truth);
          row.width = mean_interval_width(pred.lower, pred.upper);
          break;
        }
        case ModelKind::hiergp2: {
          const PosteriorChain chain = hs_run_chain(train, family, gc, cfg.hyper);
          const PredictionResult pred = predict(chain, test_points, {cfg.level, false, false});
          row.rmse = rmse(pred.mean, test_truth);
          row.mae = mean_absolute_error(pred.mean, test_truth);
          row.coverage = empirical_coverage(pred.lower, pred.upper, test_truth);
          row.width = mean_interval_width(pred.lower, pred.upper);
          break;
        }
        case ModelKind::ols: {
          const double center = cfg.effective_center() ? train.responses.mean() : 0.0;
          const Eigen::VectorXd coef =
              ols_fit(design, Eigen::VectorXd(train.responses.array() - center));
          const Eigen::VectorXd mean = (test_design * coef).array() + center;
          row.rmse = rmse(mean, test_truth);
          row.mae = mean_absolute_error(mean, test_truth);
          break;
        }
        case ModelKind::lasso: {
          const LassoFit fit = lasso_fit(design, train.responses, {}, 5,
                                         cfg.seed + detail::rep_stream(rep, role));
          const Eigen::VectorXd mean = fit.predict(test_design);
          row.rmse = rmse(mean, test_truth);
          row.mae = mean_absolute_error(mean, test_truth);
          break;
        }
        case ModelKind::matern: {
          const MaternGpFit fit = matern_gp_fit(train.points, train.responses);
          const GpPrediction pred = matern_gp_predict(fit, test_points);
          row.rmse = rmse(pred.mean, test_truth);
          row.mae = mean_absolute_error(pred.mean, test_truth);
          row.coverage = empirical_coverage(pred.lower(cfg.level), pred.upper(cfg.level), test_truth);
          row.width = mean_interval_width(pred.lower(cfg.level), pred.upper(cfg.level));
          break;
        }
        case ModelKind::sindy:
          throw invalid_parameter("sindy is not an emulation model");
      }
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            started)
                      .count();
    rows.push_back(std::move(row));
    ++role;
  }
  return rows;
}

inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  BenchmarkResult result;
  result.config = cfg;
  std::vector<std::vector<MetricsRow>> per_rep(static_cast<std::size_t>(cfg.replications));
  detail::run_tasks(per_rep.size(), cfg.threads,
                    [&](std::size_t rep) { per_rep[rep] = run_replication(cfg, static_cast<int>(rep)); });
  for (auto& rows : per_rep)
    for (auto& r : rows) result.rows.push_back(std::move(r));
  return result;
}

inline nlohmann::json benchmark_summary(const BenchmarkResult& result) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["config"] = result.config.to_json();
  nlohmann::json models = nlohmann::json::object();
  for (ModelKind m : result.config.models) {
    const std::string name = model_name(m);
    long ok = 0;
    for (const auto& r : result.rows)
      if (r.model == name && r.status == "ok") ++ok;
    models[name] = {{"n_ok", ok},
                    {"median_rmse", result.median_metric(name, &MetricsRow::rmse)},
                    {"mean_rmse", result.mean_metric(name, &MetricsRow::rmse)},
                    {"median_mae", result.median_metric(name, &MetricsRow::mae)},
                    {"mean_coverage", result.mean_metric(name, &MetricsRow::coverage)},
                    {"mean_width", result.mean_metric(name, &MetricsRow::width)}};
  }
  models["additive_gp"] = {{"status", "not_available"}};  // external method, not implemented
  j["models"] = models;
  return j;
}

// metrics.csv + summary.json + seed manifest are deterministic under the
// seed; wall times go to timing.csv which is exempt.
inline void write_benchmark_outputs(const BenchmarkResult& result,
                                    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "metrics.csv");
    os << "replication,model,status,rmse,mae,coverage,width\n";
    for (const auto& r : result.rows) {
      os << r.replication << "," << r.model << "," << (r.status == "ok" ? "ok" : "error") << ",";
      os << (std::isfinite(r.rmse) ? format_double(r.rmse) : "") << ",";
      os << (std::isfinite(r.mae) ? format_double(r.mae) : "") << ",";
      os << (std::isfinite(r.coverage) ? format_double(r.coverage) : "") << ",";
      os << (std::isfinite(r.width) ? format_double(r.width) : "") << "\n";
    }
  }
  {
    std::ofstream os(dir / "timing.csv");
    os << "replication,model,status,wall_ms\n";
    for (const auto& r : result.rows)
      os << r.replication << "," << r.model << "," << r.status << ","
         << format_double(r.wall_ms) << "\n";
  }
  {
    std::ofstream os(dir / "seed_manifest.csv");
    os << "replication,seed,data_stream,first_model_stream\n";
    for (int rep = 0; rep < result.config.replications; ++rep)
      os << rep << "," << result.config.seed << "," << detail::rep_stream(rep, 0) << ","
         << detail::rep_stream(rep, 1) << "\n";
  }
  {
    std::ofstream os(dir / "summary.json");
    os << benchmark_summary(result).dump(2) << "\n";
  }
  {
    std::ofstream os(dir / "config.json");
    os << result.config.to_json().dump(2) << "\n";
  }
}

}  // namespace hiergp
