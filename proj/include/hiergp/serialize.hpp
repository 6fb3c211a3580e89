#pragma once

// File formats: JSON-lines chain serialization (one state per line behind a
// metadata header record), dataset ingestion from CSV / JSON, and the CSV
// writers shared by the CLI and the benchmark harness.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiergp/dynamics.hpp"
#include "hiergp/model.hpp"
#include "hiergp/predict.hpp"

namespace hiergp {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

inline const char* family_name(BasisKind kind) {
  return kind == BasisKind::sinusoidal ? "sinusoidal" : "monomial";
}

}  // namespace detail

inline nlohmann::json metadata_to_json(const ChainMetadata& md) {
  nlohmann::json j;
  j["schema_version"] = md.schema_version;
  j["kind"] = md.kind == SamplerKind::hiergp ? "hiergp" : "hiergp2";
  j["seed"] = md.seed;
  j["stream"] = md.stream;
  j["family"] = detail::family_name(md.family.kind);
  j["normalization"] =
      md.family.normalization == BasisNormalization::plain ? "plain" : "orthonormal";
  j["limits"] = md.trunc.limits;
  j["start"] = md.trunc.start;
  j["hyper"] = {{"alpha", md.hyper.alpha},     {"a_sigma", md.hyper.a_sigma},
                {"b_sigma", md.hyper.b_sigma}, {"a_theta", md.hyper.a_theta},
                {"b_theta", md.hyper.b_theta}, {"sigma_inf_sq", md.hyper.sigma_inf_sq},
                {"tau", md.hyper.tau}};
  j["centering"] = md.centering;
  j["iterations"] = md.iterations;
  j["burn_in"] = md.burn_in;
  j["thinning"] = md.thinning;
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : md.adapt_events)
    events.push_back({{"iteration", e.iteration},
                      {"dim", e.dim},
                      {"old_limit", e.old_limit},
                      {"new_limit", e.new_limit},
                      {"reason", e.reason}});
  j["adapt_events"] = events;
  j["warnings"] = md.warnings;
  j["hs_acceptance"] = md.hs_acceptance;
  j["hs_proposal_log_sd"] = md.hs_proposal_log_sd;
  return j;
}

inline ChainMetadata metadata_from_json(const nlohmann::json& j) {
  ChainMetadata md;
  md.schema_version = j.at("schema_version").get<int>();
  md.kind = j.at("kind").get<std::string>() == "hiergp2" ? SamplerKind::hiergp2 : SamplerKind::hiergp;
  md.seed = j.at("seed").get<std::uint64_t>();
  md.stream = j.at("stream").get<std::uint64_t>();
  md.family.kind =
      j.at("family").get<std::string>() == "monomial" ? BasisKind::monomial : BasisKind::sinusoidal;
  md.family.normalization = j.at("normalization").get<std::string>() == "orthonormal"
                                ? BasisNormalization::orthonormal
                                : BasisNormalization::plain;
  md.trunc.limits = j.at("limits").get<std::vector<int>>();
  md.trunc.start = j.at("start").get<int>();
  const auto& h = j.at("hyper");
  md.hyper.alpha = h.at("alpha").get<double>();
  md.hyper.a_sigma = h.at("a_sigma").get<double>();
  md.hyper.b_sigma = h.at("b_sigma").get<double>();
  md.hyper.a_theta = h.at("a_theta").get<double>();
  md.hyper.b_theta = h.at("b_theta").get<double>();
  md.hyper.sigma_inf_sq = h.at("sigma_inf_sq").get<double>();
  md.hyper.tau = h.at("tau").get<double>();
  md.centering = j.at("centering").get<double>();
  md.iterations = j.at("iterations").get<std::uint64_t>();
  md.burn_in = j.at("burn_in").get<std::uint64_t>();
  md.thinning = j.at("thinning").get<std::uint64_t>();
  for (const auto& e : j.at("adapt_events")) {
    AdaptEvent ev;
    ev.iteration = e.at("iteration").get<std::uint64_t>();
    ev.dim = e.at("dim").get<int>();
    ev.old_limit = e.at("old_limit").get<int>();
    ev.new_limit = e.at("new_limit").get<int>();
    ev.reason = e.at("reason").get<std::string>();
    md.adapt_events.push_back(ev);
  }
  md.warnings = j.at("warnings").get<std::vector<std::string>>();
  md.hs_acceptance = j.at("hs_acceptance").get<double>();
  md.hs_proposal_log_sd = j.at("hs_proposal_log_sd").get<double>();
  return md;
}

inline nlohmann::json state_to_json(const ChainState& st) {
  nlohmann::json j;
  j["limits"] = st.trunc.limits;
  j["start"] = st.trunc.start;
  j["lambda"] = detail::to_json(st.lambda);
  j["sigma_sq"] = detail::to_json(st.sigma_sq);
  nlohmann::json nu = nlohmann::json::array(), w = nlohmann::json::array();
  for (const auto& v : st.nu) nu.push_back(detail::to_json(v));
  for (const auto& v : st.w) w.push_back(detail::to_json(v));
  j["nu"] = nu;
  j["w"] = w;
  nlohmann::json z = nlohmann::json::array();
  for (Eigen::Index i = 0; i < st.z.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index m = 0; m < st.z.cols(); ++m) row.push_back(st.z(i, m));
    z.push_back(row);
  }
  j["z"] = z;
  j["theta_sq"] = st.theta_sq;
  if (st.hs_local.size() > 0) j["hs_local"] = detail::to_json(st.hs_local);
  return j;
}

inline ChainState state_from_json(const nlohmann::json& j) {
  ChainState st;
  st.trunc.limits = j.at("limits").get<std::vector<int>>();
  st.trunc.start = j.at("start").get<int>();
  st.lambda = detail::vector_from_json(j.at("lambda"));
  st.sigma_sq = detail::vector_from_json(j.at("sigma_sq"));
  for (const auto& v : j.at("nu")) st.nu.push_back(detail::vector_from_json(v));
  for (const auto& v : j.at("w")) st.w.push_back(detail::vector_from_json(v));
  const auto& z = j.at("z");
  st.z.resize(static_cast<Eigen::Index>(z.size()), st.trunc.dims());
  for (std::size_t i = 0; i < z.size(); ++i)
    for (int m = 0; m < st.trunc.dims(); ++m)
      st.z(static_cast<Eigen::Index>(i), m) = z[i][static_cast<std::size_t>(m)].get<int>();
  st.theta_sq = j.at("theta_sq").get<double>();
  if (j.contains("hs_local")) st.hs_local = detail::vector_from_json(j.at("hs_local"));
  return st;
}

inline void write_chain(const PosteriorChain& chain, std::ostream& os) {
  os << metadata_to_json(chain.metadata).dump() << "\n";
  for (const auto& st : chain.states) os << state_to_json(st).dump() << "\n";
}

inline void write_chain(const PosteriorChain& chain, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw invalid_parameter("write_chain: cannot open " + path.string());
  write_chain(chain, os);
}

inline PosteriorChain read_chain(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw invalid_parameter("read_chain: empty stream");
  PosteriorChain chain;
  chain.metadata = metadata_from_json(nlohmann::json::parse(line));
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    chain.states.push_back(state_from_json(nlohmann::json::parse(line)));
  }
  return chain;
}

inline PosteriorChain read_chain(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw invalid_parameter("read_chain: cannot open " + path.string());
  return read_chain(is);
}

// ---------------------------------------------------------------------------
// Dataset ingestion. CSV contract: header row x1,..,xd,y in that order.

inline Dataset read_dataset_csv(const std::filesystem::path& path, bool deterministic = false) {
  std::ifstream is(path);
  if (!is) throw invalid_parameter("read_dataset_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw invalid_parameter("read_dataset_csv: missing header");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "y")
    throw invalid_parameter("read_dataset_csv: expected columns x1..xd,y");
  const auto d = static_cast<Eigen::Index>(header.size() - 1);

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<Eigen::Index>(row.size()) != d + 1)
      throw invalid_parameter("read_dataset_csv: ragged row");
    rows.push_back(std::move(row));
  }
  Dataset data;
  data.deterministic = deterministic;
  data.points.resize(static_cast<Eigen::Index>(rows.size()), d);
  data.responses.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j)
      data.points(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    data.responses[static_cast<Eigen::Index>(i)] = rows[i].back();
  }
  return data;
}

inline Dataset read_dataset_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw invalid_parameter("read_dataset_json: cannot open " + path.string());
  nlohmann::json j;
  is >> j;
  const auto& pts = j.at("points");
  Dataset data;
  data.deterministic = j.value("deterministic", false);
  const auto n = static_cast<Eigen::Index>(pts.size());
  if (n == 0) throw invalid_parameter("read_dataset_json: empty points");
  const auto d = static_cast<Eigen::Index>(pts[0].size());
  data.points.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k)
      data.points(i, k) = pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  data.responses = detail::vector_from_json(j.at("responses"));
  data.validate(false);
  return data;
}

inline void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw invalid_parameter("write_dataset_csv: cannot open " + path.string());
  for (Eigen::Index j = 0; j < data.d(); ++j) os << "x" << (j + 1) << ",";
  os << "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) os << format_double(data.points(i, j)) << ",";
    os << format_double(data.responses[i]) << "\n";
  }
}

// prediction table: x columns, mean, lower, upper and optionally the truth
inline void write_prediction_csv(const Eigen::MatrixXd& points, const PredictionResult& pred,
                                 const std::filesystem::path& path,
                                 const Eigen::VectorXd* truth = nullptr) {
  std::ofstream os(path);
  if (!os) throw invalid_parameter("write_prediction_csv: cannot open " + path.string());
  for (Eigen::Index j = 0; j < points.cols(); ++j) os << "x" << (j + 1) << ",";
  os << "mean,lower,upper";
  if (truth) os << ",truth";
  os << "\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) os << format_double(points(i, j)) << ",";
    os << format_double(pred.mean[i]) << "," << format_double(pred.lower[i]) << ","
       << format_double(pred.upper[i]);
    if (truth) os << "," << format_double((*truth)[i]);
    os << "\n";
  }
}

inline void write_trajectory_csv(const TrajectoryData& traj, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw invalid_parameter("write_trajectory_csv: cannot open " + path.string());
  os << "t";
  for (Eigen::Index j = 0; j < traj.states.cols(); ++j) os << ",x" << (j + 1);
  os << "\n";
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
    os << format_double(traj.times[i]);
    for (Eigen::Index j = 0; j < traj.states.cols(); ++j)
      os << "," << format_double(traj.states(i, j));
    os << "\n";
  }
}

// long format: t, x1..xq, sample_id (blown-up members marked in a column)
inline void write_ensemble_csv(const std::vector<EnsembleMember>& ensemble,
                               const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw invalid_parameter("write_ensemble_csv: cannot open " + path.string());
  if (ensemble.empty()) throw invalid_parameter("write_ensemble_csv: empty ensemble");
  os << "t";
  for (Eigen::Index j = 0; j < ensemble.front().trajectory.states.cols(); ++j)
    os << ",x" << (j + 1);
  os << ",sample_id,truncated\n";
  for (std::size_t s = 0; s < ensemble.size(); ++s) {
    const auto& traj = ensemble[s].trajectory;
    for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
      os << format_double(traj.times[i]);
      for (Eigen::Index j = 0; j < traj.states.cols(); ++j)
        os << "," << format_double(traj.states(i, j));
      os << "," << s << "," << (traj.truncated ? 1 : 0) << "\n";
    }
  }
}

// coefficient posterior summary: term descriptor -> sample summaries
inline nlohmann::json coef_posterior_json(const DynPosterior& post) {
  nlohmann::json out;
  out["library"] = {{"family", "monomial"},
                    {"limits", post.trunc.limits},
                    {"start", post.trunc.start}};
  const CoefMatrix med = post.median();
  const CoefMatrix mean = post.mean();
  nlohmann::json coords = nlohmann::json::array();
  for (std::size_t m = 0; m < post.chains.size(); ++m) {
    const Eigen::VectorXd freq = post.slab_frequency(m);
    nlohmann::json terms = nlohmann::json::array();
    std::vector<double> buf(post.retained());
    for (std::size_t j = 0; j < post.indices.size(); ++j) {
      for (std::size_t b = 0; b < post.retained(); ++b)
        buf[b] = post.chains[m].states[b].lambda[static_cast<Eigen::Index>(j)] /
                 post.column_scale[static_cast<Eigen::Index>(j)];
      std::sort(buf.begin(), buf.end());
      terms.push_back({{"k", post.indices[j]},
                       {"label", index_label(post.indices[j])},
                       {"median", med.xi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m))},
                       {"mean", mean.xi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m))},
                       {"q025", empirical_quantile_sorted(buf, 0.025)},
                       {"q975", empirical_quantile_sorted(buf, 0.975)},
                       {"slab_frequency", freq[static_cast<Eigen::Index>(j)]},
                       {"selected", freq[static_cast<Eigen::Index>(j)] > 0.5}});
    }
    coords.push_back({{"coordinate", m}, {"terms", terms}});
  }
  out["coordinates"] = coords;
  return out;
}

}  // namespace hiergp
