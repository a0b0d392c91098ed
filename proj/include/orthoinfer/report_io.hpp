#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "orthoinfer/dataset.hpp"
#include "orthoinfer/errors.hpp"
#include "orthoinfer/inference.hpp"
#include "orthoinfer/model_sets.hpp"
#include "orthoinfer/simlab.hpp"
#include "orthoinfer/version.hpp"

namespace orthoinfer {

// FNV-1a over bytes; cheap content fingerprint for run manifests.
inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// All output files land via temp-file + rename so readers never observe a
// partial write.
inline void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

struct ManifestInput {
  std::string path;
  std::string digest;  // fnv1a64 of the file bytes
};

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<ManifestInput> inputs;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

inline nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& in : m.inputs) inputs.push_back({{"path", in.path}, {"digest", in.digest}});
  return {{"command", m.command}, {"config", m.config},     {"seeds", m.seeds},
          {"inputs", inputs},     {"outputs", m.outputs},   {"version", kVersion},
          {"wall_seconds", m.wall_seconds}};
}

// ---- Inference report -------------------------------------------------------

inline std::string inference_report_csv(const InferenceReport& report,
                                        const std::string& manifest_ref) {
  std::ostringstream out;
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << '\n';
  out << "index,estimate,lower,upper,std_err,sum_theta_sq,e_n\n";
  for (const auto& c : report.coefficients) {
    out << c.index << ',' << detail::format_double(c.psi_hat) << ','
        << detail::format_double(c.ci_lower) << ',' << detail::format_double(c.ci_upper) << ','
        << detail::format_double(c.std_err) << ',' << detail::format_double(c.sum_theta_sq) << ',';
    if (c.berry_esseen) out << detail::format_double(*c.berry_esseen);
    out << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const InferenceReport& report, const std::string& manifest_ref) {
  nlohmann::json coefs = nlohmann::json::array();
  for (const auto& c : report.coefficients) {
    nlohmann::json jc = {{"index", c.index},         {"id", c.id},
                         {"estimate", c.psi_hat},    {"lower", c.ci_lower},
                         {"upper", c.ci_upper},      {"std_err", c.std_err},
                         {"sum_theta_sq", c.sum_theta_sq}};
    if (c.berry_esseen) jc["e_n"] = *c.berry_esseen;
    if (c.g_n) jc["g_n"] = *c.g_n;
    coefs.push_back(std::move(jc));
  }
  nlohmann::json j = {{"alpha", report.alpha},
                      {"variance",
                       {{"value", report.variance.value},
                        {"method", report.variance.method},
                        {"df", report.variance.df}}},
                      {"coefficients", coefs}};
  if (!manifest_ref.empty()) j["manifest"] = manifest_ref;
  return j;
}

// ---- Simulation reports -----------------------------------------------------

inline nlohmann::json to_json(const SimReport& report, const std::string& manifest_ref) {
  nlohmann::json coefs = nlohmann::json::array();
  for (const auto& c : report.coefficients)
    coefs.push_back({{"index", c.index},
                     {"coverage", c.coverage},
                     {"mean_length", c.mean_length},
                     {"abs_bias", c.abs_bias},
                     {"mean_estimate", c.mean_estimate},
                     {"sum_theta_sq", c.sum_theta_sq},
                     {"v", c.v}});
  nlohmann::json j = {{"config", to_json(report.config)},
                      {"seed", report.seed},
                      {"mean_vn", report.mean_vn},
                      {"aggregates",
                       {{"modal_coverage", report.aggregates.modal_coverage},
                        {"median_coverage", report.aggregates.median_coverage},
                        {"median_length", report.aggregates.median_length},
                        {"median_theta_sq", report.aggregates.median_theta_sq},
                        {"p95_theta_sq", report.aggregates.p95_theta_sq}}},
                      {"coefficients", coefs}};
  if (!manifest_ref.empty()) j["manifest"] = manifest_ref;
  return j;
}

// One row per simulation cell, in the shape of the coverage summary table.
inline std::string table1_csv(const std::vector<SimReport>& reports,
                              const std::string& manifest_ref) {
  std::ostringstream out;
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << '\n';
  out << "rho,n,p,modal_coverage,median_coverage,median_length,median_theta_sq,p95_theta_sq\n";
  for (const auto& r : reports) {
    out << detail::format_double(r.config.rho) << ',' << r.config.n << ',' << r.config.p << ','
        << detail::format_double(r.aggregates.modal_coverage) << ','
        << detail::format_double(r.aggregates.median_coverage) << ','
        << detail::format_double(r.aggregates.median_length) << ','
        << detail::format_double(r.aggregates.median_theta_sq) << ','
        << detail::format_double(r.aggregates.p95_theta_sq) << '\n';
  }
  return out.str();
}

inline std::string effects_csv(const EffectsTable& table, const std::string& manifest_ref) {
  std::ostringstream out;
  if (!manifest_ref.empty()) out << "# manifest: " << manifest_ref << '\n';
  out << "factor,modal_odds_ratio,median_odds_ratio,length_effect\n";
  for (const auto& e : table.effects)
    out << e.factor << ',' << detail::format_double(e.modal_odds_ratio) << ','
        << detail::format_double(e.median_odds_ratio) << ','
        << detail::format_double(e.length_effect) << '\n';
  return out.str();
}

inline nlohmann::json to_json(const EffectsTable& table, const std::string& manifest_ref) {
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : table.effects)
    effects.push_back({{"factor", e.factor},
                       {"modal_odds_ratio", e.modal_odds_ratio},
                       {"median_odds_ratio", e.median_odds_ratio},
                       {"length_effect", e.length_effect}});
  nlohmann::json j = {{"effects", effects},
                      {"modal_intercept", table.modal_intercept},
                      {"median_intercept", table.median_intercept},
                      {"length_intercept", table.length_intercept}};
  if (!manifest_ref.empty()) j["manifest"] = manifest_ref;
  return j;
}

}  // namespace orthoinfer
