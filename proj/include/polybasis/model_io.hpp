#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "polybasis/projection.hpp"
#include "polybasis/serialize.hpp"

namespace polybasis {

inline constexpr int kModelFormatVersion = 1;

/// Self-describing text export of a FitModel (JSON; doubles round-trip exactly).
inline nlohmann::json model_to_json(const FitModel& model) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["dimension"] = model.degrees.dimension;
  j["exponents"] = nlohmann::json::array();
  for (const auto& e : model.degrees.exponents)
    j["exponents"].push_back({e[0], e[1]});
  j["alpha"] = std::vector<double>(model.alpha.data(),
                                   model.alpha.data() + model.alpha.size());
  j["mapping_mode"] = to_string(model.mode);
  j["basis_source"] = to_string(model.source);
  j["library_digest"] = model.library_digest;
  j["domain"] = nlohmann::json::array();
  for (const auto& [lo, hi] : model.domain) j["domain"].push_back({lo, hi});
  j["train_metrics"] = {{"mse", model.train_metrics.mse},
                        {"r_squared", model.train_metrics.r_squared},
                        {"relative_l2", model.train_metrics.relative_l2},
                        {"n_samples", model.train_metrics.n_samples}};
  j["condition_estimate"] = model.condition_estimate;
  j["ill_conditioned"] = model.ill_conditioned;
  j["rank_warning"] = model.rank_warning;
  return j;
}

inline FitModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("format_version"))
    throw malformed_file_error("model record has no format_version");
  if (j.at("format_version").get<int>() != kModelFormatVersion)
    throw version_mismatch_error(
        "model format version " + j.at("format_version").dump() +
        " is not supported (this build reads version " +
        std::to_string(kModelFormatVersion) + ")");
  FitModel m;
  m.degrees.dimension = j.at("dimension").get<int>();
  for (const auto& e : j.at("exponents"))
    m.degrees.exponents.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  const auto alpha = j.at("alpha").get<std::vector<double>>();
  m.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(),
                                              static_cast<long>(alpha.size()));
  m.mode = mapping_mode_from_string(j.at("mapping_mode").get<std::string>());
  m.source = basis_source_from_string(j.at("basis_source").get<std::string>());
  m.library_digest = j.at("library_digest").get<std::uint64_t>();
  for (const auto& d : j.at("domain"))
    m.domain.push_back({d.at(0).get<double>(), d.at(1).get<double>()});
  const auto& tm = j.at("train_metrics");
  m.train_metrics = {tm.at("mse").get<double>(), tm.at("r_squared").get<double>(),
                     tm.at("relative_l2").get<double>(),
                     tm.at("n_samples").get<long>()};
  m.condition_estimate = j.at("condition_estimate").get<double>();
  m.ill_conditioned = j.at("ill_conditioned").get<bool>();
  m.rank_warning = j.at("rank_warning").get<bool>();
  return m;
}

inline void save_model(const FitModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << model_to_json(model).dump(2) << '\n';
}

inline FitModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw malformed_file_error("model file is not valid JSON: " +
                               std::string(e.what()));
  }
  return model_from_json(j);
}

}  // namespace polybasis
