#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polybasis/common.hpp"

namespace polybasis {

/// One grid point x seed of an experiment: string labels + numeric results.
struct CellResult {
  std::map<std::string, std::string> labels;
  std::map<std::string, double> values;
};

/// A named series (loss curve, plot-ready columns), written to curves/<name>.csv.
struct Curve {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json spec_echo;
  std::vector<CellResult> cells;
  std::vector<Curve> curves;
};

inline nlohmann::json environment_fingerprint() {
  nlohmann::json j;
#if defined(__clang__)
  j["compiler"] = "clang " + std::to_string(__clang_major__) + "." +
                  std::to_string(__clang_minor__);
#elif defined(__GNUC__)
  j["compiler"] = "gcc " + std::to_string(__GNUC__) + "." +
                  std::to_string(__GNUC_MINOR__);
#else
  j["compiler"] = "unknown";
#endif
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
               std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["pointer_bits"] = static_cast<int>(sizeof(void*) * 8);
#ifdef NDEBUG
  j["build"] = "release";
#else
  j["build"] = "debug";
#endif
  return j;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Writes <out_root>/<experiment>/<timestamp>/{report.csv, spec.json,
/// env.json, curves/*.csv} and returns the run directory. Existing run
/// directories are never touched; a collision gets a numeric suffix.
inline std::filesystem::path write_report(const ExperimentReport& report,
                                          const std::filesystem::path& out_root) {
  namespace fs = std::filesystem;
  const auto now = std::chrono::system_clock::now();
  const auto secs =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  fs::path dir = out_root / report.experiment / std::to_string(secs);
  for (int suffix = 1; fs::exists(dir); ++suffix)
    dir = out_root / report.experiment /
          (std::to_string(secs) + "-" + std::to_string(suffix));
  fs::create_directories(dir);

  // Stable column order: sorted label names, then sorted value names.
  std::vector<std::string> label_cols, value_cols;
  for (const auto& cell : report.cells) {
    for (const auto& [k, _] : cell.labels)
      if (std::find(label_cols.begin(), label_cols.end(), k) == label_cols.end())
        label_cols.push_back(k);
    for (const auto& [k, _] : cell.values)
      if (std::find(value_cols.begin(), value_cols.end(), k) == value_cols.end())
        value_cols.push_back(k);
  }
  std::sort(label_cols.begin(), label_cols.end());
  std::sort(value_cols.begin(), value_cols.end());

  {
    std::ofstream csv(dir / "report.csv");
    std::vector<std::string> all_cols = label_cols;
    all_cols.insert(all_cols.end(), value_cols.begin(), value_cols.end());
    for (std::size_t i = 0; i < all_cols.size(); ++i)
      csv << (i ? "," : "") << detail::csv_escape(all_cols[i]);
    csv << '\n';
    for (const auto& cell : report.cells) {
      bool first = true;
      for (const auto& c : label_cols) {
        const auto it = cell.labels.find(c);
        csv << (first ? "" : ",")
            << detail::csv_escape(it == cell.labels.end() ? "" : it->second);
        first = false;
      }
      for (const auto& c : value_cols) {
        const auto it = cell.values.find(c);
        csv << (first ? "" : ",")
            << (it == cell.values.end() ? "" : detail::format_double(it->second));
        first = false;
      }
      csv << '\n';
    }
  }

  {
    std::ofstream spec(dir / "spec.json");
    spec << report.spec_echo.dump(2) << '\n';
    std::ofstream env(dir / "env.json");
    env << environment_fingerprint().dump(2) << '\n';
  }

  if (!report.curves.empty()) {
    fs::create_directories(dir / "curves");
    for (const auto& curve : report.curves) {
      std::ofstream f(dir / "curves" / (curve.name + ".csv"));
      for (std::size_t i = 0; i < curve.columns.size(); ++i)
        f << (i ? "," : "") << detail::csv_escape(curve.columns[i]);
      f << '\n';
      for (const auto& row : curve.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
          f << (i ? "," : "") << detail::format_double(row[i]);
        f << '\n';
      }
    }
  }
  return dir;
}

/// Reads back a run directory written by write_report.
inline ExperimentReport read_report(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  ExperimentReport report;
  {
    std::ifstream spec(dir / "spec.json");
    if (!spec) throw std::runtime_error("missing spec.json in " + dir.string());
    spec >> report.spec_echo;
    report.experiment = report.spec_echo.value("experiment", "");
  }
  std::ifstream csv(dir / "report.csv");
  if (!csv) throw std::runtime_error("missing report.csv in " + dir.string());
  std::string line;
  std::getline(csv, line);
  const auto header = detail::csv_split(line);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto fields = detail::csv_split(line);
    CellResult cell;
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) {
      // Numeric fields parse fully as doubles; everything else is a label.
      try {
        std::size_t pos = 0;
        const double v = std::stod(fields[i], &pos);
        if (pos == fields[i].size()) {
          cell.values[header[i]] = v;
          continue;
        }
      } catch (...) {
      }
      cell.labels[header[i]] = fields[i];
    }
    report.cells.push_back(std::move(cell));
  }
  if (fs::exists(dir / "curves")) {
    for (const auto& entry : fs::directory_iterator(dir / "curves")) {
      Curve curve;
      curve.name = entry.path().stem().string();
      std::ifstream f(entry.path());
      std::getline(f, line);
      curve.columns = detail::csv_split(line);
      while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& v : detail::csv_split(line)) row.push_back(std::stod(v));
        curve.rows.push_back(std::move(row));
      }
      report.curves.push_back(std::move(curve));
    }
  }
  return report;
}

}  // namespace polybasis
