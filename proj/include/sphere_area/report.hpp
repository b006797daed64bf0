#pragma once

// Experiment reports: estimates with standard errors, test statistics and
// verdicts, with the full configuration echoed for reproduction.

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphere_area/sde.hpp"

namespace sphere_area {

inline constexpr const char* kVersion = "0.1.0";

struct Estimate {
  std::string label;
  double value;
  double std_error;
};

struct Statistic {
  std::string label;
  std::string kind;  // "ks", "chi2", "kolmogorov", ...
  double value;
  double p_value;
};

struct Verdict {
  std::string criterion;
  bool passed;
  std::string threshold;
};

struct ExperimentReport {
  std::string name;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<Estimate> estimates;
  std::vector<Statistic> statistics;
  std::vector<Verdict> verdicts;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
  double wall_time = 0.0;

  bool passed() const {
    for (const auto& v : verdicts) {
      if (!v.passed) return false;
    }
    return true;
  }

  void add_estimate(std::string label, double value, double std_error) {
    estimates.push_back({std::move(label), value, std_error});
  }
  void add_statistic(std::string label, std::string kind, double value, double p_value) {
    statistics.push_back({std::move(label), std::move(kind), value, p_value});
  }
  void add_verdict(std::string criterion, bool ok, std::string threshold) {
    verdicts.push_back({std::move(criterion), ok, std::move(threshold)});
  }

  /// Merges another report's content with a label suffix (used for dt sweeps).
  void absorb(const ExperimentReport& other, const std::string& suffix) {
    for (const auto& e : other.estimates) add_estimate(e.label + suffix, e.value, e.std_error);
    for (const auto& s : other.statistics)
      add_statistic(s.label + suffix, s.kind, s.value, s.p_value);
    for (const auto& v : other.verdicts) add_verdict(v.criterion + suffix, v.passed, v.threshold);
    if (!other.diagnostics.empty()) diagnostics["run" + suffix] = other.diagnostics;
  }

  /// wall_time is left out unless asked for: it is the one field that
  /// differs between otherwise identical runs.
  nlohmann::ordered_json to_json(bool include_wall_time = false) const {
    nlohmann::ordered_json j;
    j["name"] = name;
    j["version"] = kVersion;
    j["config"] = config;
    auto& est = j["estimates"] = nlohmann::ordered_json::array();
    for (const auto& e : estimates)
      est.push_back({{"label", e.label}, {"value", e.value}, {"std_error", e.std_error}});
    auto& st = j["statistics"] = nlohmann::ordered_json::array();
    for (const auto& s : statistics)
      st.push_back({{"label", s.label}, {"kind", s.kind}, {"value", s.value}, {"p_value", s.p_value}});
    auto& vd = j["verdicts"] = nlohmann::ordered_json::array();
    for (const auto& v : verdicts)
      vd.push_back({{"criterion", v.criterion}, {"passed", v.passed}, {"threshold", v.threshold}});
    j["diagnostics"] = diagnostics;
    j["passed"] = passed();
    if (include_wall_time) j["wall_time"] = wall_time;
    return j;
  }

  std::string to_text(bool include_wall_time = false) const {
    std::ostringstream out;
    out << "experiment " << name << "  (version " << kVersion << ")\n";
    out << "config " << config.dump() << "\n";
    std::size_t w = 10;
    for (const auto& e : estimates) w = std::max(w, e.label.size());
    for (const auto& s : statistics) w = std::max(w, s.label.size());
    for (const auto& v : verdicts) w = std::max(w, v.criterion.size());
    out << std::setprecision(10);
    if (!estimates.empty()) {
      out << "\n" << std::left << std::setw(static_cast<int>(w)) << "estimate" << "  "
          << std::setw(20) << "value" << "std_error\n";
      for (const auto& e : estimates)
        out << std::setw(static_cast<int>(w)) << e.label << "  " << std::setw(20) << e.value
            << e.std_error << "\n";
    }
    if (!statistics.empty()) {
      out << "\n" << std::setw(static_cast<int>(w)) << "statistic" << "  " << std::setw(8)
          << "kind" << std::setw(20) << "value" << "p_value\n";
      for (const auto& s : statistics)
        out << std::setw(static_cast<int>(w)) << s.label << "  " << std::setw(8) << s.kind
            << std::setw(20) << s.value << s.p_value << "\n";
    }
    if (!verdicts.empty()) {
      out << "\n" << std::setw(static_cast<int>(w)) << "verdict" << "  " << std::setw(6)
          << "result" << "threshold\n";
      for (const auto& v : verdicts)
        out << std::setw(static_cast<int>(w)) << v.criterion << "  " << std::setw(6)
            << (v.passed ? "PASS" : "FAIL") << v.threshold << "\n";
    }
    out << "\noverall " << (passed() ? "PASS" : "FAIL") << "\n";
    if (include_wall_time) out << "wall_time " << wall_time << " s\n";
    return out.str();
  }
};

inline nlohmann::ordered_json config_json(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["dt"] = cfg.dt;
  j["seed"] = cfg.seed;
  j["max_time"] = cfg.max_time;
  j["scheme"] = to_string(cfg.scheme);
  j["floor_L"] = cfg.floor_L;
  return j;
}

}  // namespace sphere_area
