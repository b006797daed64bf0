#pragma once

// Command-line front end. Exit codes: 0 success or experiment PASS,
// 2 experiment FAIL, 1 usage or runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "sphere_area/mc.hpp"
#include "sphere_area/profile.hpp"
#include "sphere_area/report.hpp"
#include "sphere_area/sde.hpp"
#include "sphere_area/special_fn.hpp"
#include "sphere_area/stationary.hpp"

namespace sphere_area::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFail = 2;

/// Writes via a temporary file in the target directory and renames it into place.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into " + path + ": " + ec.message());
  }
}

struct Options {
  std::string command;
  std::string experiment;
  std::uint64_t seed = 1;
  double dt = 1e-3;
  std::size_t n = 10000;
  std::string out;
  std::string format = "csv";
  bool no_dt_halving = false;
  // Tables.
  double t = 1.0;
  double xmin = -6.0;
  double xmax = 6.0;
  double step = 0.1;
  // simulate-z.
  double w0 = 0.0;
  double T = 10.0;
  std::size_t stride = 1;
  // build-profile and experiments.
  double x_max = 2.0;
  std::size_t points = 200;
  double tol = 1e-6;
  std::vector<double> xs;
  double lambda = 2.0;
  double x = 1.0;
  double eps = 0.5;
  double s = 0.25;
  double a = 5.0;
  double start_a = 0.0;
  double start_b = -5.0;
  double c = 30.0;
};

inline std::string provenance(const std::string& command, const nlohmann::ordered_json& cfg) {
  std::ostringstream h;
  h << "# sphere-area " << kVersion << " " << command << "\n";
  h << "# " << cfg.dump() << "\n";
  return h.str();
}

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void add(std::vector<double> row) { rows_.push_back(std::move(row)); }

  std::string render(const std::string& format, const std::string& command,
                     const nlohmann::ordered_json& cfg) const {
    if (format == "json") {
      nlohmann::ordered_json j;
      j["tool"] = "sphere-area";
      j["version"] = kVersion;
      j["command"] = command;
      j["config"] = cfg;
      j["columns"] = columns_;
      j["rows"] = rows_;
      return j.dump(1) + "\n";
    }
    std::ostringstream o;
    o << provenance(command, cfg);
    for (std::size_t i = 0; i < columns_.size(); ++i) o << (i ? "," : "") << columns_[i];
    o << "\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) o << (i ? "," : "") << format_double(r[i]);
      o << "\n";
    }
    return o.str();
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

inline std::vector<double> grid(double lo, double hi, double step) {
  if (!(step > 0)) throw DomainError("--step must be > 0");
  if (!(hi >= lo)) throw DomainError("--xmax must be >= --xmin");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

inline SimConfig sim_config(const Options& o) {
  SimConfig cfg;
  cfg.dt = o.dt;
  cfg.seed = o.seed;
  cfg.validate();
  return cfg;
}

inline std::string report_output(const ExperimentReport& r, const std::string& format) {
  if (format == "json") return r.to_json().dump(1) + "\n";
  if (format == "text") return r.to_text();
  std::ostringstream o;
  o << provenance("experiment " + r.name, r.config);
  o << "section,label,value,std_error_or_p\n";
  auto quoted = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) q += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (const auto& e : r.estimates)
    o << "estimate," << quoted(e.label) << ',' << format_double(e.value) << ',' << format_double(e.std_error) << "\n";
  for (const auto& s : r.statistics)
    o << s.kind << ',' << quoted(s.label) << ',' << format_double(s.value) << ',' << format_double(s.p_value) << "\n";
  for (const auto& v : r.verdicts)
    o << "verdict," << quoted(v.criterion + " [" + v.threshold + "]") << ',' << (v.passed ? 1 : 0) << ",\n";
  o << "overall,passed," << (r.passed() ? 1 : 0) << ",\n";
  return o.str();
}

inline ExperimentReport run_experiment(const Options& o) {
  const SimConfig cfg = sim_config(o);
  const bool halve = !o.no_dt_halving;
  ProfileBatchOptions batch;
  batch.tol = o.tol;
  const std::string& e = o.experiment;
  if (e == "moments") {
    const std::vector<double> xs = o.xs.empty() ? std::vector<double>{0.05, 0.5, 1.0, 2.0} : o.xs;
    MomentOptions m;
    m.batch = batch;
    return with_dt_halving([&](const SimConfig& c) { return moment_experiment(xs, o.n, c, m); }, cfg, halve);
  }
  if (e == "scale")
    return with_dt_halving(
        [&](const SimConfig& c) { return scale_invariance_experiment(o.lambda, o.x, o.n, c, batch); }, cfg, halve);
  if (e == "reversal")
    return with_dt_halving([&](const SimConfig& c) { return reversal_suite(o.a, o.n, c); }, cfg, halve);
  if (e == "two-route")
    return with_dt_halving([&](const SimConfig& c) { return two_route_experiment(o.eps, o.t, o.n, c, batch); },
                           cfg, halve);
  if (e == "markov-kernel")
    return with_dt_halving(
        [&](const SimConfig& c) { return markov_kernel_experiment(o.eps, o.s, o.n, c, batch); }, cfg, halve);
  if (e == "mu-coupling")
    return with_dt_halving(
        [&](const SimConfig& c) { return mu_coupling_experiment(o.n, c, o.start_a, o.start_b, o.c); }, cfg, halve);
  if (e == "gamma")
    return with_dt_halving([&](const SimConfig& c) { return gamma_experiment(o.n, c); }, cfg, halve);
  if (e == "ergodic") {
    ErgodicOptions eo;
    eo.n_paths = o.n;
    return with_dt_halving([&](const SimConfig& c) { return ergodic_experiment(c, eo); }, cfg, halve);
  }
  throw CLI::ValidationError("experiment", "unknown experiment " + e);
}

/// Runs one command; returns the exit code. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Sphere-area process of the Brownian plane: tables, simulations and experiments",
               "sphere-area"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output file (default: standard output)");
    sub->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"csv", "json", "text"}));
  };
  auto add_sim = [&o](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--dt", o.dt, "Time step")->check(CLI::PositiveNumber);
  };

  auto* density = app.add_subcommand("density-table", "p_t(x) and p_t'(x) on a grid");
  density->add_option("--t", o.t, "Time t > 0")->check(CLI::PositiveNumber);
  auto* drift = app.add_subcommand("drift-table", "h(t, x) and b(x) on a grid");
  drift->add_option("--t", o.t, "Time t > 0")->check(CLI::PositiveNumber);
  auto* theta_cmd = app.add_subcommand("theta-table", "theta(x) and theta'(x) on a grid");
  for (auto* sub : {density, drift, theta_cmd}) {
    sub->add_option("--xmin", o.xmin, "Grid start");
    sub->add_option("--xmax", o.xmax, "Grid end");
    sub->add_option("--step", o.step, "Grid step")->check(CLI::PositiveNumber);
    add_common(sub);
  }

  auto* simz = app.add_subcommand("simulate-z", "Euler path of dZ = 4 dB + b(Z) dt");
  simz->add_option("--w0", o.w0, "Initial value");
  simz->add_option("--T", o.T, "Horizon")->check(CLI::NonNegativeNumber);
  simz->add_option("--stride", o.stride, "Write every stride-th step")->check(CLI::PositiveNumber);
  add_sim(simz);
  add_common(simz);

  auto* prof = app.add_subcommand("build-profile", "One realization of (L, Ldot) on (0, x_max]");
  prof->add_option("--x-max", o.x_max, "Largest x")->check(CLI::PositiveNumber);
  prof->add_option("--points", o.points, "Number of x points")->check(CLI::PositiveNumber);
  prof->add_option("--tol", o.tol, "Coverage tolerance")->check(CLI::PositiveNumber);
  add_sim(prof);
  add_common(prof);

  auto* exp = app.add_subcommand("experiment", "Monte Carlo experiment with pass/fail verdicts");
  exp->add_option("name", o.experiment, "Experiment")
      ->required()
      ->check(CLI::IsMember(
          {"moments", "scale", "reversal", "two-route", "markov-kernel", "mu-coupling", "gamma", "ergodic"}));
  exp->add_option("--n", o.n, "Realizations or paths")->check(CLI::Range(std::size_t{25}, std::size_t{100000000}));
  exp->add_flag("--no-dt-halving", o.no_dt_halving, "Run only at --dt");
  exp->add_option("--tol", o.tol, "Coverage tolerance")->check(CLI::PositiveNumber);
  exp->add_option("--x", o.xs, "x values (moments)")->delimiter(',');
  exp->add_option("--lambda", o.lambda, "Scale factor (scale)")->check(CLI::PositiveNumber);
  exp->add_option("--at", o.x, "Base x (scale)")->check(CLI::PositiveNumber);
  exp->add_option("--eps", o.eps, "Start x (two-route, markov-kernel)")->check(CLI::PositiveNumber);
  exp->add_option("--t", o.t, "Duration (two-route)")->check(CLI::NonNegativeNumber);
  exp->add_option("--s", o.s, "Kernel time (markov-kernel)")->check(CLI::NonNegativeNumber);
  exp->add_option("--a", o.a, "Level a (reversal)")->check(CLI::PositiveNumber);
  exp->add_option("--start-a", o.start_a, "First start (mu-coupling)");
  exp->add_option("--start-b", o.start_b, "Second start (mu-coupling)");
  exp->add_option("--c", o.c, "mu sampler level c")->check(CLI::PositiveNumber);
  add_sim(exp);
  add_common(exp);
  bool format_given = false;

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_out, o_err;
    const int code = app.exit(e, o_out, o_err);
    out << o_out.str();
    err << o_err.str();
    return code == 0 ? kExitOk : kExitError;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--format")) format_given = true;
  }

  try {
    std::string content;
    int code = kExitOk;
    if (density->parsed() || drift->parsed() || theta_cmd->parsed()) {
      nlohmann::ordered_json cfg{{"xmin", o.xmin}, {"xmax", o.xmax}, {"step", o.step}};
      const auto xs = grid(o.xmin, o.xmax, o.step);
      if (density->parsed()) {
        cfg["t"] = o.t;
        Table table({"x", "p", "p_prime"});
        for (double x : xs) {
          const auto d = stable_density(o.t, x);
          table.add({x, d.p, d.p_prime});
        }
        content = table.render(o.format, "density-table", cfg);
      } else if (drift->parsed()) {
        cfg["t"] = o.t;
        Table table({"x", "h", "b"});
        for (double x : xs) table.add({x, drift_h(o.t, x), drift_b(x)});
        content = table.render(o.format, "drift-table", cfg);
      } else {
        Table table({"x", "theta", "theta_prime"});
        for (double x : xs) table.add({x, theta(x), theta_prime(x)});
        content = table.render(o.format, "theta-table", cfg);
      }
    } else if (simz->parsed()) {
      const SimConfig sc = sim_config(o);
      nlohmann::ordered_json cfg = config_json(sc);
      cfg["w0"] = o.w0;
      cfg["T"] = o.T;
      cfg["stride"] = o.stride;
      RandomStream rng(sc.seed, tags::kErgodic);
      const Path p = simulate_Z(o.w0, o.T, sc, rng);
      Table table({"t", "Z", "integral"});
      for (std::size_t k = 0; k < p.size(); k += o.stride) table.add({p.time(k), p.values[k], p.running_integral[k]});
      content = table.render(o.format, "simulate-z", cfg);
    } else if (prof->parsed()) {
      const SimConfig sc = sim_config(o);
      const WStarRealization r = build_wstar(o.x_max, o.tol, sc, RandomStream(sc.seed, tags::kProfile));
      std::vector<double> xs;
      for (std::size_t i = 1; i <= o.points; ++i)
        xs.push_back(o.x_max * static_cast<double>(i) / static_cast<double>(o.points));
      const ProfileCurve c = extract_profile(r, xs);
      const auto header = realization_header(r, sc);
      if (o.format == "json") {
        content = profile_json(c, header).dump(1) + "\n";
      } else {
        std::ostringstream s;
        write_profile_csv(s, c, header);
        content = s.str();
      }
    } else if (exp->parsed()) {
      if (!format_given) o.format = "json";
      const ExperimentReport r = run_experiment(o);
      content = report_output(r, o.format);
      code = r.passed() ? kExitOk : kExitFail;
      err << "experiment " << r.name << ": " << (r.passed() ? "PASS" : "FAIL") << "\n";
    }
    if (o.out.empty()) {
      out << content;
    } else {
      write_atomic(o.out, content);
    }
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace sphere_area::cli
