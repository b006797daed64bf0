// Acceptance runner: one PASS/FAIL line per criterion, JSON reports on disk.
//
//   acceptance [--criterion N] [--report-dir DIR]
//
// Without --criterion every criterion runs in order.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sphere_area/cli.hpp"
#include "sphere_area/sphere_area.hpp"

namespace sa = sphere_area;

namespace {

struct Sizes {
  std::size_t paths = 10000;        // ergodic ensemble, reversal, mu coupling
  std::size_t realizations = 10000; // profile batches
  std::size_t fd_realizations = 1000;
  double long_time = 2000.0;
  std::size_t pi_draws = 100000;
};

std::string sci(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// 1. Analytic identities.

sa::ExperimentReport analytic_suite() {
  sa::ExperimentReport r;
  r.name = "analytic identities";

  // p_1 on [-30, 3.5 / alpha] by quadrature, upper tail by the termwise series.
  const double y_hi = sa::detail::kSeriesThreshold / sa::kAlpha;
  const double tail = sa::map_airy_upper_tail(sa::detail::kSeriesThreshold);
  const double p_body = sa::quad::integrate_value([](double y) { return sa::stable_density(1.0, y).p; }, -30.0,
                                                  y_hi, 1e-14, 1e-13);
  const double p_err = std::fabs(p_body + tail - 1.0);
  r.add_estimate("int p_1", p_body + tail, 0.0);
  r.diagnostics["log p_1(-30)"] = sa::stable_log_density_unit(-30.0).log_p;
  r.diagnostics["upper tail beyond 3.5/alpha"] = tail;
  r.add_verdict("int p_1 = 1", p_err < 1e-6, "|int p_1 - 1| < 1e-6, got " + sci(p_err));

  const double a_body = sa::quad::integrate_value([](double v) { return sa::map_airy_A(v); }, -30.0 * sa::kAlpha,
                                                  sa::detail::kSeriesThreshold, 1e-14, 1e-13);
  const double a_err = std::fabs(a_body + tail - 1.0);
  r.add_estimate("int A", a_body + tail, 0.0);
  r.add_verdict("int A = 1", a_err < 1e-6, "|int A - 1| < 1e-6, got " + sci(a_err));

  const auto f1 = sa::transform_check(1.0, 1.0);
  const double f_err = std::abs(f1.fourier_numeric - f1.fourier_target);
  r.add_estimate("Re Fourier p_1(1)", f1.fourier_numeric.real(), 0.0);
  r.add_estimate("Im Fourier p_1(1)", f1.fourier_numeric.imag(), 0.0);
  r.add_verdict("Fourier transform at u = 1", f_err < 1e-3, "|numeric - exp(-(1+i)/sqrt 3)| < 1e-3, got " + sci(f_err));

  for (double lambda : {1.0, 2.0}) {
    const auto l = sa::transform_check(1.0, lambda);
    const double rel = std::fabs(l.laplace_numeric - l.laplace_target) / l.laplace_target;
    r.add_estimate("Laplace p_1(" + sa::fmt(lambda) + ")", l.laplace_numeric, 0.0);
    r.add_verdict("Laplace transform at lambda = " + sa::fmt(lambda), rel < 1e-3,
                  "relative error < 1e-3, got " + sci(rel));
  }

  double stat = 0.0;
  for (int i = -8000; i <= 8000; ++i) {
    const double x = i * 1e-3;
    stat = std::max(stat, std::fabs(8.0 * sa::theta_prime(x) - sa::drift_b(x) * sa::theta(x)));
  }
  r.add_verdict("stationarity 8 theta' = b theta", stat < 1e-8, "max on [-8, 8] < 1e-8, got " + sci(stat));

  double h_rel = 0.0;
  for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    for (int i = -200; i <= 200; ++i) {
      const double x = i * 0.25;
      const double a = sa::drift_h_airy(t, x);
      if (std::fabs(a) >= 1e6) continue;
      h_rel = std::max(h_rel, std::fabs(sa::drift_h(t, x) - a) / std::fabs(a));
    }
  }
  r.add_verdict("h ratio form = Airy form", h_rel < 1e-9, "max relative difference < 1e-9, got " + sci(h_rel));

  double conj = 0.0;
  for (double t : {0.5, 1.0, 4.0}) {
    for (double z : {-3.0, 0.0, 2.0}) {
      const double c = std::cbrt(t);
      const double lhs = sa::drift_h(t, -std::pow(t, 2.0 / 3.0) * z);
      conj = std::max(conj, std::fabs(lhs - (-c * sa::drift_b(z) + 2.0 / 3.0 * c * z * z)));
    }
  }
  r.add_verdict("h/b conjugation", conj < 1e-10, "max |h - (-t^{1/3} b + 2/3 t^{1/3} z^2)| < 1e-10, got " + sci(conj));

  auto integrand = [](double x) {
    const double s = x * x;
    const double c = x * sa::airy::airy_ai(s) + sa::airy::airy_ai_prime(s);
    return x * c * c;
  };
  const double airy_int = sa::quad::integrate_value(integrand, -8.0, 0.0, 1e-15, 1e-13) +
                          sa::quad::integrate_value(integrand, 0.0, 8.0, 1e-15, 1e-13);
  const double stated = -0.126044938;
  r.add_estimate("int x (x Ai(x^2) + Ai'(x^2))^2", airy_int, 0.0);
  r.add_estimate("-Ai(0)^2", -sa::airy::kAiZero * sa::airy::kAiZero, 0.0);
  r.add_estimate("-1/12", -1.0 / 12.0, 0.0);
  r.diagnostics["airy integral minus -1/12"] = airy_int + 1.0 / 12.0;
  r.add_verdict("Airy integral = -0.126044938", std::fabs(airy_int - stated) < 1e-8,
                "|value + 0.126044938| < 1e-8, got value " + sci(airy_int));
  return r;
}

// ---------------------------------------------------------------------------
// 2. Positivity.

sa::ExperimentReport positivity_suite() {
  sa::ExperimentReport r;
  r.name = "positivity";
  double h_min = INFINITY;
  std::size_t h_points = 0;
  for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    for (int x = -50; x <= 50; ++x) {
      h_min = std::min(h_min, sa::drift_h(t, x));
      ++h_points;
    }
  }
  r.add_estimate("min h on grid", h_min, 0.0);
  r.add_verdict("h > 0", h_min > 0, std::to_string(h_points) + " grid points, min " + sci(h_min));

  // Strict positivity is read off the log-density: a finite logarithm is a
  // positive value even where the double itself would underflow.
  bool a_ok = true, p_ok = true;
  double a_log_min = INFINITY, p_log_min = INFINITY;
  std::size_t direct = 0;
  for (int i = -4000; i <= 4000; ++i) {
    const double x = i * 0.01;
    const double la = sa::map_airy_log(x);
    const double lp = sa::stable_log_density_unit(x).log_p;
    a_ok = a_ok && std::isfinite(la);
    p_ok = p_ok && std::isfinite(lp);
    a_log_min = std::min(a_log_min, la);
    p_log_min = std::min(p_log_min, lp);
    if (la > -700.0) {
      a_ok = a_ok && sa::map_airy_A(x) > 0;
      ++direct;
    }
    if (lp > -700.0) p_ok = p_ok && sa::stable_density(1.0, x).p > 0;
  }
  r.add_estimate("min log A on [-40, 40]", a_log_min, 0.0);
  r.add_estimate("min log p_1 on [-40, 40]", p_log_min, 0.0);
  r.diagnostics["points with A representable in double"] = direct;
  r.add_verdict("A > 0 on [-40, 40]", a_ok, "finite log A at 8001 points, direct value > 0 where representable");
  r.add_verdict("p_1 > 0 on [-40, 40]", p_ok, "finite log p_1 at 8001 points, direct value > 0 where representable");
  return r;
}

// ---------------------------------------------------------------------------
// 3-6. Monte Carlo suites.

std::vector<sa::ExperimentReport> ergodic_suite(const Sizes& s) {
  sa::ErgodicOptions opt;
  opt.n_paths = s.paths;
  opt.long_time = s.long_time;
  opt.pi_draws = s.pi_draws;
  return {sa::ergodic_experiment(sa::SimConfig{}, opt)};
}

std::vector<sa::ExperimentReport> reversal_coupling_suite(const Sizes& s) {
  const sa::SimConfig cfg;
  std::vector<sa::ExperimentReport> out;
  out.push_back(sa::with_dt_halving([&](const sa::SimConfig& c) { return sa::reversal_suite(5.0, s.paths, c); }, cfg));
  out.push_back(
      sa::with_dt_halving([&](const sa::SimConfig& c) { return sa::mu_coupling_experiment(s.paths, c); }, cfg));
  return out;
}

std::vector<sa::ExperimentReport> profile_law_suite(const Sizes& s) {
  const sa::SimConfig cfg;
  sa::MomentOptions m;
  for (int i = 1; i <= 20; ++i) m.fd_grid.push_back(0.1 * i);
  m.fd_realizations = s.fd_realizations;
  std::vector<sa::ExperimentReport> out;
  out.push_back(sa::with_dt_halving(
      [&](const sa::SimConfig& c) { return sa::moment_experiment({0.05, 0.5, 1.0, 2.0}, s.realizations, c, m); },
      cfg));
  out.push_back(sa::with_dt_halving(
      [&](const sa::SimConfig& c) { return sa::scale_invariance_experiment(2.0, 1.0, s.realizations, c); }, cfg));
  sa::clear_batch_cache();
  return out;
}

std::vector<sa::ExperimentReport> theorem_suite(const Sizes& s) {
  const sa::SimConfig cfg;
  std::vector<sa::ExperimentReport> out;
  out.push_back(sa::with_dt_halving(
      [&](const sa::SimConfig& c) { return sa::two_route_experiment(0.5, 0.5, s.realizations, c); }, cfg));
  out.push_back(sa::with_dt_halving(
      [&](const sa::SimConfig& c) { return sa::markov_kernel_experiment(0.5, 0.25, s.realizations, c); }, cfg));
  sa::clear_batch_cache();
  return out;
}

std::vector<sa::ExperimentReport> gamma_suite(const Sizes& s) {
  return {sa::gamma_experiment(s.paths, sa::SimConfig{})};
}

// ---------------------------------------------------------------------------
// 7. Determinism.

std::vector<sa::ExperimentReport> determinism_suite() {
  Sizes small;
  small.paths = 150;
  small.realizations = 120;
  small.fd_realizations = 10;
  small.long_time = 50.0;
  small.pi_draws = 5000;
  const std::vector<std::pair<std::string, std::function<std::vector<sa::ExperimentReport>()>>> suites{
      {"analytic", [] { return std::vector<sa::ExperimentReport>{analytic_suite()}; }},
      {"positivity", [] { return std::vector<sa::ExperimentReport>{positivity_suite()}; }},
      {"ergodic", [&] { return ergodic_suite(small); }},
      {"reversal/coupling", [&] { return reversal_coupling_suite(small); }},
      {"profile law", [&] { return profile_law_suite(small); }},
      {"theorem equivalence", [&] { return theorem_suite(small); }},
      {"gamma", [&] { return gamma_suite(small); }},
  };
  auto dump = [](const std::vector<sa::ExperimentReport>& reports) {
    std::string s;
    for (const auto& r : reports) s += r.to_json().dump(1) + "\n";
    return s;
  };
  const char* saved = std::getenv("SPHERE_PROFILE_THREADS");
  const std::string restore = saved ? saved : "";

  sa::ExperimentReport r;
  r.name = "determinism";
  r.config["workers"] = {1, 4};
  r.config["paths"] = small.paths;
  r.config["realizations"] = small.realizations;
  for (const auto& [label, fn] : suites) {
    std::vector<std::string> outputs;
    for (const char* workers : {"1", "4", "4"}) {
      setenv("SPHERE_PROFILE_THREADS", workers, 1);
      sa::clear_batch_cache();
      outputs.push_back(dump(fn()));
    }
    const bool same = outputs[0] == outputs[1] && outputs[1] == outputs[2];
    r.add_estimate(label + " report bytes", static_cast<double>(outputs[0].size()), 0.0);
    r.add_verdict(label + " byte-identical", same, "1 worker vs 4 workers (twice)");
  }
  if (saved) setenv("SPHERE_PROFILE_THREADS", restore.c_str(), 1); else unsetenv("SPHERE_PROFILE_THREADS");
  sa::clear_batch_cache();

  // The CLI writes the same bytes on repeated invocations.
  const std::vector<std::vector<std::string>> commands{
      {"simulate-z", "--w0", "0", "--T", "10", "--dt", "0.001", "--seed", "7"},
      {"build-profile", "--x-max", "2", "--points", "50", "--seed", "3"},
      {"density-table", "--t", "1"},
      {"experiment", "mu-coupling", "--n", "100", "--no-dt-halving"},
  };
  for (const auto& args : commands) {
    std::ostringstream a, b, ea, eb;
    sa::cli::run(args, a, ea);
    sa::cli::run(args, b, eb);
    r.add_verdict("cli " + args[0] + (args[0] == "experiment" ? " " + args[1] : "") + " byte-identical",
                  a.str() == b.str() && !a.str().empty(), "two invocations");
  }
  return {r};
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  std::string title;
  std::function<std::vector<sa::ExperimentReport>()> run;
};

// Scalar diagnostics, one level of nesting (per-step-size runs).
void print_scalars(const nlohmann::ordered_json& j, const std::string& prefix) {
  for (const auto& [key, value] : j.items()) {
    if (value.is_number() || value.is_boolean())
      std::cout << "     [" << prefix << key << "] " << value.dump() << "\n";
    else if (value.is_object() && prefix.empty())
      print_scalars(value, key + ": ");
  }
}

bool report_criterion(const Criterion& c, const std::filesystem::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  std::cout << "[criterion " << c.id << "] " << c.title << std::endl;
  std::vector<sa::ExperimentReport> reports;
  bool passed = true;
  try {
    reports = c.run();
  } catch (const std::exception& e) {
    std::cout << "  ERROR " << e.what() << "\n";
    passed = false;
  }
  nlohmann::ordered_json all = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    std::cout << "  -- " << r.name << "\n";
    for (const auto& e : r.estimates)
      std::cout << "     " << e.label << " = " << sci(e.value) << (e.std_error > 0 ? " +- " + sci(e.std_error) : "")
                << "\n";
    print_scalars(r.diagnostics, "");
    for (const auto& s : r.statistics)
      std::cout << "     " << s.label << ": " << s.kind << " " << sci(s.value) << ", p = " << sci(s.p_value) << "\n";
    for (const auto& v : r.verdicts)
      std::cout << "  " << (v.passed ? "PASS" : "FAIL") << "  " << v.criterion << "  (" << v.threshold << ")\n";
    passed = passed && r.passed();
    all.push_back(r.to_json());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    sa::cli::write_atomic((dir / ("criterion_" + std::to_string(c.id) + ".json")).string(), all.dump(1) + "\n");
  }
  std::cout << "criterion " << c.id << ": " << (passed ? "PASS" : "FAIL") << "  (" << std::fixed
            << std::setprecision(1) << secs << " s)" << std::defaultfloat << std::endl;
  return passed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int which = 0;
  std::string report_dir;
  app.add_option("--criterion", which, "Criterion to run (1-7); all when omitted")->check(CLI::Range(0, 7));
  app.add_option("--report-dir", report_dir, "Directory for JSON reports");
  CLI11_PARSE(app, argc, argv);

  const Sizes full;
  const std::vector<Criterion> criteria{
      {1, "analytic identity suite", [] { return std::vector<sa::ExperimentReport>{analytic_suite()}; }},
      {2, "positivity suite", [] { return std::vector<sa::ExperimentReport>{positivity_suite()}; }},
      {3, "ergodic / stationary suite", [&] { return ergodic_suite(full); }},
      {4, "reversal / coupling suite", [&] { return reversal_coupling_suite(full); }},
      {5, "profile-law suite", [&] { return profile_law_suite(full); }},
      {6, "theorem-equivalence suite", [&] { return theorem_suite(full); }},
      {7, "determinism", [] { return determinism_suite(); }},
  };
  bool ok = true;
  for (const auto& c : criteria) {
    if (which != 0 && c.id != which) continue;
    ok = report_criterion(c, report_dir) && ok;
  }
  return ok ? 0 : 1;
}
