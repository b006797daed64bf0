#pragma once

// Monte Carlo experiments: moments and cubic scaling of L, scale invariance,
// the time-change construction against the (L, Ldot) SDE, the Markov kernel
// through eta_s, mu coupling, gamma, and ergodic averages.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sphere_area/parallel.hpp"
#include "sphere_area/profile.hpp"
#include "sphere_area/report.hpp"
#include "sphere_area/sde.hpp"
#include "sphere_area/stationary.hpp"
#include "sphere_area/stats.hpp"

namespace sphere_area {

inline constexpr double kMeanConstant = 8.0 / 21.0;

struct ProfileBatchOptions {
  double tol = 1e-6;
  WStarOptions wstar{};
  unsigned workers = 0;
  /// Reuse a batch already built in this process with identical inputs.
  bool reuse = true;
};

/// n independent profiles sampled at xs; column-major by x.
struct ProfileBatch {
  std::vector<double> xs;
  std::vector<std::vector<double>> L;     // L[j][i]: x index j, realization i
  std::vector<std::vector<double>> Ldot;
  std::vector<double> anchor_B;

  std::size_t index_of(double x) const {
    for (std::size_t j = 0; j < xs.size(); ++j)
      if (xs[j] == x) return j;
    throw DomainError("ProfileBatch: x not sampled");
  }
  const std::vector<double>& L_at(double x) const { return L[index_of(x)]; }
  const std::vector<double>& Ldot_at(double x) const { return Ldot[index_of(x)]; }
};

namespace detail {

inline std::string batch_key(const std::vector<double>& xs, std::size_t n, const SimConfig& cfg,
                             std::uint64_t tag, const ProfileBatchOptions& opt) {
  nlohmann::ordered_json j;
  j["xs"] = xs;
  j["n"] = n;
  j["cfg"] = config_json(cfg);
  j["tag"] = tag;
  j["tol"] = opt.tol;
  j["B"] = opt.wstar.initial_B;
  j["esc"] = opt.wstar.max_escalations;
  j["safety"] = opt.wstar.tail_safety;
  j["window"] = opt.wstar.window;
  j["min_fwd"] = opt.wstar.min_forward_time;
  j["mu"] = {opt.wstar.mu.c, opt.wstar.mu.start};
  return j.dump();
}

struct BatchCache {
  std::mutex mutex;
  std::map<std::string, std::shared_ptr<const ProfileBatch>> entries;
  static BatchCache& instance() {
    static BatchCache c;
    return c;
  }
};

}  // namespace detail

/// Drops every batch kept for reuse in this process.
inline void clear_batch_cache() {
  auto& cache = detail::BatchCache::instance();
  std::lock_guard<std::mutex> lock(cache.mutex);
  cache.entries.clear();
}

/// Realization i uses substream (tags::kProfile, i) of root (seed, batch_tag).
inline ProfileBatch build_profile_batch(const std::vector<double>& xs, std::size_t n,
                                        const SimConfig& cfg, std::uint64_t batch_tag,
                                        const ProfileBatchOptions& opt = {}) {
  cfg.validate();
  const std::string key = detail::batch_key(xs, n, cfg, batch_tag, opt);
  if (opt.reuse) {
    auto& cache = detail::BatchCache::instance();
    std::lock_guard<std::mutex> lock(cache.mutex);
    const auto it = cache.entries.find(key);
    if (it != cache.entries.end()) return *it->second;
  }
  if (xs.empty()) throw DomainError("build_profile_batch: empty x list");
  for (double x : xs)
    if (!(x > 0)) throw DomainError("build_profile_batch: x must be > 0");
  const double x_max = *std::max_element(xs.begin(), xs.end());
  const RandomStream root(cfg.seed, batch_tag);
  ProfileBatch b;
  b.xs = xs;
  b.L.assign(xs.size(), std::vector<double>(n));
  b.Ldot.assign(xs.size(), std::vector<double>(n));
  b.anchor_B.resize(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const WStarRealization r = build_wstar(x_max, opt.tol, cfg, root.child(tags::kProfile, i), opt.wstar);
        const ProfileCurve c = extract_profile(r, xs);
        for (std::size_t j = 0; j < xs.size(); ++j) {
          b.L[j][i] = c.L[j];
          b.Ldot[j][i] = c.Ldot[j];
        }
        b.anchor_B[i] = r.anchor_B;
      },
      opt.workers);
  if (opt.reuse) {
    auto& cache = detail::BatchCache::instance();
    std::lock_guard<std::mutex> lock(cache.mutex);
    cache.entries.emplace(key, std::make_shared<const ProfileBatch>(b));
  }
  return b;
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

/// Runs `fn` at cfg.dt and at cfg.dt / 2 and merges the reports. A criterion
/// passes only if it passes at both step sizes (no verdict flip).
inline ExperimentReport with_dt_halving(const std::function<ExperimentReport(const SimConfig&)>& fn,
                                        const SimConfig& cfg, bool enabled = true) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport full = fn(cfg);
  if (!enabled) return full;
  SimConfig half = cfg;
  half.dt = cfg.dt / 2;
  ExperimentReport second = fn(half);
  ExperimentReport out;
  out.name = full.name;
  out.config = full.config;
  out.config["dt_halving"] = true;
  out.absorb(full, " @dt");
  out.absorb(second, " @dt/2");
  for (std::size_t i = 0; i < full.verdicts.size() && i < second.verdicts.size(); ++i) {
    out.add_verdict(full.verdicts[i].criterion + " no flip",
                    full.verdicts[i].passed == second.verdicts[i].passed,
                    "same verdict at dt and dt/2");
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------

struct MomentOptions {
  ProfileBatchOptions batch{};
  /// x values at which the finite-difference check of Ldot is run (empty: skip).
  std::vector<double> fd_grid{};
  double fd_relative_step = 1e-3;
  double fd_threshold = 1e-2;
  /// Second, much smaller step reported as a diagnostic only.
  double fd_fine_step = 1e-7;
  std::size_t fd_realizations = 0;  // 0: all
};

struct FiniteDifferenceSummary {
  std::size_t points = 0;
  std::size_t failures = 0;
  double max_relative_error = 0.0;
  double median_relative_error = 0.0;
};

/// Central differences of L against Ldot on the interior grid points, one
/// summary per relative step; each realization is built once.
inline std::vector<FiniteDifferenceSummary> finite_difference_check(
    const std::vector<double>& grid, std::size_t n, const SimConfig& cfg, std::uint64_t batch_tag,
    const std::vector<double>& rel_steps, double threshold, const ProfileBatchOptions& opt) {
  if (grid.size() < 3 || rel_steps.empty()) throw DomainError("finite_difference_check: need >= 3 points");
  const double widest = *std::max_element(rel_steps.begin(), rel_steps.end());
  const double x_max = *std::max_element(grid.begin(), grid.end()) * (1.0 + 2.0 * widest);
  const RandomStream root(cfg.seed, batch_tag);
  // errors[i][s]: realization i, step s, interior points in order
  std::vector<std::vector<std::vector<double>>> errors(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        const WStarRealization r = build_wstar(x_max, opt.tol, cfg, root.child(tags::kProfile, i), opt.wstar);
        errors[i].resize(rel_steps.size());
        for (std::size_t s = 0; s < rel_steps.size(); ++s) {
          for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
            const double x = grid[j];
            const double h = rel_steps[s] * x;
            const ProfileCurve c = extract_profile(r, {x - h, x, x + h});
            const double fd = (c.L[2] - c.L[0]) / (2.0 * h);
            errors[i][s].push_back(std::fabs(fd - c.Ldot[1]) / std::fabs(c.Ldot[1]));
          }
        }
      },
      opt.workers);
  std::vector<FiniteDifferenceSummary> out(rel_steps.size());
  for (std::size_t s = 0; s < rel_steps.size(); ++s) {
    std::vector<double> all;
    for (const auto& e : errors) {
      for (double v : e[s]) {
        all.push_back(v);
        out[s].failures += !(v < threshold);
        out[s].max_relative_error = std::max(out[s].max_relative_error, v);
      }
    }
    out[s].points = all.size();
    if (!all.empty()) out[s].median_relative_error = stats::median(all);
  }
  return out;
}

/// Mean of L at each x against (8/21) x^3 and the cubic ratio mean(2)/mean(1).
inline ExperimentReport moment_experiment(const std::vector<double>& x_list, std::size_t n_real,
                                          const SimConfig& cfg, const MomentOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const ProfileBatch b = build_profile_batch(x_list, n_real, cfg, tags::kBatch + 1, opt.batch);
  ExperimentReport r;
  r.name = "moments";
  r.config = config_json(cfg);
  r.config["x"] = x_list;
  r.config["n_real"] = n_real;
  r.config["tol"] = opt.batch.tol;
  bool all_positive = true;
  for (std::size_t j = 0; j < x_list.size(); ++j) {
    const double x = x_list[j];
    const auto m = stats::mean_and_error(b.L[j]);
    r.add_estimate("mean L(" + fmt(x) + ")", m.mean, m.std_error);
    r.add_estimate("mean L(" + fmt(x) + ")/x^3", m.mean / (x * x * x), m.std_error / (x * x * x));
    const auto md = stats::mean_and_error(b.Ldot[j]);
    r.add_estimate("mean Ldot(" + fmt(x) + ")", md.mean, md.std_error);
    all_positive = all_positive && m.mean > 0;
    for (double v : b.L[j]) all_positive = all_positive && v > 0;
  }
  r.add_verdict("L > 0", all_positive, "every sampled L and mean(L) > 0");
  const auto has = [&](double x) { return std::find(x_list.begin(), x_list.end(), x) != x_list.end(); };
  if (has(1.0)) {
    const auto m = stats::mean_and_error(b.L_at(1.0));
    r.add_verdict("mean L(1) = 8/21", std::fabs(m.mean - kMeanConstant) <= 3.0 * m.std_error,
                  "|mean - 8/21| <= 3 stderr");
  }
  if (has(1.0) && has(2.0)) {
    const auto ratio = stats::ratio_of_means(b.L_at(2.0), b.L_at(1.0));
    r.add_estimate("mean L(2)/mean L(1)", ratio.mean, ratio.std_error);
    r.add_verdict("cubic ratio = 8", std::fabs(ratio.mean - 8.0) <= 3.0 * ratio.std_error,
                  "|ratio - 8| <= 3 stderr (delta method)");
  }
  if (has(0.05) && has(0.5)) {
    const double m1 = stats::median(b.L_at(0.05));
    const double m2 = stats::median(b.L_at(0.5));
    r.add_estimate("median L(0.05)", m1, 0.0);
    r.add_estimate("median L(0.5)", m2, 0.0);
    r.add_verdict("median L(0.05) < median L(0.5)", m1 < m2, "strict inequality");
  }
  if (opt.fd_grid.size() >= 3) {
    const std::size_t n_fd = opt.fd_realizations ? std::min(opt.fd_realizations, n_real) : n_real;
    const auto fd = finite_difference_check(opt.fd_grid, n_fd, cfg, tags::kBatch + 1,
                                            {opt.fd_relative_step, opt.fd_fine_step}, opt.fd_threshold,
                                            opt.batch);
    r.diagnostics["fd_points"] = fd[0].points;
    r.diagnostics["fd_failures"] = fd[0].failures;
    r.diagnostics["fd_max_relative_error"] = fd[0].max_relative_error;
    r.diagnostics["fd_median_relative_error"] = fd[0].median_relative_error;
    r.diagnostics["fd_fine_step"] = opt.fd_fine_step;
    r.diagnostics["fd_fine_failures"] = fd[1].failures;
    r.diagnostics["fd_fine_max_relative_error"] = fd[1].max_relative_error;
    r.diagnostics["fd_fine_median_relative_error"] = fd[1].median_relative_error;
    r.add_estimate("fd failure fraction",
                   static_cast<double>(fd[0].failures) / static_cast<double>(fd[0].points), 0.0);
    r.add_verdict("Ldot finite-difference consistency", fd[0].failures == 0,
                  "relative error < " + fmt(opt.fd_threshold) + " at dx = " + fmt(opt.fd_relative_step) +
                      " x on every interior grid point");
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// lambda^{-3} L(lambda x) and lambda^{-2} Ldot(lambda x) against L(x), Ldot(x)
/// from an independent batch.
inline ExperimentReport scale_invariance_experiment(double lambda, double x, std::size_t n_real,
                                                    const SimConfig& cfg,
                                                    const ProfileBatchOptions& opt = {}) {
  if (!(lambda > 0) || !(x > 0)) throw DomainError("scale_invariance_experiment: lambda, x must be > 0");
  const auto start = std::chrono::steady_clock::now();
  const ProfileBatch p = build_profile_batch({lambda * x}, n_real, cfg, tags::kBatch + 2, opt);
  const ProfileBatch q = build_profile_batch({x}, n_real, cfg, tags::kBatch + 3, opt);
  std::vector<double> l_scaled, ld_scaled;
  for (double v : p.L[0]) l_scaled.push_back(v / (lambda * lambda * lambda));
  for (double v : p.Ldot[0]) ld_scaled.push_back(v / (lambda * lambda));
  ExperimentReport r;
  r.name = "scale";
  r.config = config_json(cfg);
  r.config["lambda"] = lambda;
  r.config["x"] = x;
  r.config["n_real"] = n_real;
  r.config["tol"] = opt.tol;
  const auto ml = stats::mean_and_error(l_scaled);
  const auto mq = stats::mean_and_error(q.L[0]);
  r.add_estimate("mean lambda^-3 L(lambda x)", ml.mean, ml.std_error);
  r.add_estimate("mean L(x)", mq.mean, mq.std_error);
  const auto t1 = stats::ks_two_sample(l_scaled, q.L[0]);
  const auto t2 = stats::ks_two_sample(ld_scaled, q.Ldot[0]);
  r.add_statistic("L coordinate", "ks", t1.statistic, t1.p_value);
  r.add_statistic("Ldot coordinate", "ks", t2.statistic, t2.p_value);
  r.add_verdict("scale invariance of L", t1.p_value > 0.01, "ks p > 0.01");
  r.add_verdict("scale invariance of Ldot", t2.p_value > 0.01, "ks p > 0.01");
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Route A: profiles at eps (batch P) and eps + t (independent batch Q).
/// Route B: the (L, Ldot) SDE from P's states at eps for duration t.
inline ExperimentReport two_route_experiment(double eps, double t, std::size_t n_real, const SimConfig& cfg,
                                             const ProfileBatchOptions& opt = {}) {
  if (!(eps > 0) || !(t >= 0)) throw DomainError("two_route_experiment: need eps > 0, t >= 0");
  const auto start = std::chrono::steady_clock::now();
  const ProfileBatch p = build_profile_batch({eps}, n_real, cfg, tags::kBatch + 4, opt);
  const ProfileBatch q = t > 0 ? build_profile_batch({eps + t}, n_real, cfg, tags::kBatch + 5, opt) : p;
  const RandomStream root(cfg.seed, tags::kRouteB);
  std::vector<double> L_b(n_real), Ldot_b(n_real), drift_int(n_real), min_inc(n_real);
  std::vector<unsigned char> stopped(n_real);
  parallel_for(
      n_real,
      [&](std::size_t i) {
        RandomStream rng = root.child(tags::kRouteB, i);
        const auto path = simulate_profile_system(p.L[0][i], p.Ldot[0][i], t, cfg, rng);
        L_b[i] = path.states.back().L;
        Ldot_b[i] = path.states.back().Ldot;
        drift_int[i] = path.drift_integral;
        min_inc[i] = path.min_drift_increment;
        stopped[i] = path.stopped;
      },
      opt.workers);
  ExperimentReport r;
  r.name = "two-route";
  r.config = config_json(cfg);
  r.config["eps"] = eps;
  r.config["t"] = t;
  r.config["n_real"] = n_real;
  r.config["tol"] = opt.tol;
  const auto ma = stats::mean_and_error(q.L[0]);
  const auto mb = stats::mean_and_error(L_b);
  r.add_estimate("route A mean L(eps+t)", ma.mean, ma.std_error);
  r.add_estimate("route B mean L(eps+t)", mb.mean, mb.std_error);
  const auto mda = stats::mean_and_error(q.Ldot[0]);
  const auto mdb = stats::mean_and_error(Ldot_b);
  r.add_estimate("route A mean Ldot(eps+t)", mda.mean, mda.std_error);
  r.add_estimate("route B mean Ldot(eps+t)", mdb.mean, mdb.std_error);
  const auto t1 = stats::ks_two_sample(L_b, q.L[0]);
  const auto t2 = stats::ks_two_sample(Ldot_b, q.Ldot[0]);
  r.add_statistic("L coordinate", "ks", t1.statistic, t1.p_value);
  r.add_statistic("Ldot coordinate", "ks", t2.statistic, t2.p_value);
  r.add_verdict("two-route L", t1.p_value > 0.01, "ks p > 0.01");
  r.add_verdict("two-route Ldot", t2.p_value > 0.01, "ks p > 0.01");
  bool finite = true;
  double max_drift = 0.0, min_increment = INFINITY;
  std::size_t n_stopped = 0;
  for (std::size_t i = 0; i < n_real; ++i) {
    finite = finite && std::isfinite(drift_int[i]);
    max_drift = std::max(max_drift, drift_int[i]);
    if (t > 0) min_increment = std::min(min_increment, min_inc[i]);
    n_stopped += stopped[i];
  }
  r.diagnostics["max_drift_integral"] = max_drift;
  r.diagnostics["stopped_at_floor"] = n_stopped;
  if (t > 0) r.diagnostics["min_drift_increment"] = min_increment;
  r.add_verdict("drift integral finite", finite && max_drift <= 1e6 && (t == 0 || min_increment > 0),
                "finite, <= 1e6, every increment > 0");
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// (Z, Lambda) started from (W*(tau*_eps), L_eps) and read at eta_s, against
/// the profile at eps + s from an independent batch.
inline ExperimentReport markov_kernel_experiment(double eps, double s, std::size_t n_real,
                                                 const SimConfig& cfg, const ProfileBatchOptions& opt = {}) {
  if (!(eps > 0) || !(s >= 0)) throw DomainError("markov_kernel_experiment: need eps > 0, s >= 0");
  const auto start = std::chrono::steady_clock::now();
  const ProfileBatch p = build_profile_batch({eps}, n_real, cfg, tags::kBatch + 4, opt);
  const ProfileBatch q = s > 0 ? build_profile_batch({eps + s}, n_real, cfg, tags::kBatch + 6, opt) : p;
  const RandomStream root(cfg.seed, tags::kKernel);
  std::vector<double> z_out(n_real), lam_out(n_real), z_ref(n_real);
  parallel_for(
      n_real,
      [&](std::size_t i) {
        RandomStream rng = root.child(tags::kKernel, i);
        const double w = wstar_at(p.L[0][i], p.Ldot[0][i]);
        const auto st = evolve_to_eta(w, p.L[0][i], s, cfg, rng);
        z_out[i] = st.Z;
        lam_out[i] = st.Lambda;
        z_ref[i] = wstar_at(q.L[0][i], q.Ldot[0][i]);
      },
      opt.workers);
  ExperimentReport r;
  r.name = "markov-kernel";
  r.config = config_json(cfg);
  r.config["eps"] = eps;
  r.config["s"] = s;
  r.config["n_real"] = n_real;
  r.config["tol"] = opt.tol;
  const auto ml = stats::mean_and_error(lam_out);
  const auto mq = stats::mean_and_error(q.L[0]);
  r.add_estimate("kernel mean Lambda_eta", ml.mean, ml.std_error);
  r.add_estimate("profile mean L(eps+s)", mq.mean, mq.std_error);
  const auto t1 = stats::ks_two_sample(lam_out, q.L[0]);
  const auto t2 = stats::ks_two_sample(z_out, z_ref);
  r.add_statistic("Lambda coordinate", "ks", t1.statistic, t1.p_value);
  r.add_statistic("Z coordinate", "ks", t2.statistic, t2.p_value);
  r.add_verdict("kernel Lambda", t1.p_value > 0.01, "ks p > 0.01");
  r.add_verdict("kernel Z", t2.p_value > 0.01, "ks p > 0.01");
  bool positive = true;
  for (double v : lam_out) positive = positive && v > 0;
  r.add_verdict("Lambda_eta > 0", positive, "every sample > 0");
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// mu draws from two different starting points.
inline ExperimentReport mu_coupling_experiment(std::size_t n, const SimConfig& cfg, double start_a = 0.0,
                                               double start_b = -5.0, double c = 30.0, unsigned workers = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  const RandomStream root(cfg.seed, tags::kMu);
  const auto a = sample_mu_batch(n, root, tags::kBatch + 7, cfg, {c, start_a}, workers);
  const auto b = sample_mu_batch(n, root, tags::kBatch + 8, cfg, {c, start_b}, workers);
  ExperimentReport r;
  r.name = "mu-coupling";
  r.config = config_json(cfg);
  r.config["n"] = n;
  r.config["c"] = c;
  r.config["start_a"] = start_a;
  r.config["start_b"] = start_b;
  const auto ma = stats::mean_and_error(a);
  const auto mb = stats::mean_and_error(b);
  r.add_estimate("mean from start_a", ma.mean, ma.std_error);
  r.add_estimate("mean from start_b", mb.mean, mb.std_error);
  const auto ks = stats::ks_two_sample(a, b);
  r.add_statistic("start_a vs start_b", "ks", ks.statistic, ks.p_value);
  r.add_verdict("initial-condition independence", ks.p_value > 0.01, "ks p > 0.01");
  std::size_t positive = 0;
  for (double v : a) positive += v >= 0;
  for (double v : b) positive += v >= 0;
  const double frac = static_cast<double>(positive) / static_cast<double>(2 * n);
  r.add_estimate("fraction >= 0", frac, 0.0);
  r.add_verdict("support on negative half-line", frac < 1e-3, "fraction of draws >= 0 below 1e-3");
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// gamma(-1) at two horizons and gamma(+1).
inline ExperimentReport gamma_experiment(std::size_t n, const SimConfig& cfg, unsigned workers = 0) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g5 = estimate_gamma(-1.0, 5.0, n, cfg, workers);
  const auto g50 = estimate_gamma(-1.0, 50.0, n, cfg, workers);
  const auto gp = estimate_gamma(1.0, 50.0, n, cfg, workers);
  ExperimentReport r;
  r.name = "gamma";
  r.config = config_json(cfg);
  r.config["n_paths"] = n;
  r.add_estimate("gamma(-1), horizon 5", g5.p_hat, g5.std_error);
  r.add_estimate("gamma(-1), horizon 50", g50.p_hat, g50.std_error);
  r.add_estimate("gamma(+1), horizon 50", gp.p_hat, gp.std_error);
  r.add_verdict("gamma(-1) > 0", g50.p_hat > 3.0 * g50.std_error && g50.p_hat > 0, "p_hat > 3 stderr");
  r.add_verdict("gamma(+1) = 0", gp.p_hat == 0.0, "exactly 0");
  r.add_verdict("horizon monotonicity", g50.p_hat <= g5.p_hat + 3.0 * g50.std_error,
                "p(50) <= p(5) + 3 stderr");
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

struct ErgodicOptions {
  std::size_t n_paths = 10000;
  double path_time = 20.0;
  double long_time = 2000.0;
  std::size_t batches = 50;
  std::size_t pi_draws = 100000;
  unsigned workers = 0;
};

/// Time averages of Z against pi_mean, and sample_pi against the CDF of theta.
inline ExperimentReport ergodic_experiment(const SimConfig& cfg, const ErgodicOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const RandomStream root(cfg.seed, tags::kErgodic);
  const double target = pi_mean();
  // Ensemble of stationary paths, each started from a pi draw.
  std::vector<double> averages(opt.n_paths);
  const std::size_t steps = step_count(opt.path_time, cfg.dt);
  parallel_for(
      opt.n_paths,
      [&](std::size_t i) {
        RandomStream rng = root.child(tags::kErgodic, i);
        const double w = sample_pi(rng).w;
        RandomStream run = rng.child(tags::kErgodic);
        ZStepper z(w, cfg, run);
        for (std::size_t k = 0; k < steps; ++k) z.step();
        averages[i] = z.integral() / z.time();
      },
      opt.workers);
  // One long path from 0, batch means over the trajectory.
  RandomStream long_rng = root.child(tags::kBatch);
  const std::size_t long_steps = step_count(opt.long_time, cfg.dt);
  const std::size_t per_batch = long_steps / opt.batches;
  std::vector<double> batch_avg;
  {
    ZStepper z(0.0, cfg, long_rng);
    for (std::size_t b = 0; b < opt.batches; ++b) {
      const double i0 = z.integral();
      for (std::size_t k = 0; k < per_batch; ++k) z.step();
      batch_avg.push_back((z.integral() - i0) / (static_cast<double>(per_batch) * cfg.dt));
    }
  }
  // pi sampler.
  std::vector<double> draws(opt.pi_draws);
  const std::size_t chunk = 1000;
  parallel_for(
      (opt.pi_draws + chunk - 1) / chunk,
      [&](std::size_t c) {
        RandomStream rng = root.child(tags::kPi, c);
        for (std::size_t i = c * chunk; i < std::min(opt.pi_draws, (c + 1) * chunk); ++i) draws[i] = sample_pi(rng).w;
      },
      opt.workers);

  ExperimentReport r;
  r.name = "ergodic";
  r.config = config_json(cfg);
  r.config["n_paths"] = opt.n_paths;
  r.config["path_time"] = opt.path_time;
  r.config["long_time"] = opt.long_time;
  r.config["batches"] = opt.batches;
  r.config["pi_draws"] = opt.pi_draws;
  r.add_estimate("pi_mean (quadrature)", target, 0.0);
  const auto ens = stats::mean_and_error(averages);
  r.add_estimate("ensemble time average", ens.mean, ens.std_error);
  const auto lng = stats::mean_and_error(batch_avg);
  r.add_estimate("long-path batch means", lng.mean, lng.std_error);
  const auto ks = stats::ks_one_sample(draws, [](double x) { return pi_cdf(x); });
  r.add_statistic("sample_pi vs theta CDF", "kolmogorov", ks.statistic, ks.p_value);
  const auto pm = stats::mean_and_error(draws);
  r.add_estimate("sample_pi mean", pm.mean, pm.std_error);
  r.add_verdict("pi_mean < 0", target < 0, "strictly negative");
  r.add_verdict("ensemble average = pi_mean", std::fabs(ens.mean - target) <= 3.0 * ens.std_error,
                "within 3 stderr (one batch per path)");
  r.add_verdict("long-path average = pi_mean", std::fabs(lng.mean - target) <= 3.0 * lng.std_error,
                "within 3 batch-means stderr");
  r.add_verdict("sample_pi Kolmogorov distance", ks.statistic < 0.01, "sup |F_n - F| < 0.01");
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace sphere_area
