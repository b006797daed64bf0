#pragma once

// The stationary process W* on a finite window [S_B, T_fwd], the exponential
// functional Lambda*(t) = exp(int_0^t W*), the decreasing time change
//   tau*_x = sup{z : int_z^inf Lambda*^{1/3} >= x},
// and the profile (L_x, Ldot_x) = (Lambda*(tau*_x), -Lambda*(tau*_x)^{2/3} W*(tau*_x)).
//
// W* is linear between grid points, so log Lambda* is piecewise quadratic and
// Ldot is the exact x-derivative of L on the realization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sphere_area/errors.hpp"
#include "sphere_area/random.hpp"
#include "sphere_area/report.hpp"
#include "sphere_area/sde.hpp"
#include "sphere_area/special_fn.hpp"
#include "sphere_area/stationary.hpp"

namespace sphere_area {

struct WStarOptions {
  double initial_B = 20.0;
  int max_escalations = 5;       // B runs through initial_B * 2^k, k <= max_escalations
  double tail_safety = 4.0;      // the tail estimate must be below tol * x_max / tail_safety
  double window = 1.0;           // trailing window (time units) for the increment check
  double min_forward_time = 0.0; // run at least this long past t = 0
  MuOptions mu{};
};

struct WStarRealization {
  double anchor_B = 0.0;
  double S_B = 0.0;
  double mu_draw = 0.0;
  int attempts = 0;
  double x_max = 0.0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Path grid;                           // W* on t0 = S_B with step dt; running_integral from S_B
  std::vector<double> log_lambda_star; // log Lambda* at grid points
  std::vector<double> cell_integral;   // int of Lambda*^{1/3} over each grid cell
  std::vector<double> upper_integral;  // int_{t_k}^{T_fwd} Lambda*^{1/3} + tail_correction
  double tail_correction = 0.0;        // estimate of int_{T_fwd}^inf Lambda*^{1/3}
  double fwd_tail_bound = 0.0;         // tail_safety * tail_correction
  double T_fwd = 0.0;

  double coverage() const { return upper_integral.front(); }
  double min_x() const { return upper_integral.back(); }
};

struct ProfileCurve {
  std::vector<double> xs;
  std::vector<double> L;
  std::vector<double> Ldot;
  std::vector<double> tau_star;
};

namespace detail {

/// log Lambda* at offset s in cell k.
inline double cell_log_lambda(const WStarRealization& r, std::size_t k, double s) {
  const double w0 = r.grid.values[k];
  const double w1 = r.grid.values[k + 1];
  return r.log_lambda_star[k] + w0 * s + (w1 - w0) * s * s / (2.0 * r.grid.dt);
}

/// int_a^b exp(q(s)/3) ds for a quadratic q with q(0) = l0, q'(s) = w0 + (w1 - w0) s / dt.
inline double cell_cbrt_integral(double l0, double w0, double w1, double dt, double a, double b) {
  static constexpr double kNode = 0.774596669241483377035853079956;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto f = [&](double s) { return std::exp((l0 + w0 * s + (w1 - w0) * s * s / (2.0 * dt)) / 3.0); };
  return half * (5.0 / 9.0 * (f(mid - half * kNode) + f(mid + half * kNode)) + 8.0 / 9.0 * f(mid));
}

/// Root in [0, dt] of i0 + w0 s + (w1 - w0) s^2 / (2 dt) = level, given a sign change.
inline double quadratic_crossing(double i0, double w0, double w1, double dt, double level) {
  auto f = [&](double s) { return i0 + w0 * s + (w1 - w0) * s * s / (2.0 * dt) - level; };
  double lo = 0.0, hi = dt;
  const double f_lo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) > 0) == (f_lo > 0)) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct WStarAttempt {
  bool covered;
  WStarRealization real;
};

inline WStarAttempt build_wstar_attempt(double x_max, double tol, double B, const SimConfig& cfg,
                                        const RandomStream& stream, const WStarOptions& opt) {
  WStarRealization r;
  r.anchor_B = B;
  r.x_max = x_max;
  r.tol = tol;
  r.seed = stream.seed();
  r.stream = stream.stream();
  RandomStream mu_rng = stream.child(tags::kMu);
  r.mu_draw = sample_mu(opt.mu.c, mu_rng, cfg, opt.mu.start).w;
  RandomStream run = stream.child(tags::kWStar);
  ZStepper z(r.mu_draw, cfg, run);
  const double dt = cfg.dt;
  const double target = tol * x_max;
  const double decay = 3.0 / std::fabs(pi_mean());
  const std::size_t window_steps = std::max<std::size_t>(1, step_count(opt.window, dt));

  std::vector<double>& W = r.grid.values;
  std::vector<double>& I = r.grid.running_integral;
  W.push_back(r.mu_draw);
  I.push_back(0.0);

  // Phase 1: integral of Z' hits -B at H_B; that point becomes t = 0.
  std::size_t kb = 0;
  double sb = 0.0;
  while (true) {
    if (z.time() >= cfg.max_time) throw HorizonExceeded("build_wstar: integral did not reach -B");
    z.step();
    W.push_back(z.z());
    I.push_back(z.integral());
    const std::size_t k = W.size() - 2;
    if (I[k + 1] <= -B) {
      kb = k;
      sb = quadratic_crossing(I[k], W[k], W[k + 1], dt, -B);
      break;
    }
  }
  const double offset = I[kb] + W[kb] * sb + (W[kb + 1] - W[kb]) * sb * sb / (2.0 * dt);
  r.S_B = -(static_cast<double>(kb) * dt + sb);
  r.grid.t0 = r.S_B;
  r.grid.dt = dt;

  auto log_lambda = [&](std::size_t k) { return I[k] - offset; };
  r.cell_integral.reserve(W.size() * 3);
  for (std::size_t k = 0; k + 1 < W.size(); ++k) {
    r.cell_integral.push_back(cell_cbrt_integral(log_lambda(k), W[k], W[k + 1], dt, 0.0, dt));
  }
  // Phase 2: forward until the remaining integral is negligible.
  double window_sum = 0.0;
  for (std::size_t k = r.cell_integral.size() >= window_steps ? r.cell_integral.size() - window_steps : 0;
       k < r.cell_integral.size(); ++k) {
    window_sum += r.cell_integral[k];
  }
  while (true) {
    const std::size_t last = W.size() - 1;
    const double t_last = r.S_B + static_cast<double>(last) * dt;
    const double tail = std::exp(log_lambda(last) / 3.0) * decay;
    if (t_last > opt.min_forward_time && t_last > 0.0 && opt.tail_safety * tail < target &&
        window_sum < target / 10.0) {
      r.tail_correction = tail;
      r.fwd_tail_bound = opt.tail_safety * tail;
      r.T_fwd = t_last;
      break;
    }
    if (z.time() >= cfg.max_time) throw HorizonExceeded("build_wstar: forward tail did not decay");
    z.step();
    W.push_back(z.z());
    I.push_back(z.integral());
    const std::size_t k = W.size() - 2;
    const double c = cell_cbrt_integral(log_lambda(k), W[k], W[k + 1], dt, 0.0, dt);
    r.cell_integral.push_back(c);
    window_sum += c;
    if (r.cell_integral.size() > window_steps)
      window_sum -= r.cell_integral[r.cell_integral.size() - 1 - window_steps];
  }
  r.log_lambda_star.resize(W.size());
  for (std::size_t k = 0; k < W.size(); ++k) r.log_lambda_star[k] = log_lambda(k);
  r.upper_integral.assign(W.size(), 0.0);
  r.upper_integral.back() = r.tail_correction;
  for (std::size_t k = W.size() - 1; k-- > 0;) {
    r.upper_integral[k] = r.upper_integral[k + 1] + r.cell_integral[k];
  }
  const bool covered = r.coverage() >= x_max * (1.0 + tol);
  return {covered, std::move(r)};
}

}  // namespace detail

/// One realization of W* anchored at level B, covering x in (0, x_max].
/// B is doubled on a fresh substream until the coverage certificate holds.
inline WStarRealization build_wstar(double x_max, double tol, const SimConfig& cfg,
                                    const RandomStream& rng, const WStarOptions& opt = {}) {
  cfg.validate();
  if (!(x_max > 0)) throw DomainError("build_wstar: x_max must be > 0");
  if (!(tol > 0)) throw DomainError("build_wstar: tol must be > 0");
  double B = opt.initial_B;
  for (int attempt = 0; attempt <= opt.max_escalations; ++attempt, B *= 2.0) {
    auto result = detail::build_wstar_attempt(x_max, tol, B, cfg,
                                              rng.child(tags::kWStar, static_cast<std::uint64_t>(attempt)), opt);
    if (result.covered) {
      result.real.attempts = attempt + 1;
      return std::move(result.real);
    }
  }
  std::ostringstream msg;
  msg << "build_wstar: coverage of x_max = " << x_max << " not reached up to B = " << B / 2.0;
  throw CoverageFailure(msg.str());
}

struct TauPosition {
  std::size_t cell;
  double offset;
  double tau;
};

namespace detail {

inline TauPosition locate_tau(const WStarRealization& r, double x) {
  if (!(x > 0)) throw OutOfCoverage("tau_star: x must be > 0");
  const auto& G = r.upper_integral;
  if (x > G.front()) {
    std::ostringstream msg;
    msg << "tau_star: x = " << x << " exceeds covered integral " << G.front();
    throw OutOfCoverage(msg.str());
  }
  if (x <= G.back()) {
    std::ostringstream msg;
    msg << "tau_star: x = " << x << " lies in the uncovered forward tail (" << G.back() << ")";
    throw OutOfCoverage(msg.str());
  }
  if (x == G.front()) return {0, 0.0, r.S_B};
  // G is decreasing; find k with G[k] >= x > G[k+1].
  const auto it = std::lower_bound(G.begin(), G.end(), x, [](double g, double v) { return g >= v; });
  const auto k = static_cast<std::size_t>(it - G.begin()) - 1;
  const double dt = r.grid.dt;
  const double l0 = r.log_lambda_star[k];
  const double w0 = r.grid.values[k];
  const double w1 = r.grid.values[k + 1];
  const double need = x - G[k + 1];  // = int_s^dt exp(q/3)
  double lo = 0.0, hi = dt;
  // Linear first guess from the cell total.
  double s = dt * (1.0 - need / r.cell_integral[k]);
  s = std::clamp(s, 0.0, dt);
  for (int it2 = 0; it2 < 100; ++it2) {
    const double f = cell_cbrt_integral(l0, w0, w1, dt, s, dt) - need;  // decreasing in s
    if (f > 0) lo = s; else hi = s;
    if (std::fabs(f) <= 1e-15 * need || hi - lo <= 1e-16 * dt) break;
    const double deriv = -std::exp((l0 + w0 * s + (w1 - w0) * s * s / (2.0 * dt)) / 3.0);
    double next = s - f / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  return {k, s, r.S_B + static_cast<double>(k) * dt + s};
}

}  // namespace detail

/// tau*_x on the realization (decreasing in x).
inline double tau_star(const WStarRealization& r, double x) { return detail::locate_tau(r, x).tau; }

/// (L, Ldot, tau*) at each x.
inline ProfileCurve extract_profile(const WStarRealization& r, const std::vector<double>& xs) {
  ProfileCurve c;
  c.xs = xs;
  c.L.reserve(xs.size());
  c.Ldot.reserve(xs.size());
  c.tau_star.reserve(xs.size());
  for (double x : xs) {
    const TauPosition p = detail::locate_tau(r, x);
    const double log_l = detail::cell_log_lambda(r, p.cell, p.offset);
    const double w0 = r.grid.values[p.cell];
    const double w1 = r.grid.values[p.cell + 1];
    const double w = w0 + (w1 - w0) * p.offset / r.grid.dt;
    const double L = std::exp(log_l);
    c.L.push_back(L);
    c.Ldot.push_back(-std::exp(2.0 * log_l / 3.0) * w);
    c.tau_star.push_back(p.tau);
  }
  return c;
}

/// W*(tau*_x), recovered from the profile as -Ldot / L^{2/3}.
inline double wstar_at(double L, double Ldot) { return -Ldot / std::pow(L, 2.0 / 3.0); }

// ---------------------------------------------------------------------------
// Serialization.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::ordered_json realization_header(const WStarRealization& r, const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["anchor_B"] = r.anchor_B;
  j["S_B"] = r.S_B;
  j["T_fwd"] = r.T_fwd;
  j["mu_draw"] = r.mu_draw;
  j["attempts"] = r.attempts;
  j["seed"] = r.seed;
  j["stream"] = r.stream;
  j["x_max"] = r.x_max;
  j["tol"] = r.tol;
  j["coverage"] = r.coverage();
  j["tail_correction"] = r.tail_correction;
  j["fwd_tail_bound"] = r.fwd_tail_bound;
  j["config"] = config_json(cfg);
  return j;
}

/// RFC 4180 CSV with '#' provenance lines carrying the JSON header.
inline void write_profile_csv(std::ostream& out, const ProfileCurve& c,
                              const nlohmann::ordered_json& header) {
  out << "# sphere-area profile\n";
  out << "# " << header.dump() << "\n";
  out << "x,L,Ldot,tau_star\n";
  for (std::size_t i = 0; i < c.xs.size(); ++i) {
    out << format_double(c.xs[i]) << ',' << format_double(c.L[i]) << ','
        << format_double(c.Ldot[i]) << ',' << format_double(c.tau_star[i]) << '\n';
  }
}

inline nlohmann::ordered_json profile_json(const ProfileCurve& c, const nlohmann::ordered_json& header) {
  nlohmann::ordered_json j;
  j["header"] = header;
  j["x"] = c.xs;
  j["L"] = c.L;
  j["Ldot"] = c.Ldot;
  j["tau_star"] = c.tau_star;
  return j;
}

}  // namespace sphere_area
