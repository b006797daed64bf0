#pragma once

// Euler-Maruyama engine for dZ = 4 dB + b(Z) dt, the coupled pair
// (Z, Lambda = lambda exp(-int Z)), integral hitting times and the
// (L, Ldot) system dLdot = 4 sqrt(L) dB + h(L, Ldot) dx, dL = Ldot dx.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "sphere_area/errors.hpp"
#include "sphere_area/random.hpp"
#include "sphere_area/special_fn.hpp"

namespace sphere_area {

enum class Scheme { euler, milstein };

inline std::string to_string(Scheme s) { return s == Scheme::euler ? "euler" : "milstein"; }

struct SimConfig {
  double dt = 1e-3;
  std::uint64_t seed = 1;
  double max_time = 1e4;
  /// Both noises are additive or have state-independent coefficients in the
  /// stepped variable, so milstein reduces to euler.
  Scheme scheme = Scheme::euler;
  /// Positivity floor for L in the (L, Ldot) system.
  double floor_L = 1e-12;

  void validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw DomainError("SimConfig: dt must be > 0");
    if (!(max_time >= dt)) throw DomainError("SimConfig: max_time must be >= dt");
    if (!(floor_L > 0)) throw DomainError("SimConfig: floor_L must be > 0");
  }
};

struct Path {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;
  std::vector<double> running_integral;

  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt; }
};

struct ZLambdaPath {
  Path path;
  std::vector<double> lambda;
};

/// Streaming Euler stepper for Z with trapezoidal running integral.
class ZStepper {
 public:
  ZStepper(double w0, const SimConfig& cfg, RandomStream& rng)
      : z_(w0), dt_(cfg.dt), sigma_(4.0 * std::sqrt(cfg.dt)), rng_(&rng),
        drift_(&DriftTable::instance()) {}

  void step() {
    const double z_next = z_ + drift_->b(z_) * dt_ + sigma_ * rng_->normal();
    integral_ += 0.5 * (z_ + z_next) * dt_;
    z_ = z_next;
    ++steps_;
  }

  double z() const { return z_; }
  double integral() const { return integral_; }
  std::uint64_t steps() const { return steps_; }
  double time() const { return static_cast<double>(steps_) * dt_; }
  double dt() const { return dt_; }

 private:
  double z_;
  double integral_ = 0.0;
  std::uint64_t steps_ = 0;
  double dt_;
  double sigma_;
  RandomStream* rng_;
  const DriftTable* drift_;
};

inline std::size_t step_count(double T, double dt) {
  if (!(T >= 0) || !std::isfinite(T)) throw DomainError("simulation horizon must be >= 0");
  return static_cast<std::size_t>(std::llround(T / dt));
}

/// Euler-Maruyama path of Z on [0, T] from w0.
inline Path simulate_Z(double w0, double T, const SimConfig& cfg, RandomStream& rng) {
  cfg.validate();
  const std::size_t n = step_count(T, cfg.dt);
  Path path;
  path.dt = cfg.dt;
  path.values.reserve(n + 1);
  path.running_integral.reserve(n + 1);
  path.values.push_back(w0);
  path.running_integral.push_back(0.0);
  ZStepper stepper(w0, cfg, rng);
  for (std::size_t k = 0; k < n; ++k) {
    stepper.step();
    path.values.push_back(stepper.z());
    path.running_integral.push_back(stepper.integral());
  }
  return path;
}

struct HittingResult {
  double H;
  double Z_at_H;
};

/// Advances `stepper` until its running integral first reaches -b, interpolating
/// linearly inside the crossing step. The stepper is left at the step after the crossing.
inline HittingResult advance_to_level(ZStepper& stepper, double b, double max_time) {
  const double level = -b;
  if (stepper.integral() <= level) return {stepper.time(), stepper.z()};
  while (true) {
    if (stepper.time() >= max_time) {
      std::ostringstream msg;
      msg << "integral did not reach " << level << " before time " << max_time;
      throw HorizonExceeded(msg.str());
    }
    const double i0 = stepper.integral();
    const double z0 = stepper.z();
    const double t0 = stepper.time();
    stepper.step();
    const double i1 = stepper.integral();
    if (i1 <= level) {
      const double frac = (i0 - level) / (i0 - i1);
      return {t0 + frac * stepper.dt(), z0 + frac * (stepper.z() - z0)};
    }
  }
}

/// H_b = inf{t : int_0^t Z = -b} for Z started at w0.
inline HittingResult hitting_time_Hb(double w0, double b, const SimConfig& cfg, RandomStream& rng) {
  cfg.validate();
  if (!(b >= 0)) throw DomainError("hitting_time_Hb: b must be >= 0");
  if (b == 0.0) return {0.0, w0};
  ZStepper stepper(w0, cfg, rng);
  return advance_to_level(stepper, b, cfg.max_time);
}

/// Z together with Lambda = lam exp(-int_0 Z).
inline ZLambdaPath simulate_Z_Lambda(double w, double lam, double T, const SimConfig& cfg,
                                     RandomStream& rng) {
  if (!(lam > 0)) throw DomainError("simulate_Z_Lambda: lam must be > 0");
  ZLambdaPath out;
  out.path = simulate_Z(w, T, cfg, rng);
  out.lambda.reserve(out.path.size());
  for (double integral : out.path.running_integral) out.lambda.push_back(lam * std::exp(-integral));
  return out;
}

struct EtaPosition {
  std::size_t index;   // grid step containing eta_s
  double fraction;     // position inside the step, in [0, 1]
  double r;            // eta_s as a time
};

/// eta_s = inf{r : int_0^r Lambda^{1/3} >= s} on the trapezoid-integrated grid.
inline EtaPosition time_change_eta(const ZLambdaPath& zl, double s) {
  if (!(s >= 0)) throw DomainError("time_change_eta: s must be >= 0");
  const Path& p = zl.path;
  if (s == 0.0) return {0, 0.0, p.t0};
  double cum = 0.0;
  double prev = std::cbrt(zl.lambda[0]);
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const double next = std::cbrt(zl.lambda[k + 1]);
    const double inc = 0.5 * (prev + next) * p.dt;
    if (cum + inc >= s) {
      const double frac = (s - cum) / inc;
      return {k, frac, p.time(k) + frac * p.dt};
    }
    cum += inc;
    prev = next;
  }
  std::ostringstream msg;
  msg << "time_change_eta: cumulative integral " << cum << " does not reach " << s;
  throw NotReached(msg.str());
}

struct ZLambdaState {
  double Z;
  double Lambda;
  double eta;
};

/// Streams (Z, Lambda) from (w, lam) and returns the interpolated state at eta_s.
inline ZLambdaState evolve_to_eta(double w, double lam, double s, const SimConfig& cfg,
                                  RandomStream& rng) {
  cfg.validate();
  if (!(lam > 0)) throw DomainError("evolve_to_eta: lam must be > 0");
  if (!(s >= 0)) throw DomainError("evolve_to_eta: s must be >= 0");
  if (s == 0.0) return {w, lam, 0.0};
  const double lam_cbrt = std::cbrt(lam);
  ZStepper stepper(w, cfg, rng);
  double cum = 0.0;
  double prev = lam_cbrt;
  while (stepper.time() < cfg.max_time) {
    const double z0 = stepper.z();
    const double i0 = stepper.integral();
    const double t0 = stepper.time();
    stepper.step();
    const double next = lam_cbrt * std::exp(-stepper.integral() / 3.0);
    const double inc = 0.5 * (prev + next) * cfg.dt;
    if (cum + inc >= s) {
      const double frac = (s - cum) / inc;
      const double integral = i0 + frac * (stepper.integral() - i0);
      return {z0 + frac * (stepper.z() - z0), lam * std::exp(-integral), t0 + frac * cfg.dt};
    }
    cum += inc;
    prev = next;
  }
  throw NotReached("evolve_to_eta: level not reached before max_time");
}

struct ProfileState {
  double L;
  double Ldot;
};

struct ProfileSystemPath {
  std::vector<ProfileState> states;
  double dt = 0.0;
  bool stopped = false;          // L fell below the floor
  std::size_t stop_index = 0;    // first state below the floor when stopped
  double drift_integral = 0.0;   // int h(L, Ldot) dx along the path
  double min_drift_increment = INFINITY;
};

/// h(L, Ldot) = L^{1/3} g(-Ldot / L^{2/3}), table-backed.
inline double profile_drift(double L, double Ldot) {
  const double c = std::cbrt(L);
  return c * DriftTable::instance().g(-Ldot / (c * c));
}

/// Euler-Maruyama for Ldot with trapezoid update of L, on [0, T].
inline ProfileSystemPath simulate_profile_system(double L0, double Ldot0, double T,
                                                 const SimConfig& cfg, RandomStream& rng) {
  cfg.validate();
  if (!(L0 > 0)) throw DomainError("simulate_profile_system: L0 must be > 0");
  const std::size_t n = step_count(T, cfg.dt);
  ProfileSystemPath out;
  out.dt = cfg.dt;
  out.states.reserve(n + 1);
  out.states.push_back({L0, Ldot0});
  const double sq = std::sqrt(cfg.dt);
  double L = L0, Ldot = Ldot0;
  for (std::size_t k = 0; k < n; ++k) {
    const double drift = profile_drift(L, Ldot) * cfg.dt;
    out.drift_integral += drift;
    out.min_drift_increment = std::min(out.min_drift_increment, drift);
    const double Ldot_next = Ldot + 4.0 * std::sqrt(L) * sq * rng.normal() + drift;
    const double L_next = L + 0.5 * (Ldot + Ldot_next) * cfg.dt;
    Ldot = Ldot_next;
    L = L_next;
    out.states.push_back({L, Ldot});
    if (L < cfg.floor_L) {
      out.stopped = true;
      out.stop_index = k + 1;
      break;
    }
  }
  return out;
}

}  // namespace sphere_area
