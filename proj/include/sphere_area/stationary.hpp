#pragma once

// Samplers for the invariant law pi, the hitting law mu, and estimates of
// gamma(x) = P_x(int_0^t Z < 0 for all t > 0).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "sphere_area/errors.hpp"
#include "sphere_area/parallel.hpp"
#include "sphere_area/random.hpp"
#include "sphere_area/report.hpp"
#include "sphere_area/sde.hpp"
#include "sphere_area/special_fn.hpp"
#include "sphere_area/stats.hpp"

namespace sphere_area {

/// Stream tags; each purpose gets its own family of substreams.
namespace tags {
inline constexpr std::uint64_t kPi = 0x5049;
inline constexpr std::uint64_t kGamma = 0x47414d;
inline constexpr std::uint64_t kMu = 0x4d55;
inline constexpr std::uint64_t kMuRun = 0x4d5552;
inline constexpr std::uint64_t kReversal = 0x524556;
inline constexpr std::uint64_t kWStar = 0x5753;
inline constexpr std::uint64_t kProfile = 0x50524f;
inline constexpr std::uint64_t kRouteB = 0x525442;
inline constexpr std::uint64_t kKernel = 0x4b4552;
inline constexpr std::uint64_t kErgodic = 0x455247;
inline constexpr std::uint64_t kBatch = 0x424154;
}  // namespace tags

struct PiSample {
  double w;
};

struct MuSample {
  double w;
};

struct GammaEstimate {
  double x;
  double horizon;
  std::size_t n_paths;
  double p_hat;
  double std_error;
};

/// Rejection sampler for pi with a piecewise-constant majorant of theta on
/// [-30, 15] and exponential caps outside (tangent lines of the concave log theta).
class PiSampler {
 public:
  static constexpr double kLow = -30.0;
  static constexpr double kHigh = 15.0;
  static constexpr double kCell = 0.05;
  static constexpr double kMargin = 1.02;

  PiSampler() {
    const int cells = static_cast<int>(std::lround((kHigh - kLow) / kCell));
    height_.resize(cells);
    cumulative_.resize(cells + 2);
    for (int i = 0; i < cells; ++i) {
      const double a = kLow + i * kCell;
      double m = 0.0;
      for (int j = 0; j <= 8; ++j) m = std::max(m, theta(a + kCell * j / 8.0));
      height_[i] = m * kMargin;
      // Audit on a finer grid.
      for (int j = 0; j <= 64; ++j) {
        const double x = a + kCell * j / 64.0;
        if (theta(x) > height_[i]) {
          std::ostringstream msg;
          msg << "pi envelope below theta at x = " << x;
          throw EnvelopeViolation(msg.str());
        }
      }
    }
    left_rate_ = theta_dlog(kLow);
    right_rate_ = theta_dlog(kHigh);
    if (!(left_rate_ > 0) || !(right_rate_ < 0)) throw EnvelopeViolation("pi tail caps not decaying");
    left_top_ = theta(kLow);
    right_top_ = theta(kHigh);
    double acc = left_top_ / left_rate_;
    cumulative_[0] = acc;
    for (int i = 0; i < cells; ++i) {
      acc += height_[i] * kCell;
      cumulative_[i + 1] = acc;
    }
    acc += right_top_ / (-right_rate_);
    cumulative_[cells + 1] = acc;
  }

  static const PiSampler& instance() {
    static const PiSampler s;
    return s;
  }

  double envelope_mass() const { return cumulative_.back(); }

  /// Envelope value at x (for audits).
  double envelope(double x) const {
    if (x < kLow) return left_top_ * std::exp(left_rate_ * (x - kLow));
    if (x >= kHigh) return right_top_ * std::exp(right_rate_ * (x - kHigh));
    const auto i = std::min(static_cast<std::size_t>((x - kLow) / kCell), height_.size() - 1);
    return height_[i];
  }

  double sample(RandomStream& rng) const {
    while (true) {
      const double u = rng.uniform() * cumulative_.back();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto region = static_cast<std::size_t>(it - cumulative_.begin());
      double x;
      double env;
      if (region == 0) {
        x = kLow + std::log(rng.uniform()) / left_rate_;
        env = left_top_ * std::exp(left_rate_ * (x - kLow));
      } else if (region == cumulative_.size() - 1) {
        x = kHigh - std::log(rng.uniform()) / (-right_rate_);
        env = right_top_ * std::exp(right_rate_ * (x - kHigh));
      } else {
        const std::size_t i = region - 1;
        x = kLow + (static_cast<double>(i) + rng.uniform()) * kCell;
        env = height_[i];
      }
      if (rng.uniform() * env <= theta(x)) return x;
    }
  }

 private:
  std::vector<double> height_;
  std::vector<double> cumulative_;
  double left_rate_ = 0, right_rate_ = 0, left_top_ = 0, right_top_ = 0;
};

inline PiSample sample_pi(RandomStream& rng) { return {PiSampler::instance().sample(rng)}; }

/// Fraction of paths from x whose running integral stays < 0 at every step
/// time in (0, horizon].
inline GammaEstimate estimate_gamma(double x, double horizon, std::size_t n_paths,
                                    const SimConfig& cfg, unsigned workers = 0) {
  cfg.validate();
  if (!(horizon > 0)) throw DomainError("estimate_gamma: horizon must be > 0");
  if (n_paths == 0) throw DomainError("estimate_gamma: n_paths must be > 0");
  const RandomStream root(cfg.seed, tags::kGamma);
  const std::size_t steps = step_count(horizon, cfg.dt);
  std::vector<unsigned char> survived(n_paths, 0);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        RandomStream rng = root.child(tags::kGamma, i);
        ZStepper z(x, cfg, rng);
        for (std::size_t k = 0; k < steps; ++k) {
          z.step();
          if (z.integral() >= 0.0) return;
        }
        survived[i] = 1;
      },
      workers);
  std::size_t hits = 0;
  for (auto s : survived) hits += s;
  const double p = static_cast<double>(hits) / static_cast<double>(n_paths);
  return {x, horizon, n_paths, p, std::sqrt(p * (1 - p) / static_cast<double>(n_paths))};
}

struct MuOptions {
  double c = 30.0;
  double start = 0.0;
};

/// Z at the first time its running integral hits -kappa, kappa ~ U[c, 2c].
inline MuSample sample_mu(double c, RandomStream& rng, const SimConfig& cfg, double start = 0.0) {
  if (!(c > 0)) throw DomainError("sample_mu: c must be > 0");
  const double level = c * (1.0 + rng.uniform());
  RandomStream run = rng.child(tags::kMuRun);
  ZStepper z(start, cfg, run);
  return {advance_to_level(z, level, cfg.max_time).Z_at_H};
}

/// n independent mu draws, draw i on substream (tag, i) of `root`.
inline std::vector<double> sample_mu_batch(std::size_t n, const RandomStream& root, std::uint64_t tag,
                                           const SimConfig& cfg, const MuOptions& opt,
                                           unsigned workers = 0) {
  std::vector<double> out(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        RandomStream rng = root.child(tag, i);
        out[i] = sample_mu(opt.c, rng, cfg, opt.start).w;
      },
      workers);
  return out;
}

struct ReversalOptions {
  double a = 5.0;
  double delta = 15.0;
  /// Compare Z at q*xi with the reversed path at q*xi, i.e. Z at (1-q)*xi.
  double q = 0.25;
  MuOptions mu{};
};

struct ReversalPath {
  double xi;
  double z_xi;
  double z_forward;   // Z at q xi
  double z_backward;  // Z at (1 - q) xi
  double z_hb;        // Z at H_{a/2}
  bool late_return;   // integral came back above -a after reaching -a - delta/2
};

/// One path under P_mu, run until the integral reaches -a - delta.
inline ReversalPath reversal_path(RandomStream& rng, const SimConfig& cfg, const ReversalOptions& opt) {
  RandomStream mu_rng = rng.child(tags::kMu);
  const double w = sample_mu(opt.mu.c, mu_rng, cfg, opt.mu.start).w;
  RandomStream run = rng.child(tags::kReversal);
  ZStepper z(w, cfg, run);
  std::vector<double> values{w};
  const double level = -opt.a;
  const double stop = -opt.a - opt.delta;
  const double half = -opt.a - opt.delta / 2;
  const double b_level = -opt.a / 2;
  double xi = 0.0, z_xi = w;
  double z_hb = w;
  bool hb_found = false;
  bool reached_half = false;
  bool late = false;
  while (z.integral() > stop) {
    if (z.time() >= cfg.max_time) throw HorizonExceeded("reversal_path: integral did not reach -a - delta");
    const double i0 = z.integral();
    const double z0 = z.z();
    const double t0 = z.time();
    z.step();
    values.push_back(z.z());
    const double i1 = z.integral();
    if (!hb_found && i1 <= b_level) {
      const double f = (i0 - b_level) / (i0 - i1);
      z_hb = z0 + f * (z.z() - z0);
      hb_found = true;
    }
    if (i0 >= level && i1 < level) {
      const double f = (i0 - level) / (i0 - i1);
      xi = t0 + f * cfg.dt;
      z_xi = z0 + f * (z.z() - z0);
      if (reached_half) late = true;
    }
    if (i1 <= half) reached_half = true;
  }
  auto at = [&](double t) {
    const double u = t / cfg.dt;
    const auto k = std::min(static_cast<std::size_t>(u), values.size() - 2);
    const double f = u - static_cast<double>(k);
    return values[k] + f * (values[k + 1] - values[k]);
  };
  return {xi, z_xi, at(opt.q * xi), at((1 - opt.q) * xi), z_hb, late};
}

/// Time-reversal and hitting-law tests under P_mu:
/// (i) Z_xi ~ mu, (ii) Z_{q xi} and Z_{(1-q) xi} equal in law, (iii) Z_{H_{a/2}} ~ mu.
inline ExperimentReport reversal_suite(double a, std::size_t n_paths, const SimConfig& cfg,
                                       ReversalOptions opt = {}, unsigned workers = 0) {
  cfg.validate();
  if (!(a > 0)) throw DomainError("reversal_suite: a must be > 0");
  opt.a = a;
  const auto start = std::chrono::steady_clock::now();
  const RandomStream root(cfg.seed, tags::kReversal);
  std::vector<ReversalPath> batch1(n_paths), batch2(n_paths);
  parallel_for(
      2 * n_paths,
      [&](std::size_t i) {
        RandomStream rng = root.child(tags::kReversal, i);
        (i < n_paths ? batch1[i] : batch2[i - n_paths]) = reversal_path(rng, cfg, opt);
      },
      workers);
  const std::vector<double> fresh = sample_mu_batch(n_paths, root, tags::kMu, cfg, opt.mu, workers);

  std::vector<double> z_xi, z_fwd, z_bwd, z_hb, xi;
  std::size_t late = 0;
  for (const auto& p : batch1) {
    z_xi.push_back(p.z_xi);
    z_fwd.push_back(p.z_forward);
    z_hb.push_back(p.z_hb);
    xi.push_back(p.xi);
    late += p.late_return;
  }
  for (const auto& p : batch2) {
    z_bwd.push_back(p.z_backward);
    late += p.late_return;
  }

  ExperimentReport r;
  r.name = "reversal";
  r.config = config_json(cfg);
  r.config["a"] = opt.a;
  r.config["delta"] = opt.delta;
  r.config["q"] = opt.q;
  r.config["mu_c"] = opt.mu.c;
  r.config["n_paths"] = n_paths;
  const auto m_xi = stats::mean_and_error(xi);
  r.add_estimate("xi", m_xi.mean, m_xi.std_error);
  const auto m_fresh = stats::mean_and_error(fresh);
  r.add_estimate("mu_mean", m_fresh.mean, m_fresh.std_error);
  const auto t1 = stats::ks_two_sample(z_xi, fresh);
  const auto t2 = stats::ks_two_sample(z_fwd, z_bwd);
  const auto t3 = stats::ks_two_sample(z_hb, fresh);
  r.add_statistic("(i) Z_xi vs mu", "ks", t1.statistic, t1.p_value);
  r.add_statistic("(ii) Z_{q xi} vs Z_{(1-q) xi}", "ks", t2.statistic, t2.p_value);
  r.add_statistic("(iii) Z_{H_{a/2}} vs mu", "ks", t3.statistic, t3.p_value);
  r.add_verdict("(i) Z_xi ~ mu", t1.p_value > 0.01, "ks p > 0.01");
  r.add_verdict("(ii) reversed marginal", t2.p_value > 0.01, "ks p > 0.01");
  r.add_verdict("(iii) Z_{H_{a/2}} ~ mu", t3.p_value > 0.01, "ks p > 0.01");
  r.diagnostics["late_return_fraction"] =
      static_cast<double>(late) / static_cast<double>(2 * n_paths);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace sphere_area
