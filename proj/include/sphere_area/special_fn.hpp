#pragma once

// Map-Airy density, the spectrally positive 3/2-stable density p_t, the
// drifts h and b, and the invariant density theta of dZ = 4 dB + b(Z) dt.
//
// Everything is expressed through the scaled combination
//   S(v) = -(v Ai(v^2) + Ai'(v^2)) exp(2/3 |v|^3) > 0,
// which stays O(1) where Ai(v^2) itself under- or overflows, and through
//   kappa(v) = Ai(v^2) / (v Ai(v^2) + Ai'(v^2)) < 0.
// With these, A(v) = 2 S(v) exp(-4/3 |v|^3 [v < 0]) and A'(v)/A(v) = 4 v^2 + kappa(v).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "sphere_area/airy.hpp"
#include "sphere_area/errors.hpp"
#include "sphere_area/quadrature.hpp"

namespace sphere_area {

/// 6^{-1/3}, the scale between p_1 and the map-Airy density.
inline const double kAlpha = std::cbrt(1.0 / 6.0);
/// Fourier constant c0 in exp(-c0 t |u|^{3/2} (1 + i sgn u)).
inline const double kFourierC0 = 1.0 / std::sqrt(3.0);

struct DensityPair {
  double p;
  double p_prime;
};

/// log p and d/dx log p; finite where p itself underflows.
struct LogDensity {
  double log_p;
  double dlog_p;
};

namespace detail {

inline constexpr double kSeriesThreshold = 3.5;

/// Coefficients of S(v) = sqrt(v)/(2 sqrt(pi)) * sum_{k>=1} s_k zeta^{-k} for large v > 0.
struct MapAiryTailSeries {
  static constexpr int kCount = 30;
  std::array<double, kCount + 1> s{};
  MapAiryTailSeries() {
    const auto& c = airy::detail::coefficients();
    for (int k = 1; k <= kCount; ++k) {
      s[k] = ((k % 2 == 1) ? 1.0 : -1.0) * c.u[k] * 12.0 * k / (6.0 * k - 1);
    }
  }
};

inline const MapAiryTailSeries& tail_series() {
  static const MapAiryTailSeries t;
  return t;
}

/// sum_{k>=1} s_k w^{k-1}, truncated at the smallest term.
inline double tail_sum(double w) {
  const auto& t = tail_series();
  double sum = 0.0, power = 1.0, last = INFINITY;
  for (int k = 1; k <= MapAiryTailSeries::kCount; ++k) {
    const double term = t.s[k] * power;
    if (std::fabs(term) > last) break;
    sum += term;
    last = std::fabs(term);
    if (last < 1e-18 * std::fabs(sum)) break;
    power *= w;
  }
  return sum;
}

struct ScaledCombination {
  double log_s;   // log S(v)
  double kappa;   // Ai(v^2) / (v Ai(v^2) + Ai'(v^2))
};

inline ScaledCombination scaled_combination(double v) {
  const double log_norm = -std::log(2.0 * std::sqrt(std::numbers::pi));
  if (v >= kSeriesThreshold) {
    // 1/zeta without forming v^3 (no overflow for huge v).
    const double w = 1.5 / v / v / v;
    const double sum = tail_sum(w);
    const double log_s = log_norm + 0.5 * std::log(v) + std::log(1.5) - 3.0 * std::log(v) +
                         std::log(sum);
    const double ai_s = airy::detail::asymptotic_scaled_positive(v * v).ai;
    return {log_s, -std::exp(std::log(ai_s) - log_s)};
  }
  const airy::AiryPair sc = airy::airy_scaled(v * v);
  const double s_val = -(v * sc.ai + sc.ai_prime);
  return {std::log(s_val), -sc.ai / s_val};
}

}  // namespace detail

/// kappa(v) = Ai(v^2) / (v Ai(v^2) + Ai'(v^2)); strictly negative.
inline double kappa(double v) { return detail::scaled_combination(v).kappa; }

/// d kappa / dv = 2 v - 4 v^2 kappa - kappa^2.
inline double kappa_prime(double v) {
  const double k = kappa(v);
  return 2.0 * v - 4.0 * v * v * k - k * k;
}

/// log of the map-Airy density A(v) = -2 e^{2v^3/3} (v Ai(v^2) + Ai'(v^2)).
inline double map_airy_log(double v) {
  if (!std::isfinite(v)) throw DomainError("map_airy_log: argument must be finite");
  const auto sc = detail::scaled_combination(v);
  double out = std::numbers::ln2 + sc.log_s;
  if (v < 0) out -= 4.0 / 3.0 * (-v) * v * v;
  if (!std::isfinite(out)) {
    std::ostringstream msg;
    msg << "map_airy_log: log-density not representable at v = " << v;
    throw RangeError(msg.str());
  }
  return out;
}

/// A(v); underflows to 0 below v ~ -8.2 (use map_airy_log there).
inline double map_airy_A(double v) { return std::exp(map_airy_log(v)); }

/// A'(v) / A(v).
inline double map_airy_dlog(double v) { return 4.0 * v * v + kappa(v); }

/// A'(v) = A(v) (4 v^2 + kappa(v)).
inline double map_airy_prime(double v) {
  const auto sc = detail::scaled_combination(v);
  const double a = std::exp(map_airy_log(v));
  return a * (4.0 * v * v + sc.kappa);
}

/// Integral of A over [v, infinity) for v >= 3.5, by termwise integration of the tail series.
inline double map_airy_upper_tail(double v) {
  if (v < detail::kSeriesThreshold) throw DomainError("map_airy_upper_tail: v must be >= 3.5");
  const auto& t = detail::tail_series();
  // A = 2 S, S = sqrt(v)/(2 sqrt(pi)) sum s_k (3/2)^k v^{-3k}.
  double sum = 0.0, last = INFINITY;
  double factor = 1.5 / (v * v * v);
  double power = factor;
  for (int k = 1; k <= detail::MapAiryTailSeries::kCount; ++k) {
    const double term = t.s[k] * power / (3.0 * k - 1.5);
    if (std::fabs(term) > last) break;
    sum += term;
    last = std::fabs(term);
    if (last < 1e-18 * std::fabs(sum)) break;
    power *= factor;
  }
  return v * std::sqrt(v) * sum / std::sqrt(std::numbers::pi);
}

/// log p_1 and its log-derivative.
inline LogDensity stable_log_density_unit(double y) {
  const double v = kAlpha * y;
  const auto sc = detail::scaled_combination(v);
  double log_a = std::numbers::ln2 + sc.log_s;
  if (v < 0) log_a -= 4.0 / 3.0 * (-v) * v * v;
  return {std::log(kAlpha) + log_a, kAlpha * (4.0 * v * v + sc.kappa)};
}

/// log p_t(x) and d/dx log p_t(x), routed through p_1.
inline LogDensity stable_log_density(double t, double x) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("stable_log_density: t must be > 0");
  const double s = std::pow(t, -2.0 / 3.0);
  const LogDensity unit = stable_log_density_unit(s * x);
  return {std::log(s) + unit.log_p, s * unit.dlog_p};
}

/// p_1(y) and p_1'(y).
inline DensityPair stable_density_unit(double y) {
  const LogDensity l = stable_log_density_unit(y);
  const double p = std::exp(l.log_p);
  return {p, p * l.dlog_p};
}

/// p_t(x) = t^{-2/3} p_1(t^{-2/3} x), p_t'(x) = t^{-4/3} p_1'(t^{-2/3} x).
inline DensityPair stable_density(double t, double x) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("stable_density: t must be > 0");
  const double s = std::pow(t, -2.0 / 3.0);
  const DensityPair unit = stable_density_unit(s * x);
  return {s * unit.p, s * s * unit.p_prime};
}

namespace detail {

/// p_1'(y)/p_1(y) in extended precision.
inline long double unit_ratio(long double y) {
  const long double alpha = 1.0L / std::cbrt(6.0L);
  const long double v = alpha * y;
  return alpha * (4.0L * v * v + static_cast<long double>(kappa(static_cast<double>(v))));
}

}  // namespace detail

/// h(t, x) = -8 t p_t'(-x/2) / p_t(-x/2) + 4/3 x^2 / t.
/// The two terms nearly cancel for x >> 0, so the sum is formed in long double.
inline double drift_h(double t, double x) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("drift_h: t must be > 0");
  const long double tl = t;
  const long double s = std::pow(tl, -2.0L / 3.0L);
  const long double y = -static_cast<long double>(x) / 2.0L;
  const long double ratio = s * detail::unit_ratio(s * y);
  const long double xl = x;
  return static_cast<double>(-8.0L * tl * ratio + 4.0L / 3.0L * xl * xl / tl);
}

/// Closed form h(t, x) = -8 * 6^{-1/3} t^{1/3} kappa(-6^{-1/3} t^{-2/3} x / 2).
inline double drift_h_airy(double t, double x) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("drift_h_airy: t must be > 0");
  return -8.0 * kAlpha * std::cbrt(t) * kappa(-kAlpha * std::pow(t, -2.0 / 3.0) * x / 2.0);
}

/// b(z) = 8 p_1'(z/2) / p_1(z/2) - 2/3 z^2.
inline double drift_b(double z) {
  const long double zl = z;
  return static_cast<double>(8.0L * detail::unit_ratio(zl / 2.0L) - 2.0L / 3.0L * zl * zl);
}

/// g(z) = 2/3 z^2 - b(z) = -8 * 6^{-1/3} kappa(6^{-1/3} z / 2) > 0, so that
/// h(L, Ldot) = L^{1/3} g(-Ldot / L^{2/3}).
inline double drift_g(double z) { return -8.0 * kAlpha * kappa(kAlpha * z / 2.0); }

inline double drift_g_prime(double z) {
  return -4.0 * kAlpha * kAlpha * kappa_prime(kAlpha * z / 2.0);
}

/// Cubic Hermite table of g on [-48, 48]; exact evaluation outside.
class DriftTable {
 public:
  static constexpr double kLow = -48.0;
  static constexpr double kHigh = 48.0;
  static constexpr double kStep = 1.0 / 128.0;

  DriftTable() {
    const int n = static_cast<int>((kHigh - kLow) / kStep) + 1;
    g_.resize(n);
    dg_.resize(n);
    for (int i = 0; i < n; ++i) {
      const double z = kLow + i * kStep;
      g_[i] = drift_g(z);
      dg_[i] = drift_g_prime(z) * kStep;
    }
  }

  static const DriftTable& instance() {
    static const DriftTable table;
    return table;
  }

  double g(double z) const {
    if (!(z >= kLow && z < kHigh)) return drift_g(z);
    const double u = (z - kLow) / kStep;
    const auto i = static_cast<std::size_t>(u);
    const double s = u - static_cast<double>(i);
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * g_[i] + h10 * dg_[i] + h01 * g_[i + 1] + h11 * dg_[i + 1];
  }

  /// b(z) = 2/3 z^2 - g(z).
  double b(double z) const { return 2.0 / 3.0 * z * z - g(z); }

 private:
  std::vector<double> g_;
  std::vector<double> dg_;
};

// ---------------------------------------------------------------------------
// Invariant density theta(x) = C p_1(x/2)^2 exp(-x^3/36).

namespace detail {

/// Integration window for theta; the mass outside is below exp(-700).
inline constexpr double kThetaLow = -30.0;
inline constexpr double kThetaHigh = 30.0;

inline double theta_log_unnormalized(double x) {
  return 2.0 * stable_log_density_unit(x / 2.0).log_p - x * x * x / 36.0;
}

inline double integrate_theta_moment(int power) {
  // Split at the bulk so each panel sees a smooth integrand.
  static constexpr double kBreaks[] = {kThetaLow, -12.0, -6.0, -3.0, 0.0, 3.0, 6.0, 12.0, kThetaHigh};
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < std::size(kBreaks); ++i) {
    quad::QuadratureSpec spec{kBreaks[i], kBreaks[i + 1], 1e-16, 1e-13, 2000};
    total += quad::integrate(
                 [power](double x) {
                   return std::pow(x, power) * std::exp(theta_log_unnormalized(x));
                 },
                 spec)
                 .value;
  }
  return total;
}

struct ThetaConstants {
  double log_c;
  double mean;
  ThetaConstants() {
    const double z = integrate_theta_moment(0);
    log_c = -std::log(z);
    mean = integrate_theta_moment(1) / z;
  }
};

inline const ThetaConstants& theta_constants() {
  static const ThetaConstants c;
  return c;
}

}  // namespace detail

/// Normalizing constant C of theta.
inline double theta_constant() { return std::exp(detail::theta_constants().log_c); }

inline double theta_log(double x) {
  return detail::theta_constants().log_c + detail::theta_log_unnormalized(x);
}

inline double theta(double x) { return std::exp(theta_log(x)); }

/// d/dx log theta(x) = (p_1'/p_1)(x/2) - x^2/12 = b(x)/8.
inline double theta_dlog(double x) {
  return stable_log_density_unit(x / 2.0).dlog_p - x * x / 12.0;
}

inline double theta_prime(double x) { return theta(x) * theta_dlog(x); }

/// Mean of the invariant law pi(dx) = theta(x) dx.
inline double pi_mean() { return detail::theta_constants().mean; }

namespace detail {

/// CDF of pi tabulated on [-30, 15] and interpolated by cubic Hermite (slope theta).
class PiCdfTable {
 public:
  static constexpr double kLow = -30.0;
  static constexpr double kHigh = 15.0;
  static constexpr double kStep = 0.01;

  PiCdfTable() {
    const int n = static_cast<int>(std::lround((kHigh - kLow) / kStep)) + 1;
    cdf_.resize(n);
    dens_.resize(n);
    cdf_[0] = 0.0;
    dens_[0] = theta(kLow);
    for (int i = 1; i < n; ++i) {
      const double a = kLow + (i - 1) * kStep;
      const double b = kLow + i * kStep;
      quad::QuadratureSpec spec{a, b, 1e-18, 1e-13, 200};
      cdf_[i] = cdf_[i - 1] + quad::integrate([](double x) { return theta(x); }, spec).value;
      dens_[i] = theta(b);
    }
  }

  double cdf(double x) const {
    if (x <= kLow) return 0.0;
    if (x >= kHigh) return 1.0;
    const double u = (x - kLow) / kStep;
    const auto i = std::min(static_cast<std::size_t>(u), cdf_.size() - 2);
    const double s = u - static_cast<double>(i);
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * cdf_[i] + (s3 - 2 * s2 + s) * kStep * dens_[i] +
           (-2 * s3 + 3 * s2) * cdf_[i + 1] + (s3 - s2) * kStep * dens_[i + 1];
  }

  static const PiCdfTable& instance() {
    static const PiCdfTable t;
    return t;
  }

 private:
  std::vector<double> cdf_;
  std::vector<double> dens_;
};

}  // namespace detail

/// P(X <= x) for X ~ pi.
inline double pi_cdf(double x) { return detail::PiCdfTable::instance().cdf(x); }

// ---------------------------------------------------------------------------
// Transform check.

struct ComplexPairReport {
  double t;
  double u;
  std::complex<double> fourier_numeric;
  std::complex<double> fourier_target;
  bool has_laplace;
  double laplace_numeric;
  double laplace_target;
  double lower_cutoff;
  double upper_cutoff;
  double tail_bound;
};

/// Numerically transforms p_t over a truncated window and compares with the
/// closed forms exp(-c0 t |u|^{3/2} (1 + i sgn u)) and exp(t sqrt(2/3) u^{3/2}).
/// The window is chosen so that the mass of p_t outside it is below abs_tol / 2.
inline ComplexPairReport transform_check(double t, double u, double abs_tol = 1e-6) {
  if (!(t > 0) || !std::isfinite(t)) throw DomainError("transform_check: t must be > 0");
  if (!(abs_tol > 0)) throw DomainError("transform_check: abs_tol must be > 0");
  const double scale = std::pow(t, 2.0 / 3.0);
  // Left tail of p_1 below y = -20 is below exp(-1700).
  const double y_low = -20.0;
  double y_high = 8.0;
  while (map_airy_upper_tail(kAlpha * y_high) > abs_tol / 4) y_high *= 1.25;
  const double tail = map_airy_upper_tail(kAlpha * y_high) + 1e-300;
  const double lo = scale * y_low;
  const double hi = scale * y_high;

  auto density = [t](double x) {
    const LogDensity l = stable_log_density(t, x);
    return std::exp(l.log_p);
  };
  // Panels a few oscillation periods wide keep the adaptive rule efficient.
  std::vector<double> breaks{lo};
  const double width = (u != 0.0) ? std::min(8.0 * std::numbers::pi / std::fabs(u), 4.0 * scale)
                                   : 4.0 * scale;
  for (double b = lo + width; b < hi; b += width) breaks.push_back(b);
  breaks.push_back(hi);

  const double panel_tol = abs_tol / 4 / static_cast<double>(breaks.size());
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    quad::QuadratureSpec spec{breaks[i], breaks[i + 1], panel_tol, 1e-12, 2000};
    re += quad::integrate([&](double x) { return std::cos(u * x) * density(x); }, spec).value;
    if (u != 0.0) {
      im += quad::integrate([&](double x) { return std::sin(u * x) * density(x); }, spec).value;
    }
  }
  ComplexPairReport out{};
  out.t = t;
  out.u = u;
  out.fourier_numeric = {re, im};
  const double mag = kFourierC0 * t * std::pow(std::fabs(u), 1.5);
  const double sgn = (u > 0) - (u < 0);
  out.fourier_target = std::exp(std::complex<double>(-mag, -mag * sgn));
  out.lower_cutoff = lo;
  out.upper_cutoff = hi;
  out.tail_bound = tail;
  out.has_laplace = u > 0;
  if (out.has_laplace) {
    double lap = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      quad::QuadratureSpec spec{breaks[i], breaks[i + 1], panel_tol, 1e-13, 2000};
      lap += quad::integrate(
                 [&](double x) {
                   const LogDensity l = stable_log_density(t, x);
                   return std::exp(l.log_p - u * x);
                 },
                 spec)
                 .value;
    }
    out.laplace_numeric = lap;
    out.laplace_target = std::exp(t * std::sqrt(2.0 / 3.0) * std::pow(u, 1.5));
  }
  return out;
}

}  // namespace sphere_area
