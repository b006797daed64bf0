#pragma once

// Airy functions Ai and Ai' of real argument.
//
// Inside [-20, 12.5] values come from a table of anchors spaced 0.25 apart
// and a local Taylor expansion of the Airy equation y'' = z y around the
// nearest anchor. Negative anchors are generated by stepping forward from
// the exact values at 0; positive anchors by stepping backward from the
// asymptotic expansion at 12.5 (the stable direction for Ai). Beyond the
// table the classical asymptotic expansions are used.

#include <array>
#include <cmath>
#include <numbers>

namespace sphere_area::airy {

/// Ai(0) = 3^{-2/3} / Gamma(2/3).
inline constexpr double kAiZero = 0.355028053887817239260;
/// Ai'(0) = -3^{-1/3} / Gamma(1/3).
inline constexpr double kAiPrimeZero = -0.258819403792806798405;

struct AiryPair {
  double ai;
  double ai_prime;
};

namespace detail {

inline constexpr double kTableLow = -20.0;
inline constexpr double kTableHigh = 12.5;
inline constexpr double kTableStep = 0.25;
inline constexpr int kTableSize = 131;  // (high - low) / step + 1
inline constexpr int kZeroIndex = 80;   // -low / step

/// Taylor expansion of the solution with y(z0) = y0, y'(z0) = yp0,
/// evaluated at z0 + h.
inline AiryPair taylor_step(double z0, double y0, double yp0, double h) {
  double c_prev = y0;        // c_{n-1}
  double c_cur = yp0;        // c_n
  double hp = h;             // h^n
  double hp_prev = 1.0;      // h^{n-1}
  double value = y0 + yp0 * h;
  double deriv = yp0;
  const double scale = std::fabs(y0) + std::fabs(yp0) + 1e-300;
  double c_prev2 = 0.0;      // c_{n-2}
  int quiet = 0;
  for (int n = 1; n < 200; ++n) {
    // c_{n+1} from the recurrence with index n-1: (n+1) n c_{n+1} = z0 c_{n-1} + c_{n-2}.
    const double c_next = (z0 * c_prev + c_prev2) / (static_cast<double>(n + 1) * n);
    hp_prev = hp;
    hp *= h;
    const double term = c_next * hp;
    const double dterm = (n + 1) * c_next * hp_prev;
    value += term;
    deriv += dterm;
    if (std::fabs(term) + std::fabs(dterm) < 1e-18 * scale) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
    c_prev2 = c_prev;
    c_prev = c_cur;
    c_cur = c_next;
  }
  return {value, deriv};
}

/// u_k and v_k coefficients of the asymptotic expansions.
struct AsymptoticCoefficients {
  static constexpr int kCount = 40;
  std::array<double, kCount> u{};
  std::array<double, kCount> v{};
  AsymptoticCoefficients() {
    u[0] = 1.0;
    v[0] = 1.0;
    for (int k = 1; k < kCount; ++k) {
      u[k] = u[k - 1] * (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) /
             ((2.0 * k - 1) * 216.0 * k);
      v[k] = -u[k] * (6.0 * k + 1) / (6.0 * k - 1);
    }
  }
};

inline const AsymptoticCoefficients& coefficients() {
  static const AsymptoticCoefficients c;
  return c;
}

/// Exponentially scaled pair (Ai e^zeta, Ai' e^zeta), zeta = 2/3 z^{3/2}, large z > 0.
inline AiryPair asymptotic_scaled_positive(double z) {
  const auto& c = coefficients();
  const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
  const double inv = 1.0 / zeta;
  const double q = std::sqrt(std::sqrt(z));
  const double norm = 0.5 / std::sqrt(std::numbers::pi);
  double su = 0.0, sv = 0.0, power = 1.0, last = INFINITY;
  for (int k = 0; k < AsymptoticCoefficients::kCount; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const double tu = sign * c.u[k] * power;
    const double tv = sign * c.v[k] * power;
    const double mag = std::fabs(tu) + std::fabs(tv);
    if (mag > last) break;
    su += tu;
    sv += tv;
    last = mag;
    if (mag < 1e-18) break;
    power *= inv;
  }
  return {norm / q * su, -norm * q * sv};
}

/// Oscillatory expansion for z << 0.
inline AiryPair asymptotic_negative(double z) {
  const auto& c = coefficients();
  const double x = -z;
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const double inv = 1.0 / zeta;
  const double q = std::sqrt(std::sqrt(x));
  const double phase = zeta - std::numbers::pi / 4;
  const double cs = std::cos(phase);
  const double sn = std::sin(phase);
  double u_even = 0.0, u_odd = 0.0, v_even = 0.0, v_odd = 0.0;
  double power = 1.0;
  double last = INFINITY;
  for (int k = 0; k + 1 < AsymptoticCoefficients::kCount; k += 2) {
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    const double te_u = sign * c.u[k] * power;
    const double to_u = sign * c.u[k + 1] * power * inv;
    const double te_v = sign * c.v[k] * power;
    const double to_v = sign * c.v[k + 1] * power * inv;
    const double mag = std::fabs(te_u) + std::fabs(to_u) + std::fabs(te_v) + std::fabs(to_v);
    if (mag > last) break;
    u_even += te_u;
    u_odd += to_u;
    v_even += te_v;
    v_odd += to_v;
    last = mag;
    if (mag < 1e-18) break;
    power *= inv * inv;
  }
  const double norm = 1.0 / std::sqrt(std::numbers::pi);
  return {norm / q * (cs * u_even + sn * u_odd), norm * q * (sn * v_even - cs * v_odd)};
}

struct AnchorTable {
  std::array<AiryPair, kTableSize> anchor{};
  AiryPair backward_at_zero{};

  AnchorTable() {
    anchor[kZeroIndex] = {kAiZero, kAiPrimeZero};
    for (int i = kZeroIndex - 1; i >= 0; --i) {
      const double z0 = kTableLow + (i + 1) * kTableStep;
      const AiryPair& from = anchor[i + 1];
      anchor[i] = taylor_step(z0, from.ai, from.ai_prime, -kTableStep);
    }
    const double zeta = 2.0 / 3.0 * kTableHigh * std::sqrt(kTableHigh);
    const AiryPair top = asymptotic_scaled_positive(kTableHigh);
    const double decay = std::exp(-zeta);
    anchor[kTableSize - 1] = {top.ai * decay, top.ai_prime * decay};
    AiryPair cur = anchor[kTableSize - 1];
    for (int i = kTableSize - 2; i >= kZeroIndex; --i) {
      const double z0 = kTableLow + (i + 1) * kTableStep;
      cur = taylor_step(z0, cur.ai, cur.ai_prime, -kTableStep);
      if (i > kZeroIndex) anchor[i] = cur;
    }
    backward_at_zero = cur;
  }
};

inline const AnchorTable& anchors() {
  static const AnchorTable table;
  return table;
}

/// Direct Maclaurin summation; accurate only for moderate |x|.
inline AiryPair maclaurin(double x) { return taylor_step(0.0, kAiZero, kAiPrimeZero, x); }

}  // namespace detail

/// Ai(x) and Ai'(x) together.
inline AiryPair airy_pair(double x) {
  if (std::isnan(x)) return {x, x};
  if (x > detail::kTableHigh) {
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const AiryPair s = detail::asymptotic_scaled_positive(x);
    const double decay = std::exp(-zeta);
    return {s.ai * decay, s.ai_prime * decay};
  }
  if (x < detail::kTableLow) return detail::asymptotic_negative(x);
  const auto& t = detail::anchors();
  const int i = static_cast<int>(std::lround((x - detail::kTableLow) / detail::kTableStep));
  const double z0 = detail::kTableLow + i * detail::kTableStep;
  const AiryPair& a = t.anchor[i];
  return detail::taylor_step(z0, a.ai, a.ai_prime, x - z0);
}

inline double airy_ai(double x) { return airy_pair(x).ai; }
inline double airy_ai_prime(double x) { return airy_pair(x).ai_prime; }

/// (Ai(z) e^zeta, Ai'(z) e^zeta) with zeta = 2/3 z^{3/2}, for z >= 0.
/// Finite for every z >= 0.
inline AiryPair airy_scaled(double z) {
  if (z > detail::kTableHigh) return detail::asymptotic_scaled_positive(z);
  const AiryPair p = airy_pair(z);
  const double growth = std::exp(2.0 / 3.0 * z * std::sqrt(z));
  return {p.ai * growth, p.ai_prime * growth};
}

}  // namespace sphere_area::airy
