#include <cmath>

#include <boost/math/special_functions/airy.hpp>
#include <gtest/gtest.h>

#include "sphere_area/airy.hpp"

namespace airy = sphere_area::airy;

namespace {

// Independent Maclaurin oracle in long double: Ai = c1 f - c2 g with
// f = sum 3^k (1/3)_k x^{3k}/(3k)!, g = sum 3^k (2/3)_k x^{3k+1}/(3k+1)!.
std::pair<long double, long double> series_oracle(long double x) {
  const long double c1 = std::pow(3.0L, -2.0L / 3.0L) / std::tgamma(2.0L / 3.0L);
  const long double c2 = std::pow(3.0L, -1.0L / 3.0L) / std::tgamma(1.0L / 3.0L);
  long double f = 0, g = 0, fp = 0, gp = 0;
  long double tf = 1, tg = x;  // current terms of f and g
  for (int k = 0; k < 200; ++k) {
    f += tf;
    g += tg;
    if (k > 0) fp += tf * 3 * k / x;
    gp += tg * (3 * k + 1) / x;
    tf *= x * x * x / ((3.0L * k + 2) * (3.0L * k + 3));
    tg *= x * x * x / ((3.0L * k + 3) * (3.0L * k + 4));
    if (std::fabs(tf) + std::fabs(tg) < 1e-30L) break;
  }
  if (x == 0) gp = 1;
  return {c1 * f - c2 * g, c1 * fp - c2 * gp};
}

// Scale for relative comparisons on the oscillatory side.
double envelope(double x, bool derivative) {
  if (x >= 0) return 0.0;
  return 0.6 * std::pow(-x, derivative ? 0.25 : -0.25);
}

}  // namespace

TEST(Airy, ValuesAtZero) {
  EXPECT_NEAR(airy::airy_ai(0.0), 0.355028053887817, 1e-15);
  EXPECT_NEAR(airy::airy_ai_prime(0.0), -0.258819403792807, 1e-15);
  const auto oracle = series_oracle(0.0L);
  EXPECT_NEAR(airy::kAiZero, static_cast<double>(oracle.first), 1e-16);
  EXPECT_NEAR(airy::kAiPrimeZero, static_cast<double>(oracle.second), 1e-16);
}

TEST(Airy, ValueAtOne) {
  EXPECT_NEAR(airy::airy_ai(1.0), 0.135292416312881, 1e-15);
  EXPECT_NEAR(airy::airy_ai(1.0), static_cast<double>(series_oracle(1.0L).first), 1e-15);
}

TEST(Airy, MatchesSeriesOracleNearOrigin) {
  for (double x = -4.0; x <= 3.0; x += 0.0625) {
    const auto o = series_oracle(x);
    const auto p = airy::airy_pair(x);
    const double sa = std::max(std::fabs(static_cast<double>(o.first)), envelope(x, false));
    const double sp = std::max(std::fabs(static_cast<double>(o.second)), envelope(x, true));
    EXPECT_NEAR(p.ai, static_cast<double>(o.first), 1e-12 * sa) << x;
    EXPECT_NEAR(p.ai_prime, static_cast<double>(o.second), 1e-12 * sp) << x;
  }
}

TEST(Airy, MaclaurinAndTableAgreeOnOverlap) {
  for (double x = -2.0; x <= 2.0; x += 0.01) {
    const auto m = airy::detail::maclaurin(x);
    const auto t = airy::airy_pair(x);
    EXPECT_NEAR(m.ai, t.ai, 1e-12 * std::fabs(t.ai)) << x;
    EXPECT_NEAR(m.ai_prime, t.ai_prime, 1e-12 * std::fabs(t.ai_prime)) << x;
  }
}

TEST(Airy, TableAndAsymptoticAgreeOnOverlap) {
  for (double x = 9.0; x <= 12.5; x += 0.01) {
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const auto a = airy::detail::asymptotic_scaled_positive(x);
    const auto t = airy::airy_pair(x);
    EXPECT_NEAR(t.ai, a.ai * std::exp(-zeta), 1e-12 * std::fabs(t.ai)) << x;
    EXPECT_NEAR(t.ai_prime, a.ai_prime * std::exp(-zeta), 1e-12 * std::fabs(t.ai_prime)) << x;
  }
  for (double x = -20.0; x >= -22.0; x -= 0.01) {
    const auto a = airy::detail::asymptotic_negative(x);
    const auto t = airy::detail::taylor_step(-20.0, airy::detail::anchors().anchor[0].ai,
                                             airy::detail::anchors().anchor[0].ai_prime, x + 20.0);
    EXPECT_NEAR(t.ai, a.ai, 1e-12 * envelope(x, false)) << x;
    EXPECT_NEAR(t.ai_prime, a.ai_prime, 1e-12 * envelope(x, true)) << x;
  }
}

TEST(Airy, BackwardRecurrenceReachesExactZeroValues) {
  const auto& t = airy::detail::anchors();
  EXPECT_NEAR(t.backward_at_zero.ai, airy::kAiZero, 1e-14);
  EXPECT_NEAR(t.backward_at_zero.ai_prime, airy::kAiPrimeZero, 1e-14);
}

TEST(Airy, AgreesWithBoostInside) {
  for (double x = -20.0; x <= 20.0; x += 0.0371) {
    const auto p = airy::airy_pair(x);
    const double a = boost::math::airy_ai(x);
    const double ap = boost::math::airy_ai_prime(x);
    EXPECT_NEAR(p.ai, a, 1e-12 * std::max(std::fabs(a), envelope(x, false))) << x;
    EXPECT_NEAR(p.ai_prime, ap, 1e-12 * std::max(std::fabs(ap), envelope(x, true))) << x;
  }
}

TEST(Airy, AgreesWithBoostOutside) {
  for (double x : {-60.0, -45.5, -30.0, -20.5, 20.5, 30.0, 45.5, 60.0, 90.0}) {
    const auto p = airy::airy_pair(x);
    const double a = boost::math::airy_ai(x);
    const double ap = boost::math::airy_ai_prime(x);
    EXPECT_NEAR(p.ai, a, 1e-9 * std::max(std::fabs(a), envelope(x, false))) << x;
    EXPECT_NEAR(p.ai_prime, ap, 1e-9 * std::max(std::fabs(ap), envelope(x, true))) << x;
  }
}

TEST(Airy, SatisfiesTheAiryEquation) {
  const double h = 1e-3;
  for (double x = -15.0; x <= 10.0; x += 0.173) {
    const double d2 = (airy::airy_ai_prime(x + h) - airy::airy_ai_prime(x - h)) / (2 * h);
    EXPECT_NEAR(d2, x * airy::airy_ai(x), 1e-5 * (1.0 + std::fabs(x))) << x;
  }
}

TEST(Airy, UnderflowsGracefully) {
  EXPECT_EQ(airy::airy_ai(200.0), 0.0);
  const auto s = airy::airy_scaled(200.0);
  EXPECT_TRUE(std::isfinite(s.ai));
  EXPECT_GT(s.ai, 0.0);
  EXPECT_LT(s.ai_prime, 0.0);
}
