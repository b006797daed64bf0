#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "sphere_area/random.hpp"
#include "sphere_area/stats.hpp"

namespace stats = sphere_area::stats;
using sphere_area::RandomStream;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t stream, double shift = 0.0) {
  RandomStream rng(99, stream);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.normal() + shift;
  return out;
}

}  // namespace

TEST(Kolmogorov, KnownValues) {
  // Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2)
  EXPECT_NEAR(stats::kolmogorov_q(1.3580986393225505), 0.05, 1e-10);
  EXPECT_NEAR(stats::kolmogorov_q(1.6276236115189502), 0.01, 1e-10);
  EXPECT_NEAR(stats::kolmogorov_q(0.5), 0.9639452436648751, 1e-12);
  EXPECT_EQ(stats::kolmogorov_q(0.0), 1.0);
  double prev = 1.0;
  for (double l = 0.05; l < 3.0; l += 0.05) {
    const double q = stats::kolmogorov_q(l);
    EXPECT_LE(q, prev);
    prev = q;
  }
}

TEST(KolmogorovSmirnov, HandComputedStatistic) {
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) a.push_back(i);
  for (int i = 0; i < 30; ++i) b.push_back(i + 10);
  const auto r = stats::ks_two_sample(a, b);
  EXPECT_NEAR(r.statistic, 10.0 / 30.0, 1e-15);
  const auto same = stats::ks_two_sample(a, a);
  EXPECT_EQ(same.statistic, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
}

TEST(KolmogorovSmirnov, TiesAcrossSamples) {
  std::vector<double> a(40, 1.0), b(40, 1.0);
  for (int i = 0; i < 20; ++i) b[i] = 2.0;
  EXPECT_NEAR(stats::ks_two_sample(a, b).statistic, 0.5, 1e-15);
}

TEST(KolmogorovSmirnov, RejectsSmallSamples) {
  std::vector<double> a(24, 0.0), b(100, 0.0);
  EXPECT_THROW(stats::ks_two_sample(a, b), sphere_area::SizeError);
  EXPECT_THROW(stats::ks_one_sample(a, [](double) { return 0.5; }), sphere_area::SizeError);
}

TEST(KolmogorovSmirnov, DetectsShift) {
  const auto r = stats::ks_two_sample(normals(2000, 1), normals(2000, 2, 0.25));
  EXPECT_LT(r.p_value, 1e-6);
}

TEST(KolmogorovSmirnov, NullCalibration) {
  // Under the null, p < 0.05 should happen about 5 times in 100.
  int rejections = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto r = stats::ks_two_sample(normals(500, 1000 + 2 * rep), normals(700, 1001 + 2 * rep));
    rejections += r.p_value < 0.05;
  }
  EXPECT_LE(rejections, 13);
  int one = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto r = stats::ks_one_sample(normals(400, 5000 + rep),
                                        [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
    one += r.p_value < 0.05;
  }
  EXPECT_LE(one, 13);
}

TEST(ChiSquare, MatchesBoostDistribution) {
  for (double k : {1.0, 4.0, 17.0}) {
    boost::math::chi_squared_distribution<double> d(k);
    for (double x : {0.5, 3.0, 20.0}) {
      EXPECT_NEAR(stats::chi_square_sf(x, k), boost::math::cdf(boost::math::complement(d, x)), 1e-14);
    }
  }
  EXPECT_EQ(stats::chi_square_sf(0.0, 3.0), 1.0);
  EXPECT_THROW(stats::chi_square_sf(1.0, 0.0), sphere_area::DomainError);
}

TEST(Estimators, MeanRatioBatchMedian) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto m = stats::mean_and_error(x);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_DOUBLE_EQ(stats::median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(stats::median({4, 1, 3, 2}), 2.5);

  // ratio of exactly proportional samples has zero delta-method error
  const std::vector<double> y{2, 4, 6, 8};
  const auto r = stats::ratio_of_means(y, x);
  EXPECT_DOUBLE_EQ(r.mean, 2.0);
  EXPECT_NEAR(r.std_error, 0.0, 1e-12);

  std::vector<double> series(1000);
  for (std::size_t i = 0; i < series.size(); ++i) series[i] = static_cast<double>(i / 100);
  const auto b = stats::batch_means(series, 10);
  EXPECT_DOUBLE_EQ(b.mean, 4.5);
  EXPECT_THROW(stats::batch_means(series, 1), sphere_area::SizeError);
}

TEST(Estimators, RatioErrorIsCalibrated) {
  // Coverage of the delta-method interval over independent replications.
  int covered = 0;
  for (int rep = 0; rep < 200; ++rep) {
    RandomStream rng(5, rep);
    std::vector<double> num(400), den(400);
    for (std::size_t i = 0; i < num.size(); ++i) {
      den[i] = 1.0 + 0.3 * rng.normal();
      num[i] = 3.0 * den[i] + 0.5 * rng.normal();
    }
    const auto r = stats::ratio_of_means(num, den);
    covered += std::fabs(r.mean - 3.0) < 1.96 * r.std_error;
  }
  EXPECT_GE(covered, 176);
}
