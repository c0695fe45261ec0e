#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

#include "relest/core.hpp"
#include "relest/distributions.hpp"
#include "relest/error.hpp"
#include "relest/rng.hpp"

using namespace relest;

TEST(IncompleteBeta, MatchesBoostOverGrid) {
  for (double a : {0.5, 1.0, 2.5, 10.0, 60.0}) {
    for (double b : {0.5, 1.0, 3.0, 25.0, 400.0}) {
      for (double x : {0.0, 1e-6, 0.05, 0.3, 0.5, 0.77, 0.999, 1.0}) {
        EXPECT_NEAR(regularized_beta(x, a, b), boost::math::ibeta(a, b, x), 1e-12)
            << "a=" << a << " b=" << b << " x=" << x;
      }
    }
  }
}

TEST(IncompleteGamma, MatchesBoostOverGrid) {
  for (double a : {0.5, 1.0, 2.0, 7.5, 50.0, 300.0}) {
    for (double x : {0.0, 0.01, 0.9, 3.0, 10.0, 49.0, 120.0, 400.0}) {
      EXPECT_NEAR(regularized_gamma_p(a, x), boost::math::gamma_p(a, x), 1e-12) << "a=" << a << " x=" << x;
    }
  }
}

TEST(Cdf, ClosedForms) {
  for (double df : {1.0, 3.0, 30.0}) EXPECT_DOUBLE_EQ(t_cdf(0.0, df), 0.5);
  EXPECT_EQ(chi2_cdf(0.0, 4.0), 0.0);
  EXPECT_NEAR(t_cdf(1.0, 1.0), 0.5 + std::atan(1.0) / std::numbers::pi, 1e-14);
  EXPECT_NEAR(t_cdf(1.0, 1.0), 0.75, 1e-14);
  // chi^2 with 2 df is exponential with mean 2.
  EXPECT_NEAR(chi2_cdf(3.0, 2.0), 1.0 - std::exp(-1.5), 1e-14);
}

TEST(Cdf, MatchesBoostDistributions) {
  for (double df1 : {1.0, 2.0, 5.0, 40.0}) {
    for (double df2 : {1.0, 4.0, 17.0, 200.0}) {
      const boost::math::fisher_f f(df1, df2);
      for (double x : {0.0, 0.1, 0.9, 1.0, 2.5, 10.0, 100.0}) {
        EXPECT_NEAR(f_cdf(x, df1, df2), boost::math::cdf(f, x), 1e-10);
        EXPECT_NEAR(f_sf(x, df1, df2), boost::math::cdf(boost::math::complement(f, x)), 1e-10);
      }
    }
  }
  for (double df : {1.0, 2.0, 7.0, 50.0, 1000.0}) {
    const boost::math::students_t t(df);
    const boost::math::chi_squared c(df);
    for (double x : {-30.0, -2.0, -0.3, 0.0, 0.7, 1.96, 12.0}) {
      EXPECT_NEAR(t_cdf(x, df), boost::math::cdf(t, x), 1e-10);
      EXPECT_NEAR(dist_cdf(Family::kT, {df, 1.0}, x), boost::math::cdf(t, x), 1e-10);
      if (x >= 0.0) EXPECT_NEAR(chi2_cdf(x * x, df), boost::math::cdf(c, x * x), 1e-10);
    }
  }
}

TEST(Cdf, MonotoneAndBounded) {
  double prev_f = -1.0;
  double prev_t = -1.0;
  double prev_c = -1.0;
  for (double x = -5.0; x <= 40.0; x += 0.05) {
    const double f = f_cdf(std::max(0.0, x), 3.0, 11.0);
    const double t = t_cdf(x, 4.0);
    const double c = chi2_cdf(std::max(0.0, x), 6.0);
    for (double p : {f, t, c}) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
    EXPECT_GE(f, prev_f);
    EXPECT_GE(t, prev_t);
    EXPECT_GE(c, prev_c);
    prev_f = f;
    prev_t = t;
    prev_c = c;
  }
}

TEST(Cdf, DomainErrors) {
  EXPECT_THROW(t_cdf(1.0, 0.0), DomainError);
  EXPECT_THROW(f_cdf(1.0, -1.0, 2.0), DomainError);
  EXPECT_THROW(chi2_cdf(std::nan(""), 2.0), DomainError);
}

TEST(TwoSided, SymmetricAndMatchesTail) {
  EXPECT_DOUBLE_EQ(t_two_sided(0.0, 5.0), 1.0);
  EXPECT_NEAR(t_two_sided(2.0, 9.0), t_two_sided(-2.0, 9.0), 1e-15);
  EXPECT_NEAR(t_two_sided(2.0, 9.0), 2.0 * (1.0 - t_cdf(2.0, 9.0)), 1e-12);
}

TEST(Kolmogorov, AsymptoticCriticalValues) {
  // With large n the small-sample correction vanishes; lambda = 1.3581 and 1.6276
  // are the classical 5% and 1% critical points.
  const double n = 1e12;
  const double scale = std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n);
  EXPECT_NEAR(kolmogorov_pvalue(1.3581 / scale, n), 0.05, 2e-4);
  EXPECT_NEAR(kolmogorov_pvalue(1.6276 / scale, n), 0.01, 1e-4);
  EXPECT_NEAR(kolmogorov_pvalue(0.0, n), 1.0, 1e-12);
}

TEST(Kolmogorov, ContinuousAcrossSeriesSwitch) {
  const double n = 1e12;
  const double scale = std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n);
  const double lo = kolmogorov_pvalue((1.18 - 1e-12) / scale, n);
  const double hi = kolmogorov_pvalue((1.18 + 1e-12) / scale, n);
  EXPECT_NEAR(lo, hi, 1e-10);
}

TEST(KsTest, AcceptsCorrectDistribution) {
  NormalSampler normal(Rng(RngSeed{12}));
  std::vector<double> xs(5000);
  for (double& x : xs) x = normal();
  const KsResult r = ks_test(xs, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  EXPECT_GT(r.p_value, 0.01);
}

TEST(KsTest, RejectsShiftedDistribution) {
  NormalSampler normal(Rng(RngSeed{12}));
  std::vector<double> xs(5000);
  for (double& x : xs) x = normal() + 0.2;
  const KsResult r = ks_test(xs, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  EXPECT_LT(r.p_value, 1e-6);
}

TEST(KsTest, PValuesUniformUnderNull) {
  // p-values of repeated null tests should themselves be uniform.
  Rng rng(RngSeed{31});
  std::vector<double> ps;
  for (int t = 0; t < 400; ++t) {
    std::vector<double> xs(200);
    for (double& x : xs) x = rng.uniform();
    ps.push_back(ks_test(xs, [](double x) { return x; }).p_value);
  }
  EXPECT_GT(ks_test(ps, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value, 0.01);
}
