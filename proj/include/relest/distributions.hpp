#pragma once

#include <span>

namespace relest {

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double regularized_beta(double x, double a, double b);

/// Regularized lower incomplete gamma P(a, x): series below a+1, continued fraction above.
double regularized_gamma_p(double a, double x);

enum class Family { kF, kT, kChi2 };

struct DistParams {
  double df1 = 1.0;
  double df2 = 1.0;  // F only
};

/// CDF of F(df1, df2), t(df1) or chi^2(df1) at x. Throws DomainError on df <= 0 or non-finite x.
double dist_cdf(Family family, DistParams params, double x);

double f_cdf(double x, double df1, double df2);
double t_cdf(double x, double df);
double chi2_cdf(double x, double df);

/// Upper tail P(F > x), computed directly rather than as 1 - cdf.
double f_sf(double x, double df1, double df2);
/// Two-sided P(|T| > |t|).
double t_two_sided(double t, double df);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov against a continuous CDF. The sample is copied and sorted.
template <typename Cdf>
KsResult ks_test(std::span<const double> sample, Cdf&& cdf);

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
double kolmogorov_pvalue(double statistic, double n);

}  // namespace relest

#include <algorithm>
#include <vector>

namespace relest {

template <typename Cdf>
KsResult ks_test(std::span<const double> sample, Cdf&& cdf) {
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, f - lo, hi - f});
  }
  return KsResult{d, kolmogorov_pvalue(d, n)};
}

}  // namespace relest
