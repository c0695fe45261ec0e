#pragma once

#include <map>
#include <string>

#include "relest/core.hpp"

namespace relest {

enum class ItemKind { kBinary, kReal };

/// n subjects x k items. `kind` is derived from the scores at construction.
class ItemResponseMatrix {
 public:
  /// Throws InputError when n < 2, k < 2, or any score is non-finite.
  explicit ItemResponseMatrix(Matrix scores);

  Eigen::Index n() const noexcept { return scores_.rows(); }
  Eigen::Index k() const noexcept { return scores_.cols(); }
  ItemKind kind() const noexcept { return kind_; }
  const Matrix& scores() const noexcept { return scores_; }

 private:
  Matrix scores_;
  ItemKind kind_;
};

enum class VarianceDivisor { kPopulation, kSample };

struct ItemStats {
  Vector p;
  double p_bar = 0.0;
  double sigma_x2 = 0.0;
};

enum class ReliabilityMethod { kKr20, kKr21, kDefinitional, kEfaOmega, kCovMle, kIcc };

const char* to_string(ReliabilityMethod m) noexcept;

struct ReliabilityReport {
  double coefficient = 0.0;
  ReliabilityMethod method = ReliabilityMethod::kDefinitional;
  std::map<std::string, std::string> diagnostics;
};

/// Column proportions and the variance of row sums. Requires binary scores.
ItemStats item_stats(const ItemResponseMatrix& m,
                     VarianceDivisor divisor = VarianceDivisor::kPopulation);

/// Kuder-Richardson 20. Unclamped; a diagnostic is attached outside [0, 1].
/// Throws DomainError when all subjects have the same sum score.
ReliabilityReport kr20(const ItemResponseMatrix& m,
                       VarianceDivisor divisor = VarianceDivisor::kPopulation);

/// Kuder-Richardson 21 (equal item difficulty); never exceeds kr20.
ReliabilityReport kr21(const ItemResponseMatrix& m,
                       VarianceDivisor divisor = VarianceDivisor::kPopulation);

/// r_xx = 1 - sigma_eps2 / v_x.
ReliabilityReport reliability_definitional(double v_x, double sigma_eps2);

struct MeanVarianceDecomposition {
  Eigen::Index k = 0;
  double sigma2 = 0.0;
  double cov_sum = 0.0;
  double var_of_mean = 0.0;
};

/// Var(mean of k items) = sigma2/k + (2/k^2) * sum_{i<j} Cov(x_i, x_j).
MeanVarianceDecomposition variance_of_mean(double sigma2, Eigen::Index k, double cov_sum);

/// Var(sum_i beta_i x_i) = beta^T Sigma beta.
double linear_combination_variance(const Vector& beta, const SymMatrix& sigma);

}  // namespace relest
