#pragma once

#include <map>
#include <string>
#include <variant>

#include "relest/classical.hpp"
#include "relest/core.hpp"

namespace relest {

/// Loadings A (p x m) with derived row/column summaries.
///
/// `communalities` are row sums of squared loadings (variance of X_i explained by the
/// common factors); `factor_contributions` are column sums (S_j). Both are exposed.
struct FactorModel {
  Matrix loadings;
  Vector eigenvalues;  // all p eigenvalues of the analysed matrix, descending
  Matrix rotation;     // m x m, accumulated orthogonal rotation
  Vector communalities;
  Vector factor_contributions;
  Vector uniquenesses;
  std::map<std::string, std::string> diagnostics;

  Eigen::Index p() const noexcept { return loadings.rows(); }
  Eigen::Index m() const noexcept { return loadings.cols(); }

  /// Builds a model from loadings alone (eigenvalues left empty, rotation = I).
  static FactorModel from_loadings(Matrix loadings);
  /// Recomputes communalities, contributions and uniquenesses from the loadings.
  void refresh();
};

/// Pearson correlations. Throws DomainError naming the first zero-variance column.
SymMatrix correlation_matrix(const SampleSet& s);

struct KaiserRule {};
struct FixedFactors {
  Eigen::Index m = 1;
};
using RetentionRule = std::variant<KaiserRule, FixedFactors>;

/// Eigen-extraction: loadings a_ij = v_ij * sqrt(lambda_j) for retained columns.
/// The Kaiser rule keeps lambda >= 1 (with 1e-10 slack for round-off).
/// Column signs are fixed so each loading column has a non-negative sum.
FactorModel extract_factors(const SymMatrix& r, RetentionRule rule = KaiserRule{});

/// Post-multiplies the loadings by t. Throws InputError unless t^T t = I to 1e-10.
FactorModel rotate(const FactorModel& model, const Matrix& t);

/// Raw varimax criterion sum_j [ mean_i a_ij^4 - (mean_i a_ij^2)^2 ].
double varimax_criterion(const Matrix& loadings);

struct VarimaxOptions {
  int max_sweeps = 100;
  double tol = 1e-8;
};

/// Pairwise (Kaiser) varimax sweeps; each plane rotation maximises the criterion
/// in its plane, so the criterion never decreases.
FactorModel varimax(const FactorModel& model, VarimaxOptions opts = {});

/// omega = (sum lambda)^2 / ((sum lambda)^2 + sum psi) for a one-factor model.
/// Negative uniquenesses (Heywood cases) are clamped to 0 with a diagnostic.
ReliabilityReport efa_reliability(const FactorModel& model);

}  // namespace relest
