#pragma once

#include <vector>

#include "relest/core.hpp"
#include "relest/rng.hpp"

namespace relest {

/// Quadratic forms Q_j = X^T A_j X over X ~ N(0, I_n).
struct CochranDecomposition {
  std::vector<SymMatrix> forms;

  Eigen::Index dim() const;
  /// Numerical ranks (eigenvalues above 1e-9 of the largest).
  std::vector<Eigen::Index> ranks() const;
};

/// Within-group, between-group and grand-mean projections of a one-way layout (in that
/// order). They sum to I_n with ranks n - k, k - 1 and 1.
CochranDecomposition oneway_projections(const std::vector<std::size_t>& group_sizes);

struct CochranCheck {
  std::vector<Eigen::Index> ranks;
  bool hypotheses_met = false;  // every A_j PSD and ranks sum to n
  std::vector<double> ks_statistic;
  std::vector<double> ks_p_value;
  Matrix correlation;  // pairwise sample correlations of the Q_j
  std::vector<std::vector<double>> draws;  // draws[j][t]
};

/// Monte-Carlo check of Cochran's theorem. Reports; does not assert.
/// Draw t uses RNG substream t, so results do not depend on the thread count.
CochranCheck cochran_empirical_check(const CochranDecomposition& d, std::size_t n_draws, RngSeed seed);

}  // namespace relest
