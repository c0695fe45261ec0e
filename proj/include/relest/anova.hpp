#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relest/classical.hpp"
#include "relest/core.hpp"
#include "relest/rng.hpp"

namespace relest {

/// k >= 2 groups, each with at least one observation.
class GroupedObservations {
 public:
  /// Throws InputError on fewer than two groups, an empty group or a non-finite value.
  explicit GroupedObservations(std::vector<std::vector<double>> groups,
                               std::vector<std::string> labels = {});

  std::size_t k() const noexcept { return groups_.size(); }
  std::size_t n() const noexcept { return n_; }
  const std::vector<std::vector<double>>& groups() const noexcept { return groups_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// Common group size, if every group has the same count.
  std::optional<std::size_t> balanced_size() const noexcept;

 private:
  std::vector<std::vector<double>> groups_;
  std::vector<std::string> labels_;
  std::size_t n_ = 0;
};

struct AnovaTable {
  double total_ss = 0.0;
  double within_ss = 0.0;
  double between_ss = 0.0;
  double df_within = 0.0;
  double df_between = 0.0;
  std::optional<double> bms;
  std::optional<double> wms;
  std::optional<double> f_stat;
  std::optional<double> p_value;
  std::map<std::string, std::string> diagnostics;
};

/// Sums of squares by direct summation. Mean squares are filled when df_within >= 1.
AnovaTable oneway_decompose(const GroupedObservations& g);

/// Adds F = BMS/WMS and P(F_{k-1,n-k} > F). Throws DomainError when WMS == 0 or df_within == 0.
AnovaTable oneway_f_test(const GroupedObservations& g);

struct TTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  double df = 0.0;
};

/// Two-group t statistic using the pooled WMS of all k groups.
TTestResult pairwise_t_test(const GroupedObservations& g, std::size_t i, std::size_t j);

/// r x c cells, each with the same number m of replicates.
class TwoWayLayout {
 public:
  /// cells[i][j] holds the replicates for row level i, column level j.
  /// Throws InputError on an empty or ragged grid and DomainError on unbalanced cells.
  explicit TwoWayLayout(std::vector<std::vector<std::vector<double>>> cells);

  std::size_t rows() const noexcept { return cells_.size(); }
  std::size_t cols() const noexcept { return cells_.front().size(); }
  std::size_t replicates() const noexcept { return cells_.front().front().size(); }
  const std::vector<double>& cell(std::size_t i, std::size_t j) const { return cells_[i][j]; }

 private:
  std::vector<std::vector<std::vector<double>>> cells_;
};

struct TwoWayComponents {
  double residual_ss = 0.0;
  double row_ss = 0.0;
  double column_ss = 0.0;
  double interaction_ss = 0.0;
  double total_ss = 0.0;
};

TwoWayComponents twoway_decompose(const TwoWayLayout& t);

struct VarianceComponents {
  double sigma_a2 = 0.0;
  double sigma2 = 0.0;
  bool projected = false;  // true when the moment estimate of sigma_a2 was negative
};

/// Balanced one-way moment estimator: sigma2 = WMS, sigma_a2 = max(0, (BMS - WMS)/n0).
VarianceComponents estimate_random_effects(const GroupedObservations& g);

/// sigma_a2 / (sigma2 + sigma_a2).
ReliabilityReport icc(const VarianceComponents& components);

/// Balanced random-effects data: y_ij = mu + a_i + e_ij, a_i ~ N(0, sigma_a2), e_ij ~ N(0, sigma2).
GroupedObservations simulate_random_effects(std::size_t groups, std::size_t per_group, double mu,
                                            double sigma_a2, double sigma2, Rng rng);

}  // namespace relest
