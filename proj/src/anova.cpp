#include "relest/anova.hpp"

#include <cmath>
#include <numeric>

#include "relest/distributions.hpp"
#include "relest/error.hpp"

namespace relest {

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

GroupedObservations::GroupedObservations(std::vector<std::vector<double>> groups,
                                         std::vector<std::string> labels)
    : groups_(std::move(groups)), labels_(std::move(labels)) {
  if (groups_.size() < 2) throw InputError("need at least two groups");
  if (!labels_.empty() && labels_.size() != groups_.size()) {
    throw InputError("group label count does not match group count");
  }
  for (std::size_t i = 0; i < groups_.size(); ++i) {
    if (groups_[i].empty()) throw InputError("group " + std::to_string(i) + " is empty");
    for (double v : groups_[i]) {
      if (!std::isfinite(v)) throw InputError("group " + std::to_string(i) + " has a non-finite value");
    }
    n_ += groups_[i].size();
  }
}

std::optional<std::size_t> GroupedObservations::balanced_size() const noexcept {
  const std::size_t first = groups_.front().size();
  for (const auto& g : groups_) {
    if (g.size() != first) return std::nullopt;
  }
  return first;
}

AnovaTable oneway_decompose(const GroupedObservations& g) {
  double grand = 0.0;
  for (const auto& grp : g.groups()) grand += std::accumulate(grp.begin(), grp.end(), 0.0);
  grand /= static_cast<double>(g.n());

  AnovaTable t;
  for (const auto& grp : g.groups()) {
    const double gm = mean_of(grp);
    for (double y : grp) {
      t.total_ss += (y - grand) * (y - grand);
      t.within_ss += (y - gm) * (y - gm);
    }
    t.between_ss += static_cast<double>(grp.size()) * (gm - grand) * (gm - grand);
  }
  t.df_between = static_cast<double>(g.k()) - 1.0;
  t.df_within = static_cast<double>(g.n()) - static_cast<double>(g.k());
  t.bms = t.between_ss / t.df_between;
  if (t.df_within >= 1.0) t.wms = t.within_ss / t.df_within;
  if (t.total_ss == 0.0) t.diagnostics["degenerate"] = "all observations identical; F undefined";
  return t;
}

AnovaTable oneway_f_test(const GroupedObservations& g) {
  AnovaTable t = oneway_decompose(g);
  if (!t.wms) throw DomainError("F test needs n - k >= 1 within-group degrees of freedom");
  if (*t.wms <= 0.0) throw DomainError("F test undefined: within-group mean square is zero");
  t.f_stat = *t.bms / *t.wms;
  t.p_value = f_sf(*t.f_stat, t.df_between, t.df_within);
  return t;
}

TTestResult pairwise_t_test(const GroupedObservations& g, std::size_t i, std::size_t j) {
  if (i >= g.k() || j >= g.k()) throw InputError("group index out of range");
  if (i == j) throw InputError("t test needs two distinct groups");
  const AnovaTable t = oneway_decompose(g);
  if (!t.wms) throw DomainError("t test needs n - k >= 1 within-group degrees of freedom");
  if (*t.wms <= 0.0) throw DomainError("t test undefined: within-group mean square is zero");
  const auto& gi = g.groups()[i];
  const auto& gj = g.groups()[j];
  const double se = std::sqrt((1.0 / static_cast<double>(gi.size()) + 1.0 / static_cast<double>(gj.size())) * *t.wms);
  TTestResult r;
  r.df = t.df_within;
  r.t_stat = (mean_of(gi) - mean_of(gj)) / se;
  r.p_value = t_two_sided(r.t_stat, r.df);
  return r;
}

TwoWayLayout::TwoWayLayout(std::vector<std::vector<std::vector<double>>> cells) : cells_(std::move(cells)) {
  if (cells_.empty() || cells_.front().empty()) throw InputError("two-way layout is empty");
  const std::size_t c = cells_.front().size();
  const std::size_t m = cells_.front().front().size();
  if (m == 0) throw InputError("two-way cells need at least one replicate");
  for (const auto& row : cells_) {
    if (row.size() != c) throw InputError("two-way layout rows have different column counts");
    for (const auto& cell : row) {
      if (cell.size() != m) throw DomainError("unbalanced two-way design is not supported");
      for (double v : cell) {
        if (!std::isfinite(v)) throw InputError("two-way layout has a non-finite value");
      }
    }
  }
}

TwoWayComponents twoway_decompose(const TwoWayLayout& t) {
  const std::size_t r = t.rows();
  const std::size_t c = t.cols();
  const double m = static_cast<double>(t.replicates());

  Matrix cell_mean(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) cell_mean(i, j) = mean_of(t.cell(i, j));
  const Vector row_mean = cell_mean.rowwise().mean();
  const Vector col_mean = cell_mean.colwise().mean().transpose();
  const double grand = cell_mean.mean();

  TwoWayComponents out;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      for (double y : t.cell(i, j)) {
        out.residual_ss += (y - cell_mean(i, j)) * (y - cell_mean(i, j));
        out.total_ss += (y - grand) * (y - grand);
      }
      const double inter = cell_mean(i, j) - row_mean(i) - col_mean(j) + grand;
      out.interaction_ss += m * inter * inter;
    }
  }
  for (std::size_t i = 0; i < r; ++i) out.row_ss += m * c * (row_mean(i) - grand) * (row_mean(i) - grand);
  for (std::size_t j = 0; j < c; ++j) out.column_ss += m * r * (col_mean(j) - grand) * (col_mean(j) - grand);
  return out;
}

VarianceComponents estimate_random_effects(const GroupedObservations& g) {
  const auto n0 = g.balanced_size();
  if (!n0) {
    throw DomainError("moment estimator needs a balanced design; use the covariance-structure estimator instead");
  }
  if (*n0 < 2) throw DomainError("moment estimator needs at least two observations per group");
  const AnovaTable t = oneway_decompose(g);
  VarianceComponents vc;
  vc.sigma2 = *t.wms;
  const double raw = (*t.bms - *t.wms) / static_cast<double>(*n0);
  vc.projected = raw < 0.0;
  vc.sigma_a2 = vc.projected ? 0.0 : raw;
  return vc;
}

ReliabilityReport icc(const VarianceComponents& components) {
  if (components.sigma_a2 < 0.0 || components.sigma2 < 0.0) throw DomainError("variance components must be non-negative");
  const double total = components.sigma_a2 + components.sigma2;
  if (total <= 0.0) throw DomainError("ICC undefined: both variance components are zero");
  ReliabilityReport r;
  r.method = ReliabilityMethod::kIcc;
  r.coefficient = components.sigma_a2 / total;
  if (components.projected) r.diagnostics["projected"] = "negative between-group estimate set to 0";
  return r;
}

GroupedObservations simulate_random_effects(std::size_t groups, std::size_t per_group, double mu,
                                            double sigma_a2, double sigma2, Rng rng) {
  if (sigma_a2 < 0.0 || sigma2 < 0.0) throw DomainError("variance components must be non-negative");
  NormalSampler z(rng);
  const double sa = std::sqrt(sigma_a2);
  const double se = std::sqrt(sigma2);
  std::vector<std::vector<double>> data(groups, std::vector<double>(per_group));
  for (auto& grp : data) {
    const double effect = mu + sa * z();
    for (double& y : grp) y = effect + se * z();
  }
  return GroupedObservations(std::move(data));
}

}  // namespace relest
