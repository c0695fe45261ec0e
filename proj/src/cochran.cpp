#include "relest/cochran.hpp"

#include <cmath>

#include "relest/distributions.hpp"
#include "relest/error.hpp"

namespace relest {

Eigen::Index CochranDecomposition::dim() const {
  if (forms.empty()) throw InputError("Cochran decomposition has no quadratic forms");
  return forms.front().dim();
}

std::vector<Eigen::Index> CochranDecomposition::ranks() const {
  std::vector<Eigen::Index> out;
  out.reserve(forms.size());
  for (const auto& a : forms) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.matrix(), Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    const double cut = 1e-9 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    out.push_back((ev.array().abs() > cut).count());
  }
  return out;
}

CochranDecomposition oneway_projections(const std::vector<std::size_t>& group_sizes) {
  if (group_sizes.size() < 2) throw InputError("one-way projections need at least two groups");
  Eigen::Index n = 0;
  for (auto s : group_sizes) {
    if (s == 0) throw InputError("one-way projections: empty group");
    n += static_cast<Eigen::Index>(s);
  }
  Matrix block_avg = Matrix::Zero(n, n);
  Eigen::Index off = 0;
  for (auto s : group_sizes) {
    const auto sz = static_cast<Eigen::Index>(s);
    block_avg.block(off, off, sz, sz).setConstant(1.0 / static_cast<double>(s));
    off += sz;
  }
  const Matrix grand = Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  CochranDecomposition d;
  d.forms.emplace_back(Matrix(Matrix::Identity(n, n) - block_avg));
  d.forms.emplace_back(Matrix(block_avg - grand));
  d.forms.emplace_back(grand);
  return d;
}

CochranCheck cochran_empirical_check(const CochranDecomposition& d, std::size_t n_draws, RngSeed seed) {
  const Eigen::Index n = d.dim();
  for (const auto& a : d.forms) {
    if (a.dim() != n) throw InputError("Cochran forms have different dimensions");
  }
  if (n_draws < 2) throw InputError("Cochran check needs at least two draws");

  CochranCheck out;
  out.ranks = d.ranks();
  Eigen::Index rank_sum = 0;
  bool all_psd = true;
  for (std::size_t j = 0; j < d.forms.size(); ++j) {
    rank_sum += out.ranks[j];
    all_psd = all_psd && validate_spd(d.forms[j], 1e-9) != SpdVerdict::kIndefinite;
  }
  out.hypotheses_met = all_psd && rank_sum == n;

  const std::size_t m = d.forms.size();
  out.draws.assign(m, std::vector<double>(n_draws));
  const auto draws = static_cast<std::int64_t>(n_draws);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < draws; ++t) {
    NormalSampler z(Rng(seed, static_cast<std::uint64_t>(t)));
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = z();
    for (std::size_t j = 0; j < m; ++j) out.draws[j][static_cast<std::size_t>(t)] = x.dot(d.forms[j].matrix() * x);
  }

  for (std::size_t j = 0; j < m; ++j) {
    const double df = static_cast<double>(out.ranks[j]);
    KsResult ks{1.0, 0.0};
    if (df > 0) ks = ks_test(out.draws[j], [df](double q) { return chi2_cdf(q, df); });
    out.ks_statistic.push_back(ks.statistic);
    out.ks_p_value.push_back(ks.p_value);
  }

  Matrix q(static_cast<Eigen::Index>(n_draws), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t t = 0; t < n_draws; ++t) q(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = out.draws[j][t];
  const Matrix centred = q.rowwise() - q.colwise().mean();
  const Matrix cov = centred.transpose() * centred;
  out.correlation = Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (Eigen::Index a = 0; a < cov.rows(); ++a) {
    for (Eigen::Index b = 0; b < cov.cols(); ++b) {
      const double denom = std::sqrt(cov(a, a) * cov(b, b));
      if (a != b) out.correlation(a, b) = denom > 0.0 ? cov(a, b) / denom : 0.0;
    }
  }
  return out;
}

}  // namespace relest
