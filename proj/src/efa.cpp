#include "relest/efa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relest/error.hpp"

namespace relest {

FactorModel FactorModel::from_loadings(Matrix loadings) {
  FactorModel f;
  f.loadings = std::move(loadings);
  f.rotation = Matrix::Identity(f.loadings.cols(), f.loadings.cols());
  f.refresh();
  return f;
}

void FactorModel::refresh() {
  communalities = loadings.rowwise().squaredNorm();
  factor_contributions = loadings.colwise().squaredNorm().transpose();
  uniquenesses = (1.0 - communalities.array()).matrix();
}

SymMatrix correlation_matrix(const SampleSet& s) {
  if (s.n() < 2) throw InputError("correlation matrix needs at least two samples");
  if (!s.names.empty() && static_cast<Eigen::Index>(s.names.size()) != s.dim()) {
    throw InputError("column name count does not match dimension");
  }
  const Matrix centred = s.rows.rowwise() - s.rows.colwise().mean();
  const Vector sd = centred.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < sd.size(); ++j) {
    if (!(sd(j) > 0.0)) throw DomainError("zero variance in " + s.column_name(j));
  }
  const Matrix scaled = centred * sd.cwiseInverse().asDiagonal();
  Matrix r = scaled.transpose() * scaled;
  r.diagonal().setOnes();
  return SymMatrix(std::move(r));
}

FactorModel extract_factors(const SymMatrix& r, RetentionRule rule) {
  const Eigen::Index p = r.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r.matrix());
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");

  // Eigen returns ascending order; stable sort keeps solver column order on ties.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return eig.eigenvalues()(a) > eig.eigenvalues()(b);
  });

  FactorModel model;
  model.eigenvalues.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) model.eigenvalues(i) = eig.eigenvalues()(order[static_cast<std::size_t>(i)]);

  Eigen::Index m = 0;
  if (const auto* fixed = std::get_if<FixedFactors>(&rule)) {
    if (fixed->m < 1 || fixed->m > p) {
      throw InputError("cannot retain " + std::to_string(fixed->m) + " factors from " + std::to_string(p) + " variables");
    }
    m = fixed->m;
  } else {
    m = (model.eigenvalues.array() >= 1.0 - 1e-10).count();
    m = std::max<Eigen::Index>(m, 1);
    model.diagnostics["rule"] = "kaiser";
  }

  model.loadings.resize(p, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double lambda = std::max(model.eigenvalues(j), 0.0);
    Vector v = eig.eigenvectors().col(order[static_cast<std::size_t>(j)]);
    if (v.sum() < 0.0) v = -v;
    model.loadings.col(j) = v * std::sqrt(lambda);
  }
  model.rotation = Matrix::Identity(m, m);
  model.refresh();

  if ((model.eigenvalues.array() - 1.0).abs().maxCoeff() < 1e-10) {
    model.diagnostics["no_structure"] = "all eigenvalues equal 1; variables are uncorrelated";
  }
  return model;
}

FactorModel rotate(const FactorModel& model, const Matrix& t) {
  if (t.rows() != model.m() || t.cols() != model.m()) throw InputError("rotation must be m x m");
  const double err = (t.transpose() * t - Matrix::Identity(t.rows(), t.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw InputError("rotation is not orthogonal (max |T^T T - I| = " + std::to_string(err) + ")");
  FactorModel out = model;
  out.loadings = model.loadings * t;
  out.rotation = model.rotation * t;
  out.refresh();
  return out;
}

double varimax_criterion(const Matrix& loadings) {
  const double p = static_cast<double>(loadings.rows());
  const Eigen::ArrayXXd sq = loadings.array().square();
  double v = 0.0;
  for (Eigen::Index j = 0; j < loadings.cols(); ++j) {
    const double m2 = sq.col(j).sum() / p;
    const double m4 = sq.col(j).square().sum() / p;
    v += m4 - m2 * m2;
  }
  return v;
}

FactorModel varimax(const FactorModel& model, VarimaxOptions opts) {
  const Eigen::Index m = model.m();
  if (m < 2) return model;
  const double p = static_cast<double>(model.p());
  Matrix a = model.loadings;
  Matrix t = Matrix::Identity(m, m);
  int sweeps = 0;
  bool converged = false;
  for (; sweeps < opts.max_sweeps && !converged; ++sweeps) {
    double largest_angle = 0.0;
    for (Eigen::Index j = 0; j < m - 1; ++j) {
      for (Eigen::Index k = j + 1; k < m; ++k) {
        const Eigen::ArrayXd x = a.col(j).array();
        const Eigen::ArrayXd y = a.col(k).array();
        const Eigen::ArrayXd u = x.square() - y.square();
        const Eigen::ArrayXd v = 2.0 * x * y;
        const double sa = u.sum();
        const double sb = v.sum();
        const double sc = (u.square() - v.square()).sum();
        const double sd = 2.0 * (u * v).sum();
        const double num = sd - 2.0 * sa * sb / p;
        const double den = sc - (sa * sa - sb * sb) / p;
        const double phi = 0.25 * std::atan2(num, den);
        largest_angle = std::max(largest_angle, std::abs(phi));
        if (std::abs(phi) < 1e-15) continue;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        Matrix plane(2, 2);
        plane << c, -s, s, c;
        Matrix cols(a.rows(), 2);
        cols << a.col(j), a.col(k);
        cols = cols * plane;
        a.col(j) = cols.col(0);
        a.col(k) = cols.col(1);
        Matrix tcols(m, 2);
        tcols << t.col(j), t.col(k);
        tcols = tcols * plane;
        t.col(j) = tcols.col(0);
        t.col(k) = tcols.col(1);
      }
    }
    converged = largest_angle < opts.tol;
  }
  FactorModel out = rotate(model, t);
  out.diagnostics["varimax_sweeps"] = std::to_string(sweeps);
  if (!converged) out.diagnostics["varimax_converged"] = "false";
  return out;
}

ReliabilityReport efa_reliability(const FactorModel& model) {
  if (model.m() != 1) throw InputError("EFA reliability needs exactly one retained factor, got " + std::to_string(model.m()));
  ReliabilityReport r;
  r.method = ReliabilityMethod::kEfaOmega;
  Vector psi = model.uniquenesses;
  if ((psi.array() < 0.0).any()) {
    r.diagnostics["heywood"] = "negative uniqueness clamped to 0";
    psi = psi.cwiseMax(0.0);
  }
  const double s = model.loadings.col(0).sum();
  const double common = s * s;
  const double denom = common + psi.sum();
  if (denom <= 0.0) throw DomainError("EFA reliability undefined: zero implied total variance");
  r.coefficient = common / denom;
  return r;
}

}  // namespace relest
