#include "relest/core.hpp"

#include <cmath>

#include "relest/error.hpp"
#include "relest/kernels.hpp"

namespace relest {

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw InputError("symmetric matrix must be square and non-empty, got " +
                     std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  }
  m_.triangularView<Eigen::StrictlyLower>() = m_.transpose().triangularView<Eigen::StrictlyLower>();
}

SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::zero(Eigen::Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }

void SampleSet::validate() const {
  if (rows.rows() < 1) throw InputError("sample set is empty");
  if (rows.cols() < 1) throw InputError("sample set has no variables");
  if (mu.size() != rows.cols()) {
    throw InputError("mean vector has length " + std::to_string(mu.size()) + ", expected " +
                     std::to_string(rows.cols()));
  }
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != rows.cols()) {
    throw InputError("column name count does not match dimension");
  }
}

std::string SampleSet::column_name(Eigen::Index j) const {
  if (!names.empty()) return names.at(static_cast<std::size_t>(j));
  return "column " + std::to_string(j + 1);
}

const char* to_string(SpdVerdict v) noexcept {
  switch (v) {
    case SpdVerdict::kSpd:
      return "SPD";
    case SpdVerdict::kPsdSingular:
      return "PSD-singular";
    case SpdVerdict::kIndefinite:
      return "indefinite";
  }
  return "?";
}

SpdVerdict validate_spd(const SymMatrix& m, double tol) {
  if (!m.matrix().allFinite()) throw InputError("matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix(), Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  const double smallest = ev(0);
  if (smallest > tol * scale) return SpdVerdict::kSpd;
  if (smallest >= -tol * scale) return SpdVerdict::kPsdSingular;
  return SpdVerdict::kIndefinite;
}

SymMatrix ar1_matrix(Eigen::Index d, double rho) {
  if (d < 1) throw InputError("ar1_matrix: dimension must be >= 1");
  if (!(std::abs(rho) < 1.0)) throw DomainError("ar1_matrix: |rho| must be < 1, got " + std::to_string(rho));
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      // std::pow(0.0, 0) == 1 keeps the diagonal exact for rho == 0.
      m(i, j) = std::pow(rho, static_cast<double>(j - i));
    }
  }
  return SymMatrix(std::move(m));
}

double NormalSampler::operator()() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * rng_.uniform() - 1.0;
    v = 2.0 * rng_.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  return u * factor;
}

SampleSet mvn_sample(const Vector& mu, const SymMatrix& sigma, Eigen::Index n, Rng rng) {
  if (mu.size() != sigma.dim()) throw InputError("mvn_sample: mean and covariance dimensions differ");
  if (n < 0) throw InputError("mvn_sample: negative sample count");
  const SpdVerdict verdict = validate_spd(sigma);
  if (verdict != SpdVerdict::kSpd) {
    throw NumericalError(std::string("mvn_sample: covariance is ") + to_string(verdict) +
                         ", cannot factor");
  }
  Eigen::LLT<Matrix> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("mvn_sample: Cholesky factorization failed");
  const Matrix l = llt.matrixL();

  const Eigen::Index d = sigma.dim();
  NormalSampler normal(rng);
  Matrix z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = normal();

  SampleSet out;
  out.rows = (z * l.transpose()).rowwise() + mu.transpose();
  out.mu = mu;
  return out;
}

ScatterMatrix scatter_matrix(const SampleSet& s) {
  s.validate();
  return ScatterMatrix{SymMatrix(kernels::omp::scatter(s.rows, s.mu)), s.n()};
}

ScatterMatrix scatter_matrix_centered(const SampleSet& s) {
  s.validate();
  const Vector mean = s.rows.colwise().mean().transpose();
  return ScatterMatrix{SymMatrix(kernels::omp::scatter(s.rows, mean)), s.n()};
}

}  // namespace relest
