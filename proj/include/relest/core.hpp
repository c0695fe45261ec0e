#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "relest/rng.hpp"

namespace relest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. The upper triangle is authoritative: construction
/// mirrors it into the lower triangle, so entries are exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  /// Throws InputError when `m` is not square or is empty.
  explicit SymMatrix(Matrix m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix zero(Eigen::Index dim);

  Eigen::Index dim() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

/// n draws of a dim-variate vector, stored row-wise, plus the (known) mean.
struct SampleSet {
  Matrix rows;                      // n x dim
  Vector mu;                        // length dim
  std::vector<std::string> names;   // optional column names, empty or length dim

  Eigen::Index n() const noexcept { return rows.rows(); }
  Eigen::Index dim() const noexcept { return rows.cols(); }

  /// Throws InputError on n < 1 or inconsistent lengths.
  void validate() const;
  std::string column_name(Eigen::Index j) const;
};

struct ScatterMatrix {
  SymMatrix c;
  Eigen::Index n_used = 0;
};

enum class SpdVerdict { kSpd, kPsdSingular, kIndefinite };

const char* to_string(SpdVerdict v) noexcept;

/// Default relative tolerance for SPD classification.
inline constexpr double kSpdTolerance = 1e-10;

/// Classifies by the smallest eigenvalue against +/- tol * max|eigenvalue|.
/// Throws InputError on non-finite entries.
SpdVerdict validate_spd(const SymMatrix& m, double tol = kSpdTolerance);

/// AR(1) correlation: entry (i,j) = rho^|i-j|. Requires |rho| < 1.
SymMatrix ar1_matrix(Eigen::Index d, double rho);

/// Standard normal variates from an Rng, Marsaglia polar method with a cached spare.
class NormalSampler {
 public:
  explicit NormalSampler(Rng rng) : rng_(rng) {}
  double operator()();
  Rng& rng() noexcept { return rng_; }

 private:
  Rng rng_;
  std::optional<double> spare_;
};

/// n draws from N(mu, sigma) as mu + L z with sigma = L L^T.
/// Throws NumericalError if sigma is not SPD.
SampleSet mvn_sample(const Vector& mu, const SymMatrix& sigma, Eigen::Index n, Rng rng);

/// C = (1/n) sum_j (x_j - mu)(x_j - mu)^T. The divisor is n since mu is known.
ScatterMatrix scatter_matrix(const SampleSet& s);

/// Same as scatter_matrix but centres on the sample mean (still divisor n, biased).
ScatterMatrix scatter_matrix_centered(const SampleSet& s);

}  // namespace relest
