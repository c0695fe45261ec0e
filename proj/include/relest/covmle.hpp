#pragma once

#include <optional>
#include <span>
#include <vector>

#include "relest/classical.hpp"
#include "relest/core.hpp"
#include "relest/kernels.hpp"

namespace relest {

/// Sigma = sum_g sigma_g G_g over PSD basis matrices of a common dimension.
struct CovarianceStructure {
  std::vector<SymMatrix> bases;
  Vector coefficients;

  /// Throws InputError on empty/mismatched bases or coefficient count.
  void validate() const;
};

/// Dense sum of sigma_g G_g.
SymMatrix assemble_sigma(const CovarianceStructure& s);
SymMatrix assemble_sigma(std::span<const SymMatrix> bases, const Vector& coefficients);

/// Regressors Z_1..Z_r as the columns of a d x r matrix.
struct GlsDesign {
  Matrix regressors;
};

/// Solves (Z^T Sigma^-1 Z) beta = Z^T Sigma^-1 x through a Cholesky factor of Sigma.
/// Throws NumericalError when Sigma is not SPD and InputError on collinear regressors.
Vector gls_beta(const GlsDesign& design, const SymMatrix& sigma, const Vector& x);

/// Cholesky factor of Sigma with one bounded retry: on failure, 1e-10 * mean diag is
/// added to the diagonal once; a second failure throws NumericalError.
struct SigmaFactor {
  Eigen::LLT<Matrix> llt;
  bool jittered = false;
};
SigmaFactor factor_sigma(const SymMatrix& sigma);

/// Condition number above which trace_system refuses to proceed.
inline constexpr double kMaxCondition = 1e12;

struct TraceSystem {
  Matrix a;  // a(g,f) = tr(Sigma^-1 G_g Sigma^-1 G_f)
  Vector b;  // b(g)   = tr(Sigma^-1 G_g Sigma^-1 C)
  bool jittered = false;
};

/// Builds the trace equations at Sigma. Throws IllConditionedError when the
/// condition estimate of Sigma exceeds kMaxCondition.
TraceSystem trace_system(const SymMatrix& sigma, std::span<const SymMatrix> bases, const ScatterMatrix& c,
                         Execution exec = Execution::kParallel);

struct EstimateOptions {
  int max_iter = 1000;
  double tol = 1e-3;                    // L2 norm of the coefficient step
  std::optional<Vector> init;           // default: tr(C) / (m tr(G_g))
  Execution exec = Execution::kParallel;
};

struct EstimationResult {
  Vector sigma_hat;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<Eigen::Index> projected;  // indices clamped to the floor at any iterate
  SymMatrix sigma_matrix;
  std::vector<Vector> trace;            // iterate after each step
  bool jittered = false;
};

/// Equal-share starting point tr(C) / (m tr(G_g)).
Vector default_init(const ScatterMatrix& c, std::span<const SymMatrix> bases);

/// Fixed-point iteration on the trace equations: assemble Sigma, solve A sigma = b,
/// clamp negative components to 1e-8 tr(C)/d, stop when the step norm <= tol.
/// Non-convergence is reported through `converged`, not thrown.
EstimationResult estimate_sigma(const ScatterMatrix& c, std::span<const SymMatrix> bases,
                                const EstimateOptions& opts = {});

/// Gaussian log-likelihood -n/2 (d log 2pi + log|Sigma| + tr(Sigma^-1 C)) for known mean.
double log_likelihood(const SymMatrix& sigma, const ScatterMatrix& c);

/// 1 - sigma_err * mean diag(G_err) / mean diag(Sigma_hat).
ReliabilityReport reliability_from_components(const EstimationResult& result,
                                              std::span<const SymMatrix> bases, std::size_t error_index);
ReliabilityReport reliability_from_components(const Vector& coefficients, std::span<const SymMatrix> bases,
                                              std::size_t error_index);

}  // namespace relest
