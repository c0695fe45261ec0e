#include "relest/covmle.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "relest/error.hpp"

namespace relest {

namespace {

void check_bases(std::span<const SymMatrix> bases, Eigen::Index d) {
  if (bases.empty()) throw InputError("at least one basis matrix is required");
  for (std::size_t g = 0; g < bases.size(); ++g) {
    if (bases[g].dim() != d) {
      throw InputError("basis " + std::to_string(g) + " has dimension " + std::to_string(bases[g].dim()) +
                       ", expected " + std::to_string(d));
    }
  }
}

}  // namespace

void CovarianceStructure::validate() const {
  check_bases(bases, bases.empty() ? 0 : bases.front().dim());
  if (coefficients.size() != static_cast<Eigen::Index>(bases.size())) {
    throw InputError("coefficient count does not match basis count");
  }
}

SymMatrix assemble_sigma(std::span<const SymMatrix> bases, const Vector& coefficients) {
  check_bases(bases, bases.empty() ? 0 : bases.front().dim());
  if (coefficients.size() != static_cast<Eigen::Index>(bases.size())) {
    throw InputError("coefficient count does not match basis count");
  }
  Matrix sigma = Matrix::Zero(bases.front().dim(), bases.front().dim());
  for (std::size_t g = 0; g < bases.size(); ++g) sigma += coefficients(static_cast<Eigen::Index>(g)) * bases[g].matrix();
  return SymMatrix(std::move(sigma));
}

SymMatrix assemble_sigma(const CovarianceStructure& s) { return assemble_sigma(s.bases, s.coefficients); }

SigmaFactor factor_sigma(const SymMatrix& sigma) {
  SigmaFactor f;
  f.llt.compute(sigma.matrix());
  if (f.llt.info() == Eigen::Success) return f;
  const double jitter = 1e-10 * sigma.matrix().diagonal().mean();
  if (jitter > 0.0) {
    Matrix shifted = sigma.matrix();
    shifted.diagonal().array() += jitter;
    f.llt.compute(shifted);
    f.jittered = true;
    if (f.llt.info() == Eigen::Success) return f;
  }
  throw NumericalError("covariance matrix is not positive definite (Cholesky failed after jitter)");
}

Vector gls_beta(const GlsDesign& design, const SymMatrix& sigma, const Vector& x) {
  const Matrix& z = design.regressors;
  if (z.rows() != sigma.dim() || x.size() != sigma.dim()) throw InputError("GLS design, covariance and observation dimensions differ");
  if (z.cols() < 1) throw InputError("GLS design has no regressors");
  Eigen::LLT<Matrix> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("GLS covariance is not positive definite");
  // Whitened regressors W = L^-1 Z, so Z^T Sigma^-1 Z = W^T W.
  const Matrix w = llt.matrixL().solve(z);
  const Vector wx = llt.matrixL().solve(x);
  Eigen::ColPivHouseholderQR<Matrix> qr(w);
  if (qr.rank() < z.cols()) throw InputError("GLS regressors are collinear");
  const Matrix gram = w.transpose() * w;
  Eigen::LLT<Matrix> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success) throw InputError("GLS regressors are collinear");
  return gram_llt.solve(w.transpose() * wx);
}

TraceSystem trace_system(const SymMatrix& sigma, std::span<const SymMatrix> bases, const ScatterMatrix& c,
                         Execution exec) {
  const Eigen::Index d = sigma.dim();
  check_bases(bases, d);
  if (c.c.dim() != d) throw InputError("scatter matrix dimension does not match Sigma");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma.matrix(), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(d - 1);
  const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "Sigma is ill-conditioned (condition estimate " << condition << ")";
    throw IllConditionedError(msg.str(), condition);
  }
  const SigmaFactor f = factor_sigma(sigma);

  std::vector<Matrix> w;
  w.reserve(bases.size());
  for (const auto& g : bases) w.push_back(f.llt.solve(g.matrix()));
  const Matrix v = f.llt.solve(c.c.matrix());

  kernels::TraceProducts tp =
      exec == Execution::kParallel ? kernels::omp::trace_products(w, v) : kernels::serial::trace_products(w, v);
  return TraceSystem{std::move(tp.a), std::move(tp.b), f.jittered};
}

Vector default_init(const ScatterMatrix& c, std::span<const SymMatrix> bases) {
  const double m = static_cast<double>(bases.size());
  Vector init(static_cast<Eigen::Index>(bases.size()));
  for (std::size_t g = 0; g < bases.size(); ++g) {
    const double tg = bases[g].trace();
    if (!(tg > 0.0)) throw InputError("basis " + std::to_string(g) + " has non-positive trace");
    init(static_cast<Eigen::Index>(g)) = c.c.trace() / (m * tg);
  }
  return init;
}

EstimationResult estimate_sigma(const ScatterMatrix& c, std::span<const SymMatrix> bases, const EstimateOptions& opts) {
  const Eigen::Index d = c.c.dim();
  check_bases(bases, d);
  const auto m = static_cast<Eigen::Index>(bases.size());
  if (validate_spd(c.c, 1e-8) == SpdVerdict::kIndefinite) throw InputError("scatter matrix is not PSD");
  const double trace_c = c.c.trace();
  if (!(trace_c > 0.0)) throw NumericalError("scatter matrix has zero trace; nothing to estimate");
  if (opts.max_iter < 1) throw InputError("max_iter must be >= 1");

  Vector prev = opts.init ? *opts.init : default_init(c, bases);
  if (prev.size() != m) throw InputError("initial coefficient count does not match basis count");
  if ((prev.array() <= 0.0).any()) throw InputError("initial coefficients must be positive");

  const double floor = 1e-8 * trace_c / static_cast<double>(d);
  EstimationResult out;
  std::vector<bool> was_projected(static_cast<std::size_t>(m), false);

  for (int it = 1; it <= opts.max_iter; ++it) {
    const SymMatrix sigma = assemble_sigma(bases, prev);
    TraceSystem ts;
    try {
      ts = trace_system(sigma, bases, c, opts.exec);
    } catch (const IllConditionedError& e) {
      throw NumericalError(std::string("singular iterate at step ") + std::to_string(it) + ": " + e.what());
    }
    out.jittered = out.jittered || ts.jittered;
    // A is a Gram matrix, so its spectrum measures how close the bases are to dependent.
    const Vector spectrum = Eigen::SelfAdjointEigenSolver<Matrix>(ts.a, Eigen::EigenvaluesOnly).eigenvalues();
    Eigen::LDLT<Matrix> ldlt(ts.a);
    if (ldlt.info() != Eigen::Success || !(spectrum(0) > 1e-12 * spectrum(m - 1))) {
      throw NumericalError("trace system is singular; the basis matrices are linearly dependent");
    }
    Vector next = ldlt.solve(ts.b);
    for (Eigen::Index g = 0; g < m; ++g) {
      if (next(g) < floor) {
        next(g) = floor;
        was_projected[static_cast<std::size_t>(g)] = true;
      }
    }
    out.residual = (next - prev).norm();
    out.iterations = it;
    prev = next;
    out.trace.push_back(prev);
    if (out.residual <= opts.tol) {
      out.converged = true;
      break;
    }
  }
  for (Eigen::Index g = 0; g < m; ++g) {
    if (was_projected[static_cast<std::size_t>(g)]) out.projected.push_back(g);
  }
  out.sigma_hat = prev;
  out.sigma_matrix = assemble_sigma(bases, prev);
  return out;
}

double log_likelihood(const SymMatrix& sigma, const ScatterMatrix& c) {
  Eigen::LLT<Matrix> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("log-likelihood: Sigma is not positive definite");
  const double d = static_cast<double>(sigma.dim());
  const Matrix l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double quad = llt.solve(c.c.matrix()).trace();
  return -0.5 * static_cast<double>(c.n_used) * (d * std::log(2.0 * std::numbers::pi) + log_det + quad);
}

ReliabilityReport reliability_from_components(const Vector& coefficients, std::span<const SymMatrix> bases,
                                              std::size_t error_index) {
  if (error_index >= bases.size()) throw InputError("error basis index out of range");
  if (coefficients.size() != static_cast<Eigen::Index>(bases.size())) {
    throw InputError("coefficient count does not match basis count");
  }
  double total = 0.0;
  for (std::size_t g = 0; g < bases.size(); ++g) {
    total += coefficients(static_cast<Eigen::Index>(g)) * bases[g].matrix().diagonal().mean();
  }
  if (!(total > 0.0)) throw DomainError("reliability undefined: zero implied total variance");
  const double error = coefficients(static_cast<Eigen::Index>(error_index)) * bases[error_index].matrix().diagonal().mean();
  ReliabilityReport r;
  r.method = ReliabilityMethod::kCovMle;
  r.coefficient = 1.0 - error / total;
  r.diagnostics["error_basis"] = std::to_string(error_index);
  return r;
}

ReliabilityReport reliability_from_components(const EstimationResult& result, std::span<const SymMatrix> bases,
                                              std::size_t error_index) {
  ReliabilityReport r = reliability_from_components(result.sigma_hat, bases, error_index);
  if (!result.converged) r.diagnostics["converged"] = "false";
  return r;
}

}  // namespace relest
