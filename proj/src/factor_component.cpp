#include "relest/factor_component.hpp"

#include <cmath>
#include <limits>

#include "relest/covmle.hpp"
#include "relest/error.hpp"

namespace relest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Matrix implied_sigma(const Matrix& f, const Vector& sigma, std::span<const SymMatrix> known) {
  Matrix s = sigma(0) * (f * f.transpose());
  for (std::size_t g = 0; g < known.size(); ++g) s += sigma(static_cast<Eigen::Index>(g) + 1) * known[g].matrix();
  return s;
}

// Log-likelihood, or -inf when the implied Sigma is not positive definite.
double objective(const Matrix& sigma, const ScatterMatrix& c) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) return kNegInf;
  const Matrix l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any()) return kNegInf;
  return log_likelihood(SymMatrix(sigma), c);
}

}  // namespace

Matrix loglik_gradient_f(const Matrix& c, double n, const SymMatrix& sigma, const Matrix& f, double sigma0) {
  Eigen::LLT<Matrix> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) throw NumericalError("gradient: Sigma is not positive definite");
  const Matrix inv = llt.solve(Matrix::Identity(sigma.dim(), sigma.dim()));
  const Matrix middle = inv * c * inv - inv;
  return n * sigma0 * (middle * f);
}

double stationarity_residual(const ScatterMatrix& c, std::span<const SymMatrix> known_bases, const Matrix& f,
                             const Vector& sigma) {
  const Matrix s = implied_sigma(f, sigma, known_bases);
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw NumericalError("stationarity: Sigma is not positive definite");
  const Matrix inv = llt.solve(Matrix::Identity(s.rows(), s.cols()));
  const Matrix inv_c_inv = inv * c.c.matrix() * inv;

  double worst = (sigma(0) * (inv_c_inv - inv) * f).norm();
  // d loglik / d sigma_g per sample: 1/2 [tr(S^-1 G S^-1 C) - tr(S^-1 G)]
  auto score = [&](const Matrix& g) { return 0.5 * ((inv_c_inv - inv).cwiseProduct(g)).sum(); };
  worst = std::max(worst, std::abs(score(f * f.transpose())));
  for (const auto& g : known_bases) worst = std::max(worst, std::abs(score(g.matrix())));
  return worst;
}

FactorComponentResult estimate_with_unknown_g0(const ScatterMatrix& c, std::span<const SymMatrix> known_bases,
                                               Eigen::Index rank, const FactorComponentOptions& opts) {
  const Eigen::Index d = c.c.dim();
  if (rank < 1 || rank > d) {
    throw InputError("factor rank must be in [1, " + std::to_string(d) + "], got " + std::to_string(rank));
  }
  for (const auto& g : known_bases) {
    if (g.dim() != d) throw InputError("known basis dimension does not match the scatter matrix");
  }
  if (validate_spd(c.c, 1e-8) == SpdVerdict::kIndefinite) throw InputError("scatter matrix is not PSD");
  const auto m = static_cast<Eigen::Index>(known_bases.size());
  const double n = static_cast<double>(c.n_used);
  if (!(n > 0.0)) throw InputError("scatter matrix carries no samples");

  FactorComponentResult out;

  if (opts.fix_sigma0_zero) {
    if (known_bases.empty()) throw InputError("with sigma_0 fixed at 0 at least one known basis is required");
    EstimateOptions eo;
    eo.max_iter = opts.max_iter;
    if (opts.init_sigma) eo.init = opts.init_sigma->tail(m);
    const EstimationResult est = estimate_sigma(c, known_bases, eo);
    out.f_hat = Matrix::Zero(d, rank);
    out.sigma_hat = Vector::Zero(m + 1);
    out.sigma_hat.tail(m) = est.sigma_hat;
    out.sigma_matrix = est.sigma_matrix;
    out.objective_trace.push_back(log_likelihood(est.sigma_matrix, c));
    out.iterations = est.iterations;
    out.converged = est.converged;
    out.diagnostics.emplace_back("unknown component disabled (sigma_0 = 0)");
    return out;
  }

  const double trace_c = c.c.trace();
  const double floor = 1e-8 * trace_c / static_cast<double>(d);

  Matrix f;
  Vector sigma(m + 1);
  if (opts.init_f) {
    f = *opts.init_f;
    if (f.rows() != d || f.cols() != rank) throw InputError("initial F must be d x rank");
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c.c.matrix());
    f.resize(d, rank);
    for (Eigen::Index j = 0; j < rank; ++j) {
      const double lambda = std::max(eig.eigenvalues()(d - 1 - j), floor);
      f.col(j) = eig.eigenvectors().col(d - 1 - j) * std::sqrt(lambda / 2.0);
    }
  }
  if (opts.init_sigma) {
    sigma = *opts.init_sigma;
    if (sigma.size() != m + 1) throw InputError("initial sigma must have 1 + known-basis entries");
  } else {
    sigma(0) = 1.0;
    for (Eigen::Index g = 0; g < m; ++g) {
      sigma(g + 1) = trace_c / (2.0 * static_cast<double>(m) * known_bases[static_cast<std::size_t>(g)].trace());
    }
  }
  if ((sigma.array() < 0.0).any()) throw InputError("initial coefficients must be non-negative");

  double current = objective(implied_sigma(f, sigma, known_bases), c);
  if (current == kNegInf) throw NumericalError("initial implied Sigma is not positive definite");
  out.objective_trace.push_back(current);

  double f_step = 1.0;
  bool f_exhausted_logged = false;
  for (int cycle = 1; cycle <= opts.max_iter; ++cycle) {
    const double start = current;

    // (a) sigma with F fixed: scoring direction from the trace equations, step halved
    // until the likelihood does not drop.
    for (int s = 0; s < opts.sigma_steps; ++s) {
      std::vector<SymMatrix> bases;
      bases.reserve(known_bases.size() + 1);
      bases.emplace_back(Matrix(f * f.transpose()));
      bases.insert(bases.end(), known_bases.begin(), known_bases.end());
      TraceSystem ts;
      try {
        ts = trace_system(SymMatrix(implied_sigma(f, sigma, known_bases)), bases, c);
      } catch (const NumericalError&) {
        break;
      }
      Eigen::LDLT<Matrix> ldlt(ts.a);
      if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) break;
      const Vector target = ldlt.solve(ts.b);
      double t = 1.0;
      bool moved = false;
      for (int h = 0; h < opts.max_halvings; ++h, t *= opts.shrink) {
        Vector trial = sigma + t * (target - sigma);
        trial = trial.cwiseMax(floor);
        const double value = objective(implied_sigma(f, trial, known_bases), c);
        if (value >= current) {
          moved = (trial - sigma).norm() > 0.0;
          sigma = trial;
          current = value;
          break;
        }
      }
      if (!moved) break;
    }

    // (b) F with sigma fixed: Armijo-backtracked ascent along the gradient.
    for (int s = 0; s < opts.f_steps; ++s) {
      const SymMatrix sig(implied_sigma(f, sigma, known_bases));
      const Matrix grad = loglik_gradient_f(c.c.matrix(), n, sig, f, sigma(0));
      const Matrix dir = grad / n;
      const double slope = grad.cwiseProduct(dir).sum();
      if (!(slope > 0.0)) break;
      double t = f_step;
      bool accepted = false;
      for (int h = 0; h < opts.max_halvings; ++h, t *= opts.shrink) {
        const Matrix trial = f + t * dir;
        const double value = objective(implied_sigma(trial, sigma, known_bases), c);
        if (value >= current + opts.armijo * t * slope) {
          f = trial;
          current = value;
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        if (!f_exhausted_logged) {
          out.diagnostics.emplace_back("F line search exhausted at cycle " + std::to_string(cycle));
          f_exhausted_logged = true;
        }
        break;
      }
      f_step = std::min(2.0 * t, 1e6);
    }

    if (current < start) {
      throw NumericalError("log-likelihood decreased during cycle " + std::to_string(cycle));
    }
    out.objective_trace.push_back(current);
    out.iterations = cycle;
    if ((current - start) / n <= opts.tol) {
      out.converged = true;
      break;
    }
  }

  // Fix the scale ambiguity between sigma_0 and F.
  const double norm = f.norm();
  if (norm > 0.0) {
    f /= norm;
    sigma(0) *= norm * norm;
  }
  out.f_hat = f;
  out.sigma_hat = sigma;
  out.sigma_matrix = SymMatrix(implied_sigma(f, sigma, known_bases));
  out.stationarity_residual = stationarity_residual(c, known_bases, f, sigma);
  return out;
}

}  // namespace relest
