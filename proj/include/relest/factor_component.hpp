#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relest/core.hpp"

namespace relest {

/// Sigma = sigma_0 F F^T + sum_{g>=1} sigma_g G_g with F (d x r) unknown.
///
/// F is identified only up to F -> F Q for orthogonal Q, and jointly with sigma_0
/// only up to scale; results are normalised to ||F||_F = 1. Compare F F^T or the
/// fitted Sigma, never F entrywise.
struct FactorComponentResult {
  Matrix f_hat;
  Vector sigma_hat;                     // sigma_0 first, then the known-basis coefficients
  SymMatrix sigma_matrix;
  std::vector<double> objective_trace;  // log-likelihood after each cycle (index 0 = start)
  int iterations = 0;
  bool converged = false;
  double stationarity_residual = 0.0;
  std::vector<std::string> diagnostics;
};

struct FactorComponentOptions {
  int max_iter = 20000;         // alternating cycles
  double tol = 1e-14;           // per-sample log-likelihood gain per cycle
  int sigma_steps = 5;          // safeguarded scoring steps per cycle
  int f_steps = 5;              // line-searched gradient steps per cycle
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_halvings = 60;
  bool fix_sigma0_zero = false; // switches the unknown component off
  std::optional<Matrix> init_f;
  std::optional<Vector> init_sigma;  // length 1 + number of known bases
};

/// Gradient of the log-likelihood with respect to F: n sigma_0 (S^-1 C S^-1 - S^-1) F.
Matrix loglik_gradient_f(const Matrix& c, double n, const SymMatrix& sigma, const Matrix& f, double sigma0);

/// Largest per-sample stationarity violation over the F gradient and the sigma scores.
double stationarity_residual(const ScatterMatrix& c, std::span<const SymMatrix> known_bases, const Matrix& f,
                             const Vector& sigma);

/// Alternating ascent: safeguarded scoring in sigma with F F^T as basis G_0, then
/// Armijo-backtracked gradient ascent in F. The objective trace never decreases.
FactorComponentResult estimate_with_unknown_g0(const ScatterMatrix& c, std::span<const SymMatrix> known_bases,
                                               Eigen::Index rank, const FactorComponentOptions& opts = {});

}  // namespace relest
