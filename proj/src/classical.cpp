#include "relest/classical.hpp"

#include <cmath>
#include <sstream>

#include "relest/error.hpp"

namespace relest {

namespace {

void require_binary(const ItemResponseMatrix& m, const char* what) {
  if (m.kind() != ItemKind::kBinary) {
    throw InputError(std::string(what) + " requires binary (0/1) item scores");
  }
}

void flag_range(ReliabilityReport& report) {
  if (report.coefficient < 0.0 || report.coefficient > 1.0) {
    report.diagnostics["out_of_range"] = "coefficient outside [0,1]; check item data";
  }
}

double kr_coefficient(double k, double item_variance_sum, double sigma_x2) {
  return k / (k - 1.0) * (1.0 - item_variance_sum / sigma_x2);
}

}  // namespace

ItemResponseMatrix::ItemResponseMatrix(Matrix scores) : scores_(std::move(scores)), kind_(ItemKind::kBinary) {
  if (scores_.rows() < 2) throw InputError("item matrix needs at least 2 subjects");
  if (scores_.cols() < 2) throw InputError("item matrix needs at least 2 items");
  if (!scores_.allFinite()) throw InputError("item matrix has non-finite or missing scores");
  for (Eigen::Index i = 0; i < scores_.size(); ++i) {
    const double v = scores_.data()[i];
    if (v != 0.0 && v != 1.0) {
      kind_ = ItemKind::kReal;
      break;
    }
  }
}

const char* to_string(ReliabilityMethod m) noexcept {
  switch (m) {
    case ReliabilityMethod::kKr20:
      return "KR20";
    case ReliabilityMethod::kKr21:
      return "KR21";
    case ReliabilityMethod::kDefinitional:
      return "DEFINITIONAL";
    case ReliabilityMethod::kEfaOmega:
      return "EFA_OMEGA";
    case ReliabilityMethod::kCovMle:
      return "COVMLE";
    case ReliabilityMethod::kIcc:
      return "ICC";
  }
  return "?";
}

ItemStats item_stats(const ItemResponseMatrix& m, VarianceDivisor divisor) {
  require_binary(m, "item_stats");
  ItemStats s;
  s.p = m.scores().colwise().mean().transpose();
  s.p_bar = s.p.mean();
  const Vector sums = m.scores().rowwise().sum();
  const double centred_ss = (sums.array() - sums.mean()).square().sum();
  const double n = static_cast<double>(m.n());
  s.sigma_x2 = centred_ss / (divisor == VarianceDivisor::kPopulation ? n : n - 1.0);
  return s;
}

ReliabilityReport kr20(const ItemResponseMatrix& m, VarianceDivisor divisor) {
  const ItemStats s = item_stats(m, divisor);
  if (s.sigma_x2 <= 0.0) throw DomainError("KR20 undefined: every subject has the same sum score");
  const double n = static_cast<double>(m.n());
  // Item variances follow the same divisor as sigma_x2.
  const double scale = divisor == VarianceDivisor::kPopulation ? 1.0 : n / (n - 1.0);
  const double item_var = scale * (s.p.array() * (1.0 - s.p.array())).sum();
  ReliabilityReport r;
  r.method = ReliabilityMethod::kKr20;
  r.coefficient = kr_coefficient(static_cast<double>(m.k()), item_var, s.sigma_x2);
  r.diagnostics["sigma_x2"] = std::to_string(s.sigma_x2);
  flag_range(r);
  return r;
}

ReliabilityReport kr21(const ItemResponseMatrix& m, VarianceDivisor divisor) {
  const ItemStats s = item_stats(m, divisor);
  if (s.sigma_x2 <= 0.0) throw DomainError("KR21 undefined: every subject has the same sum score");
  const double n = static_cast<double>(m.n());
  const double k = static_cast<double>(m.k());
  const double scale = divisor == VarianceDivisor::kPopulation ? 1.0 : n / (n - 1.0);
  ReliabilityReport r;
  r.method = ReliabilityMethod::kKr21;
  r.coefficient = kr_coefficient(k, scale * k * s.p_bar * (1.0 - s.p_bar), s.sigma_x2);
  r.diagnostics["sigma_x2"] = std::to_string(s.sigma_x2);
  flag_range(r);
  return r;
}

ReliabilityReport reliability_definitional(double v_x, double sigma_eps2) {
  if (!(v_x > 0.0)) throw DomainError("observed variance must be positive");
  if (!(sigma_eps2 >= 0.0)) throw DomainError("error variance must be non-negative");
  if (sigma_eps2 > v_x) throw DomainError("error variance exceeds observed variance");
  ReliabilityReport r;
  r.method = ReliabilityMethod::kDefinitional;
  r.coefficient = 1.0 - sigma_eps2 / v_x;
  return r;
}

MeanVarianceDecomposition variance_of_mean(double sigma2, Eigen::Index k, double cov_sum) {
  if (k < 1) throw InputError("variance_of_mean: k must be >= 1");
  if (!(sigma2 >= 0.0)) throw DomainError("variance_of_mean: sigma2 must be non-negative");
  const double kd = static_cast<double>(k);
  // Single division keeps the perfectly-correlated case at sigma2 up to rounding.
  MeanVarianceDecomposition out{k, sigma2, cov_sum, (kd * sigma2 + 2.0 * cov_sum) / (kd * kd)};
  if (out.var_of_mean < 0.0) {
    std::ostringstream msg;
    msg << "variance_of_mean: covariance sum " << cov_sum
        << " implies a negative variance (indefinite covariance)";
    throw DomainError(msg.str());
  }
  return out;
}

double linear_combination_variance(const Vector& beta, const SymMatrix& sigma) {
  if (beta.size() != sigma.dim()) throw InputError("weight vector and covariance dimensions differ");
  return beta.dot(sigma.matrix() * beta);
}

}  // namespace relest
