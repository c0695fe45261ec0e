#include "relest/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "relest/core.hpp"
#include "relest/error.hpp"

namespace relest {

namespace {

const double kLogInvSqrt2Pi = -0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

double likelihood(double xi, double theta) {
  const double z = xi - theta;
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double phi(double theta, double xi, double scale) { return std::exp(-scale * std::abs(theta - xi)); }

double log_joint_prob(const LatentThetaModel& model, double theta) {
  double acc = 0.0;
  for (double x : model.observations) {
    const double z = x - theta;
    acc += kLogInvSqrt2Pi - 0.5 * z * z - model.phi_scale * std::abs(z);
  }
  return acc;
}

double joint_prob(const LatentThetaModel& model, double theta) { return std::exp(log_joint_prob(model, theta)); }

double acceptance_probability(double log_p_star, double log_p, AcceptanceRule rule) {
  if (rule == AcceptanceRule::kSmoothed) {
    const double ratio = (std::exp(log_p_star) + 1e-12) / (std::exp(log_p) + 1e-12);
    return std::min(1.0, ratio);
  }
  const double diff = log_p_star - log_p;
  if (diff >= 0.0) return 1.0;
  return std::exp(diff);
}

McmcChain metropolis(const LatentThetaModel& model, std::size_t iterations, RngSeed seed,
                     const MetropolisOptions& opts) {
  if (!(opts.proposal_sd > 0.0)) throw DomainError("proposal standard deviation must be positive");
  if (model.phi_scale < 0.0) throw DomainError("phi scale must be non-negative");

  McmcChain chain;
  chain.seed = seed;
  chain.proposal_sd = opts.proposal_sd;
  chain.samples.reserve(iterations);

  NormalSampler normal(Rng(seed, 0));
  Rng uniform(seed, 1);
  double theta = opts.init ? *opts.init : normal();
  double log_p = log_joint_prob(model, theta);
  std::size_t accepted = 0;
  for (std::size_t t = 0; t < iterations; ++t) {
    const double proposal = theta + opts.proposal_sd * normal();
    const double log_p_star = log_joint_prob(model, proposal);
    const double alpha = acceptance_probability(log_p_star, log_p, opts.rule);
    if (uniform.uniform() < alpha) {
      theta = proposal;
      log_p = log_p_star;
      ++accepted;
    }
    chain.samples.push_back(theta);
  }
  chain.acceptance_rate = iterations == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(iterations);
  return chain;
}

double effective_sample_size(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) return static_cast<double>(n);
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(series.size());
  for (std::size_t i = 0; i < n; ++i) c[i] = series[i] - mean;
  auto autocov = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += c[i] * c[i + lag];
    return acc / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return 0.0;
  // Initial positive sequence: sum pairs Gamma_k = rho(2k) + rho(2k+1) while positive.
  double tau = -1.0;
  // Lags are capped so a near-random-walk chain stays O(n * kMaxLag).
  constexpr std::size_t kMaxLag = 10000;
  for (std::size_t k = 0; 2 * k + 1 < n && 2 * k + 1 <= kMaxLag; ++k) {
    const double gamma = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (gamma <= 0.0) break;
    tau += 2.0 * gamma;
  }
  tau = std::max(tau, 1.0 / static_cast<double>(n));
  return static_cast<double>(n) / tau;
}

ChainSummary chain_summary(const McmcChain& chain, std::size_t burn_in) {
  if (burn_in >= chain.samples.size()) throw InputError("burn-in must be shorter than the chain");
  const std::vector<double> kept(chain.samples.begin() + static_cast<std::ptrdiff_t>(burn_in), chain.samples.end());
  ChainSummary s;
  s.acceptance_rate = chain.acceptance_rate;
  const double n = static_cast<double>(kept.size());
  s.mean = std::accumulate(kept.begin(), kept.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : kept) ss += (v - s.mean) * (v - s.mean);
  s.variance = kept.size() > 1 ? ss / (n - 1.0) : 0.0;
  s.degenerate = !(ss > 0.0);
  s.effective_sample_size = s.degenerate ? 0.0 : effective_sample_size(kept);
  return s;
}

}  // namespace relest
