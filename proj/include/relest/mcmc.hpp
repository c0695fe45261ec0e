#pragma once

#include <optional>
#include <vector>

#include "relest/rng.hpp"

namespace relest {

/// Observations X with the per-observation interaction weight exp(-phi_scale |theta - x_i|).
/// The likelihood standard deviation is fixed at 1.
struct LatentThetaModel {
  std::vector<double> observations;
  double phi_scale = 0.1;
};

/// N(xi; theta, 1) density.
double likelihood(double xi, double theta);

/// exp(-scale |theta - xi|).
double phi(double theta, double xi, double scale);

/// sum_i [log likelihood(x_i, theta) + log phi(theta, x_i)].
double log_joint_prob(const LatentThetaModel& model, double theta);

/// exp(log_joint_prob); underflows to 0 for long, distant data.
double joint_prob(const LatentThetaModel& model, double theta);

enum class AcceptanceRule {
  kLogSpace,       // min(1, exp(log p* - log p))
  kSmoothed,  // min(1, (p* + 1e-12) / (p + 1e-12)) in linear space
};

/// Metropolis acceptance probability from two log densities.
double acceptance_probability(double log_p_star, double log_p, AcceptanceRule rule);

struct McmcChain {
  std::vector<double> samples;
  double acceptance_rate = 0.0;
  RngSeed seed;
  double proposal_sd = 0.5;
};

struct MetropolisOptions {
  double proposal_sd = 0.5;
  std::optional<double> init;  // default: standard normal draw
  AcceptanceRule rule = AcceptanceRule::kLogSpace;
};

/// Random-walk Metropolis with N(theta, proposal_sd^2) proposals. The current theta
/// is appended after every step, so the chain has exactly `iterations` samples.
McmcChain metropolis(const LatentThetaModel& model, std::size_t iterations, RngSeed seed,
                     const MetropolisOptions& opts = {});

struct ChainSummary {
  double mean = 0.0;
  double variance = 0.0;
  double acceptance_rate = 0.0;
  double effective_sample_size = 0.0;
  bool degenerate = false;  // zero variance; ESS undefined
};

/// Moments after burn-in and ESS by Geyer's initial positive sequence.
/// Throws InputError when burn_in >= chain length.
ChainSummary chain_summary(const McmcChain& chain, std::size_t burn_in);

/// ESS of an arbitrary series (same estimator as chain_summary).
double effective_sample_size(const std::vector<double>& series);

}  // namespace relest
