#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "relest/core.hpp"
#include "relest/kernels.hpp"
#include "relest/rng.hpp"

namespace relest {

struct BasisSpec {
  enum class Kind { kAr1, kIdentity, kFile };
  Kind kind = Kind::kAr1;
  double rho = 0.0;
  std::string path;  // kFile only
};

/// One simulated design: Sigma = sum sigma_true[g] * basis_g(d).
struct ScenarioConfig {
  Eigen::Index d = 5;
  std::vector<BasisSpec> bases;
  Vector sigma_true;
  std::size_t error_basis = 0;
  Eigen::Index n = 1000;
  std::size_t replications = 1;
  RngSeed seed{0};

  /// Throws InputError on inconsistent lengths or counts.
  void validate() const;
};

/// Materialises the basis matrices at dimension d.
std::vector<SymMatrix> build_bases(const ScenarioConfig& cfg);

/// d = 5, AR(1) bases rho = 0.9/0.6/0.3 with sigma = (0.1, 0.2, 0.3) and n = 3.
/// With no identity basis, the rho = 0.3 basis is designated as error.
ScenarioConfig reference_scenario();

struct Scenario {
  SampleSet samples;
  ScatterMatrix scatter;
  double true_reliability = 0.0;
};

/// Draws replication `rep` of `cfg` on RNG substream (group, rep).
/// Throws InputError before sampling if the assembled Sigma is not SPD.
Scenario generate_scenario(const ScenarioConfig& cfg, std::size_t rep, std::uint64_t group = 0);

enum class BenchMethod { kKr20, kEfa, kCovMle };

const char* to_string(BenchMethod m) noexcept;
BenchMethod parse_bench_method(const std::string& name);

struct CovMleSettings {
  int max_iter = 1000;
  double tol = 1e-3;
};

/// A sweep over dimensions; every dimension runs `base.replications` replications.
struct BenchConfig {
  ScenarioConfig base;
  std::vector<Eigen::Index> dims;
  std::vector<BenchMethod> methods;
  CovMleSettings covmle;
};

/// The documented default sweep: d in {5, 10, 15, 20}, 250 replications each, n = 5000,
/// AR(1) bases 0.9/0.6/0.3 with sigma (0.1, 0.2, 0.3) plus an identity error basis at 0.1.
BenchConfig default_bench_config();

/// Versioned JSON config. Throws ParseError/InputError on malformed content.
BenchConfig parse_bench_config(const nlohmann::ordered_json& j);
BenchConfig load_bench_config(const std::string& path);
nlohmann::ordered_json bench_config_to_json(const BenchConfig& cfg);

struct ReplicationOutcome {
  Eigen::Index d = 0;
  std::size_t replication = 0;
  BenchMethod method = BenchMethod::kKr20;
  double truth = 0.0;
  std::optional<double> estimate;
  std::optional<double> error_pct;  // 100 |estimate - truth| / truth
  bool converged = true;
  std::string failure;
};

struct BenchRow {
  BenchMethod method = BenchMethod::kKr20;
  double avg_error_pct = 0.0;
  double std_dev = 0.0;
  std::size_t replications = 0;  // successful replications in the aggregate
  std::size_t failures = 0;
};

struct BenchTable {
  std::vector<BenchRow> rows;
};

struct RunManifest {
  nlohmann::ordered_json config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started;
  std::string finished;
  int threads = 1;
  std::vector<ReplicationOutcome> outcomes;
};

struct BenchResult {
  BenchTable table;
  RunManifest manifest;
};

/// Mean and sample standard deviation, compensated summation in the given order.
std::pair<double, double> aggregate_errors(const std::vector<double>& errors);

/// Groups outcomes by method (in `methods` order) and aggregates successful errors.
BenchTable aggregate(const std::vector<ReplicationOutcome>& outcomes, const std::vector<BenchMethod>& methods);

/// Runs every replication of every dimension. Replication (slot, rep) uses RNG
/// substream (slot, rep), so serial and parallel execution give identical tables.
BenchResult run_sweep(const BenchConfig& cfg, Execution exec = Execution::kParallel);

/// Single-dimension benchmark at cfg.d.
BenchResult run_benchmark(const ScenarioConfig& cfg, const std::vector<BenchMethod>& methods,
                          Execution exec = Execution::kParallel, CovMleSettings covmle = {});

}  // namespace relest
