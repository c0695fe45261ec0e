#include "relest/scenario.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "relest/classical.hpp"
#include "relest/covmle.hpp"
#include "relest/csv.hpp"
#include "relest/efa.hpp"
#include "relest/error.hpp"

namespace relest {

namespace {

using json = nlohmann::ordered_json;

constexpr int kConfigVersion = 1;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

ItemResponseMatrix dichotomize(const SampleSet& s) {
  Matrix items(s.n(), s.dim());
  for (Eigen::Index i = 0; i < s.n(); ++i)
    for (Eigen::Index j = 0; j < s.dim(); ++j) items(i, j) = s.rows(i, j) > s.mu(j) ? 1.0 : 0.0;
  return ItemResponseMatrix(std::move(items));
}

void estimate_one(BenchMethod method, const Scenario& sc, std::span<const SymMatrix> bases, std::size_t error_basis,
                  const CovMleSettings& covmle, ReplicationOutcome& out) {
  try {
    double estimate = 0.0;
    switch (method) {
      case BenchMethod::kKr20:
        estimate = kr20(dichotomize(sc.samples)).coefficient;
        break;
      case BenchMethod::kEfa: {
        const FactorModel model = extract_factors(correlation_matrix(sc.samples), FixedFactors{1});
        estimate = efa_reliability(model).coefficient;
        break;
      }
      case BenchMethod::kCovMle: {
        EstimateOptions opts;
        opts.max_iter = covmle.max_iter;
        opts.tol = covmle.tol;
        // Replications already run in parallel; keep the inner kernels serial.
        opts.exec = Execution::kSerial;
        const EstimationResult est = estimate_sigma(sc.scatter, bases, opts);
        out.converged = est.converged;
        estimate = reliability_from_components(est, bases, error_basis).coefficient;
        break;
      }
    }
    if (!std::isfinite(estimate)) throw NumericalError("non-finite estimate");
    out.estimate = estimate;
    out.error_pct = 100.0 * std::abs(estimate - out.truth) / out.truth;
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (d < 1) throw InputError("scenario dimension must be >= 1");
  if (bases.empty()) throw InputError("scenario needs at least one basis");
  if (sigma_true.size() != static_cast<Eigen::Index>(bases.size())) {
    throw InputError("scenario has " + std::to_string(bases.size()) + " bases but " +
                     std::to_string(sigma_true.size()) + " true coefficients");
  }
  if ((sigma_true.array() < 0.0).any()) throw InputError("true coefficients must be non-negative");
  if (error_basis >= bases.size()) throw InputError("error_basis index out of range");
  if (n < 1) throw InputError("samples per replication must be >= 1");
  if (replications < 1) throw InputError("replications must be >= 1");
}

std::vector<SymMatrix> build_bases(const ScenarioConfig& cfg) {
  std::vector<SymMatrix> out;
  out.reserve(cfg.bases.size());
  for (const auto& spec : cfg.bases) {
    switch (spec.kind) {
      case BasisSpec::Kind::kAr1:
        out.push_back(ar1_matrix(cfg.d, spec.rho));
        break;
      case BasisSpec::Kind::kIdentity:
        out.push_back(SymMatrix::identity(cfg.d));
        break;
      case BasisSpec::Kind::kFile: {
        SymMatrix m = read_matrix_csv(spec.path);
        if (m.dim() != cfg.d) {
          throw InputError(spec.path + ": basis dimension " + std::to_string(m.dim()) + " does not match d = " +
                           std::to_string(cfg.d));
        }
        out.push_back(std::move(m));
        break;
      }
    }
  }
  return out;
}

ScenarioConfig reference_scenario() {
  ScenarioConfig cfg;
  cfg.d = 5;
  cfg.bases = {{BasisSpec::Kind::kAr1, 0.9, {}}, {BasisSpec::Kind::kAr1, 0.6, {}}, {BasisSpec::Kind::kAr1, 0.3, {}}};
  cfg.sigma_true = Vector(3);
  cfg.sigma_true << 0.1, 0.2, 0.3;
  cfg.error_basis = 2;
  cfg.n = 3;
  cfg.replications = 1;
  cfg.seed = RngSeed{20250101};
  return cfg;
}

Scenario generate_scenario(const ScenarioConfig& cfg, std::size_t rep, std::uint64_t group) {
  cfg.validate();
  const std::vector<SymMatrix> bases = build_bases(cfg);
  const SymMatrix sigma = assemble_sigma(bases, cfg.sigma_true);
  const SpdVerdict verdict = validate_spd(sigma);
  if (verdict != SpdVerdict::kSpd) {
    throw InputError(std::string("scenario covariance is ") + to_string(verdict) + "; check bases and coefficients");
  }
  Scenario sc;
  sc.samples = mvn_sample(Vector::Zero(cfg.d), sigma, cfg.n, Rng(cfg.seed, stream_index(group, rep)));
  sc.scatter = ScatterMatrix{SymMatrix(kernels::serial::scatter(sc.samples.rows, sc.samples.mu)), cfg.n};
  sc.true_reliability = reliability_from_components(cfg.sigma_true, bases, cfg.error_basis).coefficient;
  return sc;
}

const char* to_string(BenchMethod m) noexcept {
  switch (m) {
    case BenchMethod::kKr20:
      return "KR20";
    case BenchMethod::kEfa:
      return "EFA";
    case BenchMethod::kCovMle:
      return "COVMLE";
  }
  return "?";
}

BenchMethod parse_bench_method(const std::string& name) {
  if (name == "KR20" || name == "kr20") return BenchMethod::kKr20;
  if (name == "EFA" || name == "efa") return BenchMethod::kEfa;
  if (name == "COVMLE" || name == "covmle") return BenchMethod::kCovMle;
  throw InputError("unknown benchmark method '" + name + "' (expected KR20, EFA or COVMLE)");
}

BenchConfig default_bench_config() {
  BenchConfig cfg;
  cfg.base.bases = {{BasisSpec::Kind::kAr1, 0.9, {}},
                    {BasisSpec::Kind::kAr1, 0.6, {}},
                    {BasisSpec::Kind::kAr1, 0.3, {}},
                    {BasisSpec::Kind::kIdentity, 0.0, {}}};
  cfg.base.sigma_true = Vector(4);
  cfg.base.sigma_true << 0.1, 0.2, 0.3, 0.1;
  cfg.base.error_basis = 3;
  cfg.base.n = 5000;
  cfg.base.replications = 250;
  cfg.base.seed = RngSeed{20250101};
  cfg.base.d = 5;
  cfg.dims = {5, 10, 15, 20};
  cfg.methods = {BenchMethod::kKr20, BenchMethod::kEfa, BenchMethod::kCovMle};
  return cfg;
}

BenchConfig parse_bench_config(const json& j) {
  try {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    if (!j.contains("version")) throw InputError("config is missing the 'version' field");
    const int version = j.at("version").get<int>();
    if (version != kConfigVersion) {
      throw InputError("unsupported config version " + std::to_string(version) + " (expected " +
                       std::to_string(kConfigVersion) + ")");
    }
    BenchConfig cfg;
    if (j.contains("dims")) {
      cfg.dims = j.at("dims").get<std::vector<Eigen::Index>>();
    } else {
      cfg.dims = {j.at("d").get<Eigen::Index>()};
    }
    if (cfg.dims.empty()) throw InputError("config 'dims' is empty");
    cfg.base.d = cfg.dims.front();
    for (const auto& b : j.at("bases")) {
      BasisSpec spec;
      const std::string kind = b.at("kind").get<std::string>();
      if (kind == "ar1") {
        spec.kind = BasisSpec::Kind::kAr1;
        spec.rho = b.at("rho").get<double>();
      } else if (kind == "identity") {
        spec.kind = BasisSpec::Kind::kIdentity;
      } else if (kind == "file") {
        spec.kind = BasisSpec::Kind::kFile;
        spec.path = b.at("path").get<std::string>();
      } else {
        throw InputError("unknown basis kind '" + kind + "'");
      }
      cfg.base.bases.push_back(spec);
    }
    const auto sigma = j.at("sigma_true").get<std::vector<double>>();
    cfg.base.sigma_true = Eigen::Map<const Vector>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
    cfg.base.error_basis = j.at("error_basis").get<std::size_t>();
    cfg.base.n = j.at("n").get<Eigen::Index>();
    cfg.base.replications = j.at("replications").get<std::size_t>();
    cfg.base.seed = RngSeed{j.value("seed", std::uint64_t{0})};
    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) cfg.methods.push_back(parse_bench_method(m.get<std::string>()));
    } else {
      cfg.methods = {BenchMethod::kKr20, BenchMethod::kEfa, BenchMethod::kCovMle};
    }
    if (cfg.methods.empty()) throw InputError("config requests no methods");
    if (j.contains("covmle")) {
      const auto& c = j.at("covmle");
      cfg.covmle.max_iter = c.value("max_iter", cfg.covmle.max_iter);
      cfg.covmle.tol = c.value("tol", cfg.covmle.tol);
    }
    cfg.base.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid bench config: ") + e.what());
  }
}

BenchConfig load_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 1);
  }
  return parse_bench_config(j);
}

json bench_config_to_json(const BenchConfig& cfg) {
  json j;
  j["version"] = kConfigVersion;
  j["dims"] = cfg.dims;
  json bases = json::array();
  for (const auto& b : cfg.base.bases) {
    switch (b.kind) {
      case BasisSpec::Kind::kAr1:
        bases.push_back({{"kind", "ar1"}, {"rho", b.rho}});
        break;
      case BasisSpec::Kind::kIdentity:
        bases.push_back({{"kind", "identity"}});
        break;
      case BasisSpec::Kind::kFile:
        bases.push_back({{"kind", "file"}, {"path", b.path}});
        break;
    }
  }
  j["bases"] = bases;
  j["sigma_true"] = std::vector<double>(cfg.base.sigma_true.begin(), cfg.base.sigma_true.end());
  j["error_basis"] = cfg.base.error_basis;
  j["n"] = cfg.base.n;
  j["replications"] = cfg.base.replications;
  j["seed"] = cfg.base.seed.value;
  json methods = json::array();
  for (auto m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["covmle"] = {{"max_iter", cfg.covmle.max_iter}, {"tol", cfg.covmle.tol}};
  return j;
}

std::pair<double, double> aggregate_errors(const std::vector<double>& errors) {
  if (errors.empty()) return {0.0, 0.0};
  // Neumaier-compensated sums.
  auto stable_sum = [](const std::vector<double>& v) {
    double sum = 0.0;
    double comp = 0.0;
    for (double x : v) {
      const double t = sum + x;
      comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    return sum + comp;
  };
  const double n = static_cast<double>(errors.size());
  const double mean = stable_sum(errors) / n;
  if (errors.size() < 2) return {mean, 0.0};
  std::vector<double> sq(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i) sq[i] = (errors[i] - mean) * (errors[i] - mean);
  return {mean, std::sqrt(stable_sum(sq) / (n - 1.0))};
}

BenchTable aggregate(const std::vector<ReplicationOutcome>& outcomes, const std::vector<BenchMethod>& methods) {
  BenchTable table;
  for (BenchMethod m : methods) {
    BenchRow row;
    row.method = m;
    std::vector<double> errors;
    for (const auto& o : outcomes) {
      if (o.method != m) continue;
      if (o.error_pct) {
        errors.push_back(*o.error_pct);
      } else {
        ++row.failures;
      }
    }
    row.replications = errors.size();
    std::tie(row.avg_error_pct, row.std_dev) = aggregate_errors(errors);
    table.rows.push_back(row);
  }
  return table;
}

BenchResult run_sweep(const BenchConfig& cfg, Execution exec) {
  if (cfg.methods.empty()) throw InputError("benchmark needs at least one method");
  if (cfg.dims.empty()) throw InputError("benchmark needs at least one dimension");
  cfg.base.validate();

  BenchResult result;
  result.manifest.config = bench_config_to_json(cfg);
  result.manifest.seed = cfg.base.seed.value;
  result.manifest.version = RELEST_VERSION;
  result.manifest.started = utc_now();
  result.manifest.threads = exec == Execution::kParallel ? kernels::max_threads() : 1;

  const std::size_t reps = cfg.base.replications;
  const std::size_t n_methods = cfg.methods.size();
  std::vector<ReplicationOutcome> outcomes(cfg.dims.size() * reps * n_methods);

  for (std::size_t slot = 0; slot < cfg.dims.size(); ++slot) {
    ScenarioConfig sc = cfg.base;
    sc.d = cfg.dims[slot];
    // Validates the assembled Sigma once, before any sampling.
    const std::vector<SymMatrix> bases = build_bases(sc);
    const SymMatrix sigma = assemble_sigma(bases, sc.sigma_true);
    if (validate_spd(sigma) != SpdVerdict::kSpd) {
      throw InputError("scenario covariance at d = " + std::to_string(sc.d) + " is not SPD");
    }
    const double truth = reliability_from_components(sc.sigma_true, bases, sc.error_basis).coefficient;
    if (!(truth > 0.0)) throw InputError("true reliability must be positive for relative errors");

    const auto count = static_cast<std::int64_t>(reps);
    auto body = [&](std::int64_t r) {
      const auto rep = static_cast<std::size_t>(r);
      Scenario scenario;
      scenario.samples = mvn_sample(Vector::Zero(sc.d), sigma, sc.n, Rng(sc.seed, stream_index(slot, rep)));
      scenario.scatter = ScatterMatrix{SymMatrix(kernels::serial::scatter(scenario.samples.rows, scenario.samples.mu)), sc.n};
      scenario.true_reliability = truth;
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        ReplicationOutcome& o = outcomes[(slot * reps + rep) * n_methods + mi];
        o.d = sc.d;
        o.replication = rep;
        o.method = cfg.methods[mi];
        o.truth = truth;
        estimate_one(o.method, scenario, bases, sc.error_basis, cfg.covmle, o);
      }
    };
    if (exec == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t r = 0; r < count; ++r) body(r);
    } else {
      for (std::int64_t r = 0; r < count; ++r) body(r);
    }
  }

  result.table = aggregate(outcomes, cfg.methods);
  result.manifest.outcomes = std::move(outcomes);
  result.manifest.finished = utc_now();
  return result;
}

BenchResult run_benchmark(const ScenarioConfig& cfg, const std::vector<BenchMethod>& methods, Execution exec,
                          CovMleSettings covmle) {
  BenchConfig bc;
  bc.base = cfg;
  bc.dims = {cfg.d};
  bc.methods = methods;
  bc.covmle = covmle;
  return run_sweep(bc, exec);
}

}  // namespace relest
