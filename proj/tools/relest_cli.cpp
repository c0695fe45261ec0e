// relest: reliability estimation and simulation benchmark front end.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 numerical failure (including non-convergence under --strict).

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relest/anova.hpp"
#include "relest/classical.hpp"
#include "relest/cochran.hpp"
#include "relest/covmle.hpp"
#include "relest/csv.hpp"
#include "relest/efa.hpp"
#include "relest/error.hpp"
#include "relest/factor_component.hpp"
#include "relest/kernels.hpp"
#include "relest/mcmc.hpp"
#include "relest/plot.hpp"
#include "relest/report.hpp"
#include "relest/scenario.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace relest;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;
constexpr std::uint64_t kDefaultSeed = 20250101;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "text";
  bool strict = false;
  int threads = 0;
};

// Raised when --strict turns a warning into a failure.
struct StrictFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RngSeed resolve_seed(const Globals& g) {
  if (g.seed) return RngSeed{*g.seed};
  if (const char* env = std::getenv("RELEST_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return RngSeed{v};
    } catch (const std::exception&) {
      throw InputError(std::string("RELEST_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return RngSeed{kDefaultSeed};
}

void warn(const Globals& g, const std::string& msg) {
  if (g.strict) throw StrictFailure(msg);
  std::cerr << "relest: warning: " << msg << '\n';
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!s.empty()) s += ' ';
      s += scalar_text(e);
    }
    return s;
  }
  return v.dump();
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array() && !j.empty() && (j.front().is_array() || j.front().is_object())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(prefix, scalar_text(j));
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string render_document(const json& doc, ReportFormat format) {
  if (format == ReportFormat::kJson) return doc.dump(2) + "\n";
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(doc, "", rows);
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << "key,value\n";
    for (const auto& [k, v] : rows) out << csv_field(k) << ',' << csv_field(v) << '\n';
  } else {
    std::size_t w = 0;
    for (const auto& [k, v] : rows) w = std::max(w, k.size());
    for (const auto& [k, v] : rows) out << k << std::string(w - k.size() + 2, ' ') << v << '\n';
  }
  return out.str();
}

void write_output(const Globals& g, const std::string& content) {
  if (g.out.empty() || g.out == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    write_text_file(g.out, content);
  }
}

json vector_json(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

json report_json(const ReliabilityReport& r) {
  json j;
  j["method"] = to_string(r.method);
  j["coefficient"] = r.coefficient;
  if (!r.diagnostics.empty()) {
    json d;
    for (const auto& [k, v] : r.diagnostics) d[k] = v;
    j["diagnostics"] = d;
  }
  return j;
}

ItemResponseMatrix load_items(const std::string& path) { return ingest_items(read_csv(path)); }

// --- kr20 / kr21 -----------------------------------------------------------

int run_kr(const Globals& g, const std::string& path, bool sample_divisor, bool kr21_variant) {
  const ItemResponseMatrix items = load_items(path);
  const VarianceDivisor div = sample_divisor ? VarianceDivisor::kSample : VarianceDivisor::kPopulation;
  const ReliabilityReport r = kr21_variant ? kr21(items, div) : kr20(items, div);
  const ItemStats stats = item_stats(items, div);
  json doc = report_json(r);
  doc["n"] = items.n();
  doc["k"] = items.k();
  doc["p_bar"] = stats.p_bar;
  doc["total_variance"] = stats.sigma_x2;
  doc["item_p"] = vector_json(stats.p);
  if (r.diagnostics.count("out_of_range")) warn(g, "coefficient lies outside [0, 1]");
  write_output(g, render_document(doc, parse_report_format(g.format)));
  return kExitOk;
}

// --- anova -----------------------------------------------------------------

int run_anova(const Globals& g, const std::string& path, std::optional<std::pair<std::size_t, std::size_t>> pair) {
  const GroupedObservations groups = ingest_groups(read_csv(path));
  const AnovaTable t = oneway_f_test(groups);
  json doc;
  doc["groups"] = groups.k();
  doc["n"] = groups.n();
  doc["total_ss"] = t.total_ss;
  doc["between_ss"] = t.between_ss;
  doc["within_ss"] = t.within_ss;
  doc["df_between"] = t.df_between;
  doc["df_within"] = t.df_within;
  if (t.bms) doc["bms"] = *t.bms;
  if (t.wms) doc["wms"] = *t.wms;
  if (t.f_stat) doc["f"] = *t.f_stat;
  if (t.p_value) doc["p_value"] = *t.p_value;
  if (groups.balanced_size()) {
    const VarianceComponents vc = estimate_random_effects(groups);
    doc["sigma_a2"] = vc.sigma_a2;
    doc["sigma2"] = vc.sigma2;
    doc["icc"] = icc(vc).coefficient;
    if (vc.projected) warn(g, "negative between-group variance estimate was set to zero");
  }
  if (pair) {
    const TTestResult tt = pairwise_t_test(groups, pair->first, pair->second);
    doc["t_test"] = {{"i", pair->first}, {"j", pair->second}, {"t", tt.t_stat}, {"df", tt.df}, {"p_value", tt.p_value}};
  }
  write_output(g, render_document(doc, parse_report_format(g.format)));
  return kExitOk;
}

// --- efa -------------------------------------------------------------------

int run_efa(const Globals& g, const std::string& path, std::optional<int> factors, bool rotate_varimax) {
  const SampleSet samples = ingest_samples(read_csv(path));
  const SymMatrix r = correlation_matrix(samples);
  const RetentionRule rule = factors ? RetentionRule{FixedFactors{*factors}} : RetentionRule{KaiserRule{}};
  FactorModel model = extract_factors(r, rule);
  if (rotate_varimax && model.m() > 1) model = varimax(model);
  json doc;
  doc["factors"] = model.m();
  doc["eigenvalues"] = vector_json(model.eigenvalues);
  doc["loadings"] = matrix_json(model.loadings);
  doc["communalities"] = vector_json(model.communalities);
  doc["uniquenesses"] = vector_json(model.uniquenesses);
  doc["factor_contributions"] = vector_json(model.factor_contributions);
  if (model.m() == 1) doc["omega"] = report_json(efa_reliability(model));
  for (const auto& [k, v] : model.diagnostics) warn(g, k + ": " + v);
  write_output(g, render_document(doc, parse_report_format(g.format)));
  return kExitOk;
}

// --- covmle ----------------------------------------------------------------

// "ar1:0.9", "identity", or "file:path/to/matrix.csv".
SymMatrix parse_basis(const std::string& spec, Eigen::Index d) {
  if (spec == "identity") return SymMatrix::identity(d);
  if (spec.rfind("ar1:", 0) == 0) {
    double rho = 0.0;
    try {
      rho = std::stod(spec.substr(4));
    } catch (const std::exception&) {
      throw InputError("bad AR(1) coefficient in basis '" + spec + "'");
    }
    return ar1_matrix(d, rho);
  }
  if (spec.rfind("file:", 0) == 0) {
    const std::string file = spec.substr(5);
    SymMatrix m = read_matrix_csv(file);
    if (m.dim() != d) throw InputError(file + ": basis is " + std::to_string(m.dim()) + "x" + std::to_string(m.dim()) +
                                       " but the data has dimension " + std::to_string(d));
    return m;
  }
  throw InputError("unknown basis '" + spec + "' (expected ar1:RHO, identity or file:PATH)");
}

struct CovmleArgs {
  std::string data;
  std::string scatter;
  long long n_scatter = 0;
  bool centered = false;
  std::vector<std::string> bases;
  std::optional<std::size_t> error_basis;
  int max_iter = 1000;
  double tol = 1e-3;
  std::optional<int> unknown_rank;
  bool serial = false;
};

int run_covmle(const Globals& g, const CovmleArgs& a) {
  ScatterMatrix c;
  if (!a.data.empty()) {
    const SampleSet s = ingest_samples(read_csv(a.data));
    c = a.centered ? scatter_matrix_centered(s) : scatter_matrix(s);
  } else {
    if (a.n_scatter < 1) throw InputError("--scatter requires --n (the sample count behind the matrix)");
    c = ScatterMatrix{read_matrix_csv(a.scatter), static_cast<Eigen::Index>(a.n_scatter)};
  }
  std::vector<SymMatrix> bases;
  for (const auto& spec : a.bases) bases.push_back(parse_basis(spec, c.c.dim()));

  json doc;
  doc["d"] = c.c.dim();
  doc["n"] = c.n_used;
  doc["bases"] = a.bases;

  if (a.unknown_rank) {
    const FactorComponentResult r = estimate_with_unknown_g0(c, bases, *a.unknown_rank);
    doc["sigma_hat"] = vector_json(r.sigma_hat);
    doc["f_hat"] = matrix_json(r.f_hat);
    doc["iterations"] = r.iterations;
    doc["converged"] = r.converged;
    doc["stationarity_residual"] = r.stationarity_residual;
    doc["log_likelihood"] = r.objective_trace;
    if (!r.diagnostics.empty()) doc["diagnostics"] = r.diagnostics;
    write_output(g, render_document(doc, parse_report_format(g.format)));
    if (!r.converged) warn(g, "alternating ascent did not converge in " + std::to_string(r.iterations) + " cycles");
    return kExitOk;
  }

  EstimateOptions opts;
  opts.max_iter = a.max_iter;
  opts.tol = a.tol;
  opts.exec = a.serial ? Execution::kSerial : Execution::kParallel;
  const EstimationResult r = estimate_sigma(c, bases, opts);
  doc["sigma_hat"] = vector_json(r.sigma_hat);
  doc["iterations"] = r.iterations;
  doc["residual"] = r.residual;
  doc["converged"] = r.converged;
  doc["log_likelihood"] = log_likelihood(r.sigma_matrix, c);
  if (!r.projected.empty()) doc["projected"] = r.projected;
  if (r.jittered) doc["jittered"] = true;
  if (a.error_basis) doc["reliability"] = report_json(reliability_from_components(r, bases, *a.error_basis));
  json trace = json::array();
  for (const auto& v : r.trace) trace.push_back(vector_json(v));
  doc["trace"] = trace;
  write_output(g, render_document(doc, parse_report_format(g.format)));
  if (!r.converged) {
    warn(g, "estimate_sigma stopped after " + std::to_string(r.iterations) + " iterations with step " +
                std::to_string(r.residual));
  }
  return kExitOk;
}

// --- mcmc ------------------------------------------------------------------

struct McmcArgs {
  std::vector<double> observations;
  std::string observations_file;
  std::size_t iterations = 1000;
  double proposal_sd = 0.5;
  double phi_scale = 0.1;
  double burn_in = 0.2;
  std::optional<double> init;
  std::string rule = "log";
  std::string samples_out;
  std::string plot_out;
};

int run_mcmc(const Globals& g, const McmcArgs& a) {
  LatentThetaModel model;
  model.phi_scale = a.phi_scale;
  model.observations = a.observations;
  if (!a.observations_file.empty()) {
    const SampleSet s = ingest_samples(read_csv(a.observations_file));
    if (s.dim() != 1) throw InputError(a.observations_file + ": expected a single observation column");
    for (Eigen::Index i = 0; i < s.n(); ++i) model.observations.push_back(s.rows(i, 0));
  }
  if (model.observations.empty()) throw InputError("mcmc needs observations (--obs or --obs-file)");

  MetropolisOptions opts;
  opts.proposal_sd = a.proposal_sd;
  opts.init = a.init;
  if (a.rule == "log") {
    opts.rule = AcceptanceRule::kLogSpace;
  } else if (a.rule == "smoothed") {
    opts.rule = AcceptanceRule::kSmoothed;
  } else {
    throw InputError("unknown acceptance rule '" + a.rule + "' (expected log or smoothed)");
  }
  const RngSeed seed = resolve_seed(g);
  const McmcChain chain = metropolis(model, a.iterations, seed, opts);
  // burn_in < 1 is a fraction of the chain, otherwise a sample count.
  const auto burn = a.burn_in < 1.0 ? static_cast<std::size_t>(a.burn_in * static_cast<double>(a.iterations))
                                    : static_cast<std::size_t>(a.burn_in);
  const ChainSummary s = chain_summary(chain, burn);

  json doc;
  doc["seed"] = seed.value;
  doc["iterations"] = a.iterations;
  doc["burn_in"] = burn;
  doc["proposal_sd"] = a.proposal_sd;
  doc["phi_scale"] = a.phi_scale;
  doc["acceptance_rule"] = a.rule;
  doc["mean"] = s.mean;
  doc["variance"] = s.variance;
  doc["acceptance_rate"] = s.acceptance_rate;
  doc["effective_sample_size"] = s.effective_sample_size;
  if (s.degenerate) warn(g, "chain has zero variance after burn-in");

  if (!a.samples_out.empty()) {
    std::ostringstream csv;
    csv << "iteration,theta\n";
    char buf[64];
    for (std::size_t i = 0; i < chain.samples.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", chain.samples[i]);
      csv << i << ',' << buf << '\n';
    }
    write_text_file(a.samples_out, csv.str());
  }
  if (!a.plot_out.empty()) emit_trace_plot(chain, a.plot_out);
  write_output(g, render_document(doc, parse_report_format(g.format)));
  return kExitOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string config;
  std::string manifest;
  std::string plot;
  std::optional<std::size_t> replications;
  std::optional<long long> n;
  std::vector<long long> dims;
  std::vector<std::string> methods;
  bool serial = false;
};

int run_bench(const Globals& g, const BenchArgs& a) {
  BenchConfig cfg = a.config.empty() ? default_bench_config() : load_bench_config(a.config);
  if (g.seed || std::getenv("RELEST_SEED")) cfg.base.seed = resolve_seed(g);
  if (a.replications) cfg.base.replications = *a.replications;
  if (a.n) cfg.base.n = static_cast<Eigen::Index>(*a.n);
  if (!a.dims.empty()) cfg.dims.assign(a.dims.begin(), a.dims.end());
  if (!a.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(parse_bench_method(m));
  }
  cfg.base.validate();

  const BenchResult result = run_sweep(cfg, a.serial ? Execution::kSerial : Execution::kParallel);
  write_output(g, render_report(result.table, parse_report_format(g.format)));

  std::string manifest_path = a.manifest;
  if (manifest_path.empty() && !g.out.empty() && g.out != "-") manifest_path = g.out + ".manifest.json";
  if (!manifest_path.empty()) write_text_file(manifest_path, manifest_to_json(result.manifest).dump(2) + "\n");
  if (!a.plot.empty()) write_text_file(a.plot, render_bench_svg(result.table));

  for (const auto& row : result.table.rows) {
    if (row.failures > 0) {
      warn(g, std::string(to_string(row.method)) + ": " + std::to_string(row.failures) +
                  " replication(s) failed and were excluded");
    }
  }
  std::size_t unconverged = 0;
  for (const auto& o : result.manifest.outcomes) unconverged += o.converged ? 0 : 1;
  if (unconverged > 0) warn(g, std::to_string(unconverged) + " COVMLE replication(s) hit the iteration cap");
  return kExitOk;
}

// --- cochran ---------------------------------------------------------------

int run_cochran(const Globals& g, const std::vector<std::size_t>& sizes, std::size_t draws) {
  const CochranDecomposition d = oneway_projections(sizes);
  const CochranCheck check = cochran_empirical_check(d, draws, resolve_seed(g));
  json doc;
  doc["dimension"] = d.dim();
  doc["ranks"] = check.ranks;
  doc["hypotheses_met"] = check.hypotheses_met;
  doc["draws"] = draws;
  doc["ks_statistic"] = check.ks_statistic;
  doc["ks_p_value"] = check.ks_p_value;
  doc["correlation"] = matrix_json(check.correlation);
  write_output(g, render_document(doc, parse_report_format(g.format)));
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumerical:
      return kExitNumerical;
    case ErrorKind::kInput:
    case ErrorKind::kDomain:
    case ErrorKind::kParse:
    case ErrorKind::kIo:
      return kExitData;
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability coefficients, variance-component estimation and simulation benchmarks"};
  app.set_version_flag("--version", std::string(RELEST_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "RNG seed (default: $RELEST_SEED, else 20250101)");
  app.add_option("--out", g.out, "Output file (default: stdout)");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
  app.add_flag("--strict", g.strict, "Treat warnings such as non-convergence as failures (exit 3)");
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  std::function<int()> action;

  std::string items_path;
  bool sample_divisor = false;
  auto* kr20_cmd = app.add_subcommand("kr20", "Kuder-Richardson 20 on a binary item CSV");
  kr20_cmd->add_option("items", items_path, "CSV with one column per item")->required();
  kr20_cmd->add_flag("--sample-variance", sample_divisor, "Use the n-1 divisor for the total-score variance");
  kr20_cmd->callback([&] { action = [&] { return run_kr(g, items_path, sample_divisor, false); }; });

  auto* kr21_cmd = app.add_subcommand("kr21", "Kuder-Richardson 21 on a binary item CSV");
  kr21_cmd->add_option("items", items_path, "CSV with one column per item")->required();
  kr21_cmd->add_flag("--sample-variance", sample_divisor, "Use the n-1 divisor for the total-score variance");
  kr21_cmd->callback([&] { action = [&] { return run_kr(g, items_path, sample_divisor, true); }; });

  std::string groups_path;
  std::vector<std::size_t> t_pair;
  auto* anova_cmd = app.add_subcommand("anova", "One-way ANOVA, variance components and ICC");
  anova_cmd->add_option("groups", groups_path, "CSV with 'group' and 'value' columns")->required();
  anova_cmd->add_option("--t-test", t_pair, "Pooled t test between two group indices")->expected(2);
  anova_cmd->callback([&] {
    action = [&] {
      std::optional<std::pair<std::size_t, std::size_t>> pair;
      if (t_pair.size() == 2) pair = std::make_pair(t_pair[0], t_pair[1]);
      return run_anova(g, groups_path, pair);
    };
  });

  std::string efa_path;
  std::optional<int> efa_factors;
  bool efa_varimax = false;
  auto* efa_cmd = app.add_subcommand("efa", "Principal-component factor extraction on a sample CSV");
  efa_cmd->add_option("samples", efa_path, "CSV with one column per variable")->required();
  efa_cmd->add_option("--factors", efa_factors, "Number of factors (default: Kaiser rule)")
      ->check(CLI::PositiveNumber);
  efa_cmd->add_flag("--varimax", efa_varimax, "Apply varimax rotation");
  efa_cmd->callback([&] { action = [&] { return run_efa(g, efa_path, efa_factors, efa_varimax); }; });

  CovmleArgs cov;
  auto* cov_cmd = app.add_subcommand("covmle", "Fit Sigma = sum sigma_g G_g by the trace-equation iteration");
  auto* cov_data = cov_cmd->add_option("--data", cov.data, "Sample CSV (known mean zero)");
  auto* cov_scatter = cov_cmd->add_option("--scatter", cov.scatter, "Precomputed scatter matrix CSV");
  cov_data->excludes(cov_scatter);
  cov_cmd->add_option("--n", cov.n_scatter, "Sample count behind --scatter");
  cov_cmd->add_flag("--centered", cov.centered, "Centre --data on its sample mean instead of zero");
  cov_cmd->add_option("--basis", cov.bases, "Basis: ar1:RHO, identity or file:PATH (repeatable)")->required();
  cov_cmd->add_option("--error-basis", cov.error_basis, "Index of the error basis; reports reliability");
  cov_cmd->add_option("--max-iter", cov.max_iter, "Iteration cap")->check(CLI::PositiveNumber);
  cov_cmd->add_option("--tol", cov.tol, "Step-norm tolerance")->check(CLI::PositiveNumber);
  cov_cmd->add_option("--unknown-rank", cov.unknown_rank, "Add an unknown sigma0 F F^T component of this rank")
      ->check(CLI::PositiveNumber);
  cov_cmd->add_flag("--serial", cov.serial, "Use the serial reference kernels");
  cov_cmd->callback([&] {
    action = [&] {
      if (cov.data.empty() && cov.scatter.empty()) throw CLI::RequiredError("--data or --scatter");
      return run_covmle(g, cov);
    };
  });

  McmcArgs mc;
  auto* mcmc_cmd = app.add_subcommand("mcmc", "Metropolis sampler for the latent ability theta");
  mcmc_cmd->add_option("--obs", mc.observations, "Observed scores");
  mcmc_cmd->add_option("--obs-file", mc.observations_file, "Single-column CSV of observed scores");
  mcmc_cmd->add_option("--iterations", mc.iterations, "Chain length")->check(CLI::PositiveNumber);
  mcmc_cmd->add_option("--proposal-sd", mc.proposal_sd, "Random-walk proposal sd")->check(CLI::PositiveNumber);
  mcmc_cmd->add_option("--phi-scale", mc.phi_scale, "Decay rate of the exp(-s|theta - x|) factor")
      ->check(CLI::NonNegativeNumber);
  mcmc_cmd->add_option("--burn-in", mc.burn_in, "Fraction (<1) or count of discarded samples")
      ->check(CLI::NonNegativeNumber);
  mcmc_cmd->add_option("--init", mc.init, "Fixed starting theta (default: standard normal draw)");
  mcmc_cmd->add_option("--rule", mc.rule, "Acceptance rule")->check(CLI::IsMember({"log", "smoothed"}));
  mcmc_cmd->add_option("--samples", mc.samples_out, "Write the chain as CSV");
  mcmc_cmd->add_option("--plot", mc.plot_out, "Write an SVG trace plot");
  mcmc_cmd->callback([&] { action = [&] { return run_mcmc(g, mc); }; });

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Monte-Carlo comparison of KR20, EFA and COVMLE");
  bench_cmd->add_option("--config", bench.config, "Versioned JSON scenario config (default: built-in sweep)");
  bench_cmd->add_option("--manifest", bench.manifest, "Run manifest path (default: <out>.manifest.json)");
  bench_cmd->add_option("--plot", bench.plot, "Write an SVG bar summary");
  bench_cmd->add_option("--replications", bench.replications, "Override replications per dimension")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--n", bench.n, "Override samples per replication")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--dims", bench.dims, "Override the dimension sweep");
  bench_cmd->add_option("--methods", bench.methods, "Subset of KR20, EFA, COVMLE");
  bench_cmd->add_flag("--serial", bench.serial, "Run replications serially");
  bench_cmd->callback([&] { action = [&] { return run_bench(g, bench); }; });

  std::vector<std::size_t> cochran_sizes;
  std::size_t cochran_draws = 10000;
  auto* cochran_cmd = app.add_subcommand("cochran", "Empirical check of the one-way ANOVA quadratic-form split");
  cochran_cmd->add_option("--groups", cochran_sizes, "Group sizes")->required();
  cochran_cmd->add_option("--draws", cochran_draws, "Null simulations")->check(CLI::PositiveNumber);
  cochran_cmd->callback([&] { action = [&] { return run_cochran(g, cochran_sizes, cochran_draws); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g.threads > 0) kernels::set_threads(g.threads);
    return action();
  } catch (const CLI::Error& e) {
    std::cerr << "relest: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StrictFailure& e) {
    std::cerr << "relest: " << e.what() << " (--strict)\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "relest: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "relest: internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
