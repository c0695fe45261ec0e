// Acceptance checks. Prints one PASS/FAIL line per criterion; exits 1 if any fail.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "relest/anova.hpp"
#include "relest/classical.hpp"
#include "relest/core.hpp"
#include "relest/covmle.hpp"
#include "relest/distributions.hpp"
#include "relest/efa.hpp"
#include "relest/error.hpp"
#include "relest/factor_component.hpp"
#include "relest/mcmc.hpp"
#include "relest/report.hpp"
#include "relest/scenario.hpp"

using namespace relest;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void check(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + what;
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<SymMatrix> ar1_bases(Eigen::Index d) {
  return {ar1_matrix(d, 0.9), ar1_matrix(d, 0.6), ar1_matrix(d, 0.3)};
}

Vector ar1_sigma() {
  Vector s(3);
  s << 0.1, 0.2, 0.3;
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome fixed_point() {
  Outcome o;
  const auto bases = ar1_bases(5);
  const Vector truth = ar1_sigma();
  const ScatterMatrix c{assemble_sigma(bases, truth), 1000};

  EstimateOptions at_truth;
  at_truth.init = truth;
  const EstimationResult r0 = estimate_sigma(c, bases, at_truth);
  check(o, r0.residual <= 1e-10, "residual at truth " + fmt(r0.residual));

  EstimateOptions from_default;
  from_default.tol = 1e-12;
  from_default.max_iter = 50;
  const EstimationResult r1 = estimate_sigma(c, bases, from_default);
  const double err = (r1.sigma_hat - truth).cwiseAbs().maxCoeff();
  check(o, r1.converged, "default start did not converge in 50 iterations");
  check(o, err <= 1e-6, "default start error " + fmt(err));
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(r1.iterations) + " iterations";
  return o;
}

Outcome consistency() {
  Outcome o;
  ScenarioConfig cfg = reference_scenario();
  const auto bases = build_bases(cfg);
  const Vector truth = cfg.sigma_true;
  std::vector<double> medians;
  double mae_1e4 = 0.0;
  for (Eigen::Index n : {100, 1000, 10000}) {
    cfg.n = n;
    std::vector<double> abs_err;
    double sum = 0.0;
    for (std::size_t rep = 0; rep < 100; ++rep) {
      const Scenario sc = generate_scenario(cfg, rep, static_cast<std::uint64_t>(n));
      const EstimationResult r = estimate_sigma(sc.scatter, bases);
      for (Eigen::Index g = 0; g < truth.size(); ++g) {
        const double e = std::abs(r.sigma_hat(g) - truth(g));
        abs_err.push_back(e);
        sum += e;
      }
    }
    medians.push_back(median(abs_err));
    if (n == 10000) mae_1e4 = sum / static_cast<double>(abs_err.size());
  }
  check(o, medians[0] > medians[1] && medians[1] > medians[2], "medians not decreasing");
  check(o, mae_1e4 <= 0.02, "mean abs error at n=1e4 " + fmt(mae_1e4));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("medians ") + fmt(medians[0]) + " > " + fmt(medians[1]) +
              " > " + fmt(medians[2]) + ", MAE(1e4) " + fmt(mae_1e4);
  return o;
}

Outcome table_ordering() {
  Outcome o;
  const BenchResult r = run_sweep(default_bench_config());
  double kr20 = 0.0;
  double efa = 0.0;
  double cov = 0.0;
  for (const auto& row : r.table.rows) {
    if (row.method == BenchMethod::kKr20) kr20 = row.avg_error_pct;
    if (row.method == BenchMethod::kEfa) efa = row.avg_error_pct;
    if (row.method == BenchMethod::kCovMle) cov = row.avg_error_pct;
  }
  check(o, cov < efa && efa < kr20, "ordering violated");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("COVMLE ") + fmt(cov) + " < EFA " + fmt(efa) +
              " < KR20 " + fmt(kr20);
  return o;
}

Outcome kr21_bound() {
  Outcome o;
  Rng rng(RngSeed{4001});
  int evaluated = 0;
  double worst = -1.0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<Eigen::Index>(5 + rng.uniform() * 196);
    const auto k = static_cast<Eigen::Index>(2 + rng.uniform() * 29);
    Matrix m(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double p = 0.1 + 0.8 * rng.uniform();
      for (Eigen::Index i = 0; i < n; ++i) m(i, j) = rng.uniform() < p ? 1.0 : 0.0;
    }
    try {
      const ItemResponseMatrix items(m);
      const double gap = kr21(items).coefficient - kr20(items).coefficient;
      worst = std::max(worst, gap);
      ++evaluated;
    } catch (const DomainError&) {
      // Constant sum score: both coefficients are undefined.
    }
  }
  check(o, worst <= 1e-12, "max KR21 - KR20 = " + fmt(worst));
  // Equal-p fixtures: every item endorsed by exactly half the subjects.
  for (Eigen::Index k : {2, 5, 12}) {
    Matrix m(8, k);
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index i = 0; i < 8; ++i) m(i, j) = ((i + j) % 8) < 4 ? 1.0 : 0.0;
    const ItemResponseMatrix items(m);
    const double diff = std::abs(kr21(items).coefficient - kr20(items).coefficient);
    check(o, diff <= 1e-12, "equal-p fixture differs by " + fmt(diff));
  }
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(evaluated) + " matrices, max gap " + fmt(worst);
  return o;
}

Outcome anova_identities() {
  Outcome o;
  Rng rng(RngSeed{5001});
  NormalSampler normal(Rng(RngSeed{5002}));
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto k = static_cast<std::size_t>(2 + rng.uniform() * 7);
    std::vector<std::vector<double>> groups(k);
    for (auto& gr : groups) {
      const auto size = static_cast<std::size_t>(1 + rng.uniform() * 12);
      const double shift = 5.0 * normal();
      for (std::size_t i = 0; i < size; ++i) gr.push_back(shift + 3.0 * normal());
    }
    const AnovaTable a = oneway_decompose(GroupedObservations(groups));
    worst = std::max(worst, std::abs(a.total_ss - a.within_ss - a.between_ss) / a.total_ss);
  }
  check(o, worst <= 1e-10, "SS identity relative error " + fmt(worst));

  const std::vector<std::size_t> sizes{3, 4, 5, 6};
  const double sigma2 = 2.0;
  std::vector<double> scaled;
  for (int t = 0; t < 10000; ++t) {
    std::vector<std::vector<double>> groups;
    for (std::size_t s : sizes) {
      std::vector<double> gr;
      for (std::size_t i = 0; i < s; ++i) gr.push_back(1.0 + std::sqrt(sigma2) * normal());
      groups.push_back(gr);
    }
    scaled.push_back(oneway_decompose(GroupedObservations(groups)).within_ss / sigma2);
  }
  const double df = 18.0 - 4.0;
  const KsResult ks = ks_test(scaled, [df](double x) { return chi2_cdf(x, df); });
  check(o, ks.p_value > 0.01, "KS p " + fmt(ks.p_value));

  double worst_ft = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<std::vector<double>> groups(2);
    for (auto& gr : groups) {
      const auto size = static_cast<std::size_t>(2 + rng.uniform() * 10);
      for (std::size_t i = 0; i < size; ++i) gr.push_back(normal());
    }
    const GroupedObservations g(groups);
    const double f = *oneway_f_test(g).f_stat;
    const double tt = pairwise_t_test(g, 0, 1).t_stat;
    worst_ft = std::max(worst_ft, std::abs(f - tt * tt) / std::max(1.0, f));
  }
  check(o, worst_ft <= 1e-10, "F - t^2 " + fmt(worst_ft));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("SS rel ") + fmt(worst) + ", KS p " + fmt(ks.p_value) +
              ", F-t^2 " + fmt(worst_ft);
  return o;
}

Outcome icc_equivalence() {
  Outcome o;
  const std::vector<std::pair<double, double>> cases{{1.0, 1.0}, {3.0, 1.0}, {0.25, 1.0}};
  NormalSampler normal(Rng(RngSeed{6001}));
  for (const auto& [sa2, s2] : cases) {
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    const int groups = 100000;
    for (int i = 0; i < groups; ++i) {
      const double yi = std::sqrt(sa2) * normal();
      const double yij = yi + std::sqrt(s2) * normal();
      sx += yi;
      sy += yij;
      sxy += yi * yij;
      sxx += yi * yi;
      syy += yij * yij;
    }
    const double n = groups;
    const double cov = sxy - sx * sy / n;
    const double r2 = cov * cov / ((sxx - sx * sx / n) * (syy - sy * sy / n));
    const double target = icc(VarianceComponents{sa2, s2, false}).coefficient;
    check(o, std::abs(r2 - target) <= 0.03, "corr^2 " + fmt(r2) + " vs " + fmt(target));
    const double estimated =
        icc(estimate_random_effects(simulate_random_effects(100000, 2, 0.0, sa2, s2, Rng(RngSeed{6002}))))
            .coefficient;
    check(o, std::abs(estimated - target) <= 0.03, "estimated ICC " + fmt(estimated) + " vs " + fmt(target));
    o.detail += (o.detail.empty() ? "" : "; ") + fmt(r2) + "/" + fmt(target);
  }
  return o;
}

Outcome mcmc_calibration() {
  Outcome o;
  NormalSampler normal(Rng(RngSeed{7001}));
  std::vector<double> xs(20);
  for (double& x : xs) x = 0.5 + normal();
  double xbar = 0.0;
  for (double x : xs) xbar += x;
  xbar /= 20.0;

  const McmcChain chain = metropolis({xs, 0.0}, 100000, RngSeed{7002});
  const ChainSummary s = chain_summary(chain, 10000);
  const double se = std::sqrt((1.0 / 20.0) / s.effective_sample_size);
  check(o, std::abs(s.mean - xbar) <= 3.0 * se, "mean off by " + fmt(std::abs(s.mean - xbar) / se) + " SE");
  check(o, std::abs(s.variance - 0.05) <= 0.25 * 0.05, "variance " + fmt(s.variance));

  const LatentThetaModel defaults{xs, 0.1};
  const McmcChain a = metropolis(defaults, 10000, RngSeed{7003});
  const McmcChain b = metropolis(defaults, 10000, RngSeed{7003});
  check(o, a.acceptance_rate > 0.1 && a.acceptance_rate < 0.9, "acceptance " + fmt(a.acceptance_rate));
  check(o, a.samples == b.samples, "equal seeds differ");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("mean ") + fmt(s.mean) + " vs " + fmt(xbar) +
              ", var " + fmt(s.variance) + ", acceptance " + fmt(a.acceptance_rate);
  return o;
}

Outcome efa_structure() {
  Outcome o;
  Matrix cs = Matrix::Constant(4, 4, 0.5);
  cs.diagonal().setOnes();
  const FactorModel m = extract_factors(SymMatrix(cs));
  Vector expected(4);
  expected << 2.5, 0.5, 0.5, 0.5;
  const double eig_err = (m.eigenvalues - expected).cwiseAbs().maxCoeff();
  check(o, eig_err <= 1e-10, "eigenvalue error " + fmt(eig_err));
  check(o, m.m() == 1, "Kaiser kept " + std::to_string(m.m()) + " factors");

  const SampleSet s = mvn_sample(Vector::Zero(6), ar1_matrix(6, 0.7), 500, Rng(RngSeed{8001}));
  const FactorModel base = extract_factors(correlation_matrix(s), FixedFactors{3});
  NormalSampler normal(Rng(RngSeed{8002}));
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Matrix g(3, 3);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal();
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(3, 3);
    worst = std::max(worst, (rotate(base, q).communalities - base.communalities).cwiseAbs().maxCoeff());
  }
  check(o, worst <= 1e-10, "communality drift " + fmt(worst));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("eig err ") + fmt(eig_err) + ", drift " + fmt(worst);
  return o;
}

Outcome unknown_g0() {
  Outcome o;
  Matrix f(5, 1);
  f << 0.6, 0.5, 0.4, -0.3, 0.2;
  f /= f.norm();
  Vector sigma(3);
  sigma << 0.8, 0.3, 0.2;
  const std::vector<SymMatrix> known{ar1_matrix(5, 0.6), SymMatrix::identity(5)};
  const Matrix implied = sigma(0) * f * f.transpose() + sigma(1) * known[0].matrix() + sigma(2) * known[1].matrix();
  const ScatterMatrix c{SymMatrix(implied), 1000};

  const double res = stationarity_residual(c, known, f, sigma);
  check(o, res <= 1e-8, "stationarity residual " + fmt(res));

  FactorComponentOptions opts;
  Matrix f0 = f;
  f0(0, 0) += 0.3;
  f0(3, 0) -= 0.2;
  opts.init_f = f0;
  opts.init_sigma = Vector(sigma * 1.5);
  const FactorComponentResult r = estimate_with_unknown_g0(c, known, 1, opts);
  bool monotone = true;
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) monotone = monotone && r.objective_trace[i] >= r.objective_trace[i - 1];
  check(o, monotone, "objective trace decreased");
  const double frob = (r.sigma_matrix.matrix() - implied).norm();
  check(o, frob <= 1e-4, "Frobenius error " + fmt(frob));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("residual ") + fmt(res) + ", Frobenius " + fmt(frob) +
              ", " + std::to_string(r.iterations) + " cycles";
  return o;
}

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  CliRun r;
  const std::string cmd = std::string(RELEST_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path();
  BenchConfig cfg = default_bench_config();
  cfg.dims = {5, 10};
  cfg.base.replications = 40;
  cfg.base.n = 1000;
  const auto config = dir / "relest_acceptance_config.json";
  write_text_file(config, bench_config_to_json(cfg).dump(2));
  const auto m1 = dir / "relest_acceptance_m1.json";
  const auto m2 = dir / "relest_acceptance_m2.json";
  const std::string base = "bench --config " + config.string() + " --seed 99 --format json --manifest ";
  const CliRun a = run_cli(base + m1.string());
  const CliRun b = run_cli(base + m2.string());
  check(o, a.code == 0 && b.code == 0, "bench exit codes " + std::to_string(a.code) + "/" + std::to_string(b.code));
  check(o, !a.out.empty() && a.out == b.out, "reports differ");
  if (o.pass) {
    const RunManifest manifest = manifest_from_json(nlohmann::ordered_json::parse(slurp(m1)));
    const BenchTable reported = table_from_json(nlohmann::ordered_json::parse(a.out));
    check(o, render_json(recompute_table(manifest)) == render_json(reported), "manifest aggregates differ");
    check(o, manifest.seed == 99, "manifest seed");
  }
  std::filesystem::remove(config);
  std::filesystem::remove(m1);
  std::filesystem::remove(m2);
  if (o.pass) o.detail = std::to_string(a.out.size()) + " identical bytes";
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "fixed-point exactness", 1.0, fixed_point},
      {2, "statistical consistency", 120.0, consistency},
      {3, "benchmark ordering COVMLE < EFA < KR20", 600.0, table_ordering},
      {4, "KR21 lower bound", 10.0, kr21_bound},
      {5, "ANOVA identity and distributions", 60.0, anova_identities},
      {6, "ICC equivalence", 60.0, icc_equivalence},
      {7, "MCMC calibration", 30.0, mcmc_calibration},
      {8, "EFA structure", 10.0, efa_structure},
      {9, "unknown-G0 extension", 60.0, unknown_g0},
      {10, "CLI determinism", 60.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) check(o, false, "runtime " + fmt(secs) + " s over " + fmt(c.budget_s) + " s");
    failures += o.pass ? 0 : 1;
    std::printf("%s %d: %s (%.2f s) %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
