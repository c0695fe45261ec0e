#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "relest/anova.hpp"
#include "relest/covmle.hpp"
#include "relest/error.hpp"

using namespace relest;

namespace {

std::vector<SymMatrix> ar1_bases(Eigen::Index d) { return {ar1_matrix(d, 0.9), ar1_matrix(d, 0.6), ar1_matrix(d, 0.3)}; }

Vector truth() {
  Vector s(3);
  s << 0.1, 0.2, 0.3;
  return s;
}

ScatterMatrix exact(const SymMatrix& sigma, Eigen::Index n = 100) { return ScatterMatrix{sigma, n}; }

Matrix random_spd(NormalSampler& normal, Eigen::Index d) {
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal();
  return a * a.transpose() + static_cast<double>(d) * Matrix::Identity(d, d);
}

// Log-likelihood straight from the density: explicit inverse and determinant.
double loglik_direct(const Matrix& sigma, const Matrix& c, double n) {
  const double d = static_cast<double>(sigma.rows());
  return -0.5 * n * (d * std::log(2.0 * std::numbers::pi) + std::log(sigma.determinant()) +
                     (sigma.inverse() * c).trace());
}

}  // namespace

TEST(AssembleSigma, Basics) {
  const SymMatrix i3 = SymMatrix::identity(3);
  Vector two(1);
  two << 2.0;
  EXPECT_TRUE(assemble_sigma(std::vector<SymMatrix>{i3}, two).matrix().isApprox(2.0 * Matrix::Identity(3, 3)));
  const auto bases = ar1_bases(5);
  const SymMatrix s = assemble_sigma(bases, truth());
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(s(i, i), 0.6, 1e-15);
  EXPECT_TRUE(assemble_sigma(bases, Vector::Zero(3)).matrix().isZero(0.0));
}

TEST(AssembleSigma, MismatchRejected) {
  std::vector<SymMatrix> bases{SymMatrix::identity(3), SymMatrix::identity(4)};
  EXPECT_THROW(assemble_sigma(bases, Vector::Ones(2)), InputError);
  EXPECT_THROW(assemble_sigma(ar1_bases(3), Vector::Ones(2)), InputError);
}

TEST(Gls, IdentityCovarianceIsOls) {
  NormalSampler normal(Rng(RngSeed{31}));
  Matrix z(6, 2);
  Vector x(6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    z(i, 0) = 1.0;
    z(i, 1) = normal();
    x(i) = normal();
  }
  const Vector ols = (z.transpose() * z).ldlt().solve(z.transpose() * x);
  EXPECT_TRUE(gls_beta({z}, SymMatrix::identity(6), x).isApprox(ols, 1e-12));
}

TEST(Gls, SingleInterceptIsMean) {
  Vector x(4);
  x << 1.0, 2.0, 6.0, 7.0;
  EXPECT_NEAR(gls_beta({Matrix::Ones(4, 1)}, SymMatrix::identity(4), x)(0), 4.0, 1e-14);
}

TEST(Gls, MatchesNormalEquationsAndScaleEquivariant) {
  NormalSampler normal(Rng(RngSeed{32}));
  for (int t = 0; t < 20; ++t) {
    const Matrix sigma = random_spd(normal, 3);
    Matrix z(3, 2);
    Vector x(3);
    for (Eigen::Index i = 0; i < 3; ++i) {
      z(i, 0) = normal();
      z(i, 1) = normal();
      x(i) = normal();
    }
    const Matrix si = sigma.inverse();
    const Vector brute = (z.transpose() * si * z).inverse() * (z.transpose() * si * x);
    const Vector beta = gls_beta({z}, SymMatrix(sigma), x);
    EXPECT_LT((beta - brute).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((gls_beta({z}, SymMatrix(7.5 * sigma), x) - beta).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Gls, CollinearRejected) {
  Matrix z(4, 2);
  z << 1, 2, 1, 2, 1, 2, 1, 2;
  EXPECT_THROW(gls_beta({z}, SymMatrix::identity(4), Vector::Ones(4)), InputError);
}

TEST(TraceSystem, ScaledIdentityClosedForm) {
  NormalSampler normal(Rng(RngSeed{33}));
  const Matrix c = random_spd(normal, 4);
  const double s = 1.7;
  Matrix si = s * Matrix::Identity(4, 4);
  const TraceSystem ts = trace_system(SymMatrix(si), std::vector<SymMatrix>{SymMatrix::identity(4)}, {SymMatrix(c), 10});
  EXPECT_NEAR(ts.a(0, 0), 4.0 / (s * s), 1e-12);
  EXPECT_NEAR(ts.b(0), c.trace() / (s * s), 1e-12);
}

TEST(TraceSystem, FixedPointIdentityAtTruth) {
  const auto bases = ar1_bases(5);
  const SymMatrix sigma = assemble_sigma(bases, truth());
  const TraceSystem ts = trace_system(sigma, bases, exact(sigma));
  EXPECT_LT((ts.a * truth() - ts.b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TraceSystem, DisjointSupportsGiveDiagonalA) {
  Matrix g1 = Matrix::Zero(4, 4);
  g1.topLeftCorner(2, 2) = ar1_matrix(2, 0.5).matrix();
  Matrix g2 = Matrix::Zero(4, 4);
  g2.bottomRightCorner(2, 2) = Matrix::Identity(2, 2);
  const std::vector<SymMatrix> bases{SymMatrix(g1), SymMatrix(g2)};
  const SymMatrix sigma = assemble_sigma(bases, Vector::Ones(2));
  const TraceSystem ts = trace_system(sigma, bases, exact(sigma));
  EXPECT_NEAR(ts.a(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(ts.a(1, 0), 0.0, 1e-14);
}

TEST(TraceSystem, GramMatrixSymmetricPsd) {
  NormalSampler normal(Rng(RngSeed{34}));
  const auto bases = ar1_bases(6);
  for (int t = 0; t < 10; ++t) {
    const Matrix sigma = random_spd(normal, 6);
    const TraceSystem ts = trace_system(SymMatrix(sigma), bases, exact(SymMatrix(sigma)));
    EXPECT_LT((ts.a - ts.a.transpose()).cwiseAbs().maxCoeff(), 1e-12 * ts.a.norm());
    EXPECT_NE(validate_spd(SymMatrix(0.5 * (ts.a + ts.a.transpose()))), SpdVerdict::kIndefinite);
  }
}

TEST(TraceSystem, SerialAndParallelAgree) {
  NormalSampler normal(Rng(RngSeed{35}));
  const auto bases = ar1_bases(8);
  const Matrix sigma = random_spd(normal, 8);
  const Matrix c = random_spd(normal, 8);
  const TraceSystem a = trace_system(SymMatrix(sigma), bases, {SymMatrix(c), 5}, Execution::kSerial);
  const TraceSystem b = trace_system(SymMatrix(sigma), bases, {SymMatrix(c), 5}, Execution::kParallel);
  EXPECT_TRUE(a.a.isApprox(b.a, 1e-12));
  EXPECT_TRUE(a.b.isApprox(b.b, 1e-12));
}

TEST(TraceSystem, IllConditionedCarriesCondition) {
  Matrix s = Matrix::Identity(3, 3);
  s(2, 2) = 1e-14;
  try {
    trace_system(SymMatrix(s), std::vector<SymMatrix>{SymMatrix::identity(3)}, exact(SymMatrix::identity(3)));
    FAIL() << "expected IllConditionedError";
  } catch (const IllConditionedError& e) {
    EXPECT_GT(e.condition(), 1e12);
  }
}

TEST(LogLikelihood, MatchesDensityFormula) {
  NormalSampler normal(Rng(RngSeed{36}));
  const Matrix sigma = random_spd(normal, 4);
  const Matrix c = random_spd(normal, 4);
  EXPECT_NEAR(log_likelihood(SymMatrix(sigma), {SymMatrix(c), 25}), loglik_direct(sigma, c, 25.0), 1e-9);
}

TEST(LogLikelihood, ScoreMatchesTraceEquations) {
  // d l / d sigma_g = n/2 (b_g - tr(Sigma^-1 G_g)); checked against central differences.
  const auto bases = ar1_bases(5);
  NormalSampler normal(Rng(RngSeed{37}));
  const Matrix c = random_spd(normal, 5) / 5.0;
  const ScatterMatrix sc{SymMatrix(c), 40};
  const Vector s = truth();
  const SymMatrix sigma = assemble_sigma(bases, s);
  const TraceSystem ts = trace_system(sigma, bases, sc);
  const Matrix si = sigma.matrix().inverse();
  for (Eigen::Index g = 0; g < 3; ++g) {
    const double h = 1e-6;
    Vector up = s;
    Vector dn = s;
    up(g) += h;
    dn(g) -= h;
    const double fd =
        (log_likelihood(assemble_sigma(bases, up), sc) - log_likelihood(assemble_sigma(bases, dn), sc)) / (2.0 * h);
    const double analytic = 0.5 * 40.0 * (ts.b(g) - (si * bases[static_cast<std::size_t>(g)].matrix()).trace());
    EXPECT_NEAR(fd, analytic, 1e-5 * std::max(1.0, std::abs(analytic)));
  }
}

TEST(Estimate, ExactDataFromTruthStopsImmediately) {
  const auto bases = ar1_bases(5);
  const SymMatrix sigma = assemble_sigma(bases, truth());
  EstimateOptions opts;
  opts.init = truth();
  const EstimationResult r = estimate_sigma(exact(sigma), bases, opts);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_TRUE(r.converged);
}

TEST(Estimate, ExactDataFromDefaultInitReachesTruth) {
  const auto bases = ar1_bases(5);
  EstimateOptions opts;
  opts.tol = 1e-12;
  const EstimationResult r = estimate_sigma(exact(assemble_sigma(bases, truth())), bases, opts);
  EXPECT_TRUE(r.converged);
  EXPECT_LT((r.sigma_hat - truth()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_EQ(static_cast<int>(r.trace.size()), r.iterations);
}

TEST(Estimate, FixedPointFromManyPositiveStarts) {
  const auto bases = ar1_bases(5);
  const ScatterMatrix c = exact(assemble_sigma(bases, truth()));
  Rng rng(RngSeed{38});
  for (int t = 0; t < 20; ++t) {
    EstimateOptions opts;
    opts.tol = 1e-12;
    Vector init(3);
    for (Eigen::Index g = 0; g < 3; ++g) init(g) = 0.01 + 2.0 * rng.uniform();
    opts.init = init;
    const EstimationResult r = estimate_sigma(c, bases, opts);
    EXPECT_LT((r.sigma_hat - truth()).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Estimate, SingleIdentityBasisClosedForm) {
  NormalSampler normal(Rng(RngSeed{39}));
  const Matrix c = random_spd(normal, 4);
  const std::vector<SymMatrix> bases{SymMatrix::identity(4)};
  EstimateOptions opts;
  opts.init = Vector::Constant(1, 0.3);
  const EstimationResult r = estimate_sigma({SymMatrix(c), 9}, bases, opts);
  EXPECT_NEAR(r.trace.front()(0), c.trace() / 4.0, 1e-12);
}

TEST(Estimate, DefaultInitEqualShare) {
  const auto bases = ar1_bases(5);
  const ScatterMatrix c = exact(assemble_sigma(bases, truth()));
  const Vector init = default_init(c, bases);
  for (Eigen::Index g = 0; g < 3; ++g) EXPECT_NEAR(init(g), 3.0 / (3.0 * 5.0), 1e-15);
}

TEST(Estimate, ConsistencyOnSimulatedData) {
  const auto bases = ar1_bases(5);
  const SymMatrix sigma = assemble_sigma(bases, truth());
  double mean_err = 0.0;
  const int reps = 20;
  for (int r = 0; r < reps; ++r) {
    const SampleSet s = mvn_sample(Vector::Zero(5), sigma, 10000, Rng(RngSeed{40}, static_cast<std::uint64_t>(r)));
    const EstimationResult e = estimate_sigma(scatter_matrix(s), bases);
    mean_err += (e.sigma_hat - truth()).cwiseAbs().mean() / reps;
  }
  EXPECT_LE(mean_err, 0.02);
}

TEST(Estimate, RankDeficientScatterTolerated) {
  // Three samples in five dimensions: C has rank 3.
  const auto bases = ar1_bases(5);
  const SampleSet s = mvn_sample(Vector::Zero(5), assemble_sigma(bases, truth()), 3, Rng(RngSeed{41}));
  const EstimationResult r = estimate_sigma(scatter_matrix(s), bases);
  EXPECT_TRUE((r.sigma_hat.array() > 0.0).all());
  EXPECT_EQ(validate_spd(r.sigma_matrix), SpdVerdict::kSpd);
}

TEST(Estimate, NegativeStepsProjectedAndRecorded) {
  // Data generated from the first basis only; the others are driven to the floor.
  const auto bases = ar1_bases(5);
  Vector only_first(3);
  only_first << 1.0, 0.0, 0.0;
  const SampleSet s = mvn_sample(Vector::Zero(5), assemble_sigma(bases, only_first), 200, Rng(RngSeed{42}));
  const EstimationResult r = estimate_sigma(scatter_matrix(s), bases);
  EXPECT_FALSE(r.projected.empty());
  EXPECT_TRUE((r.sigma_hat.array() > 0.0).all());
}

TEST(Estimate, NonConvergenceReportedNotThrown) {
  const auto bases = ar1_bases(5);
  const SampleSet s = mvn_sample(Vector::Zero(5), assemble_sigma(bases, truth()), 50, Rng(RngSeed{43}));
  EstimateOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  const EstimationResult r = estimate_sigma(scatter_matrix(s), bases, opts);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(reliability_from_components(r, bases, 2).diagnostics.at("converged"), "false");
}

TEST(Estimate, InputValidation) {
  const auto bases = ar1_bases(5);
  const ScatterMatrix c = exact(assemble_sigma(bases, truth()));
  EXPECT_THROW(estimate_sigma(c, std::vector<SymMatrix>{}), InputError);
  EstimateOptions bad;
  bad.init = Vector::Ones(2);
  EXPECT_THROW(estimate_sigma(c, bases, bad), InputError);
  bad.init = -Vector::Ones(3);
  EXPECT_THROW(estimate_sigma(c, bases, bad), InputError);
  const std::vector<SymMatrix> dup{SymMatrix::identity(5), SymMatrix::identity(5)};
  EXPECT_THROW(estimate_sigma(c, dup), NumericalError);
}

TEST(ReliabilityFromComponents, Extremes) {
  const auto bases = ar1_bases(5);
  Vector no_error = truth();
  no_error(2) = 0.0;
  EXPECT_EQ(reliability_from_components(no_error, bases, 2).coefficient, 1.0);
  Vector only_error = Vector::Zero(3);
  only_error(2) = 0.4;
  EXPECT_EQ(reliability_from_components(only_error, bases, 2).coefficient, 0.0);
  EXPECT_THROW(reliability_from_components(Vector::Zero(3), bases, 2), DomainError);
  EXPECT_THROW(reliability_from_components(truth(), bases, 3), InputError);
}

TEST(ReliabilityFromComponents, OneWayStructureEqualsIcc) {
  // Balanced groups: between basis is block-diagonal ones, error basis is I.
  const int groups = 4;
  const int per = 3;
  const Eigen::Index d = groups * per;
  Matrix between = Matrix::Zero(d, d);
  for (int g = 0; g < groups; ++g) between.block(g * per, g * per, per, per).setOnes();
  const std::vector<SymMatrix> bases{SymMatrix(between), SymMatrix::identity(d)};
  for (auto [sa2, s2] : {std::pair{1.0, 1.0}, std::pair{3.0, 1.0}, std::pair{0.25, 2.0}}) {
    Vector coeffs(2);
    coeffs << sa2, s2;
    EXPECT_NEAR(reliability_from_components(coeffs, bases, 1).coefficient, icc({sa2, s2, false}).coefficient, 1e-15);
  }
}
