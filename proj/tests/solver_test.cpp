#include <gtest/gtest.h>

#include "test_util.hpp"
#include "urbancp/pipeline.hpp"
#include "urbancp/solver.hpp"
#include "urbancp/temporal.hpp"

using namespace urbancp;
using urbancp::testing::random_matrix;
using urbancp::testing::random_tensor;

namespace {

CompletionProblem small_problem(std::uint64_t seed, Dims d = {3, 3, 4}, Index rank = 2,
                                double lambda = 0.1, double beta = 0.1) {
  std::mt19937_64 rng(seed);
  CompletionProblem p;
  p.y = random_tensor(d, rng);
  p.w = random_mask(d, 0.3, seed);
  p.u = random_matrix(d[0], d[0], rng);
  p.u = 0.5 * (p.u + p.u.transpose()).eval();
  p.to = toeplitz_temporal(d[2], std::min<Index>(2, d[2] - 1)).values;
  p.options.rank = rank;
  p.options.lambda = lambda;
  p.options.beta = beta;
  p.options.seed = seed;
  return p;
}

// Quadruple-loop evaluation of the objective.
double objective_oracle(const FactorSet& f, const CompletionProblem& p) {
  auto cp = [](const Matrix& A, const Matrix& B, const Matrix& C, Index i, Index j, Index k) {
    double s = 0;
    for (Index r = 0; r < A.cols(); ++r) s += A(i, r) * B(j, r) * C(k, r);
    return s;
  };
  const Matrix UA = p.u * f.A, UB = p.u * f.B, TC = p.to * f.C;
  double total = 0;
  const auto& d = p.y.dims();
  for (Index i = 0; i < d[0]; ++i)
    for (Index j = 0; j < d[1]; ++j)
      for (Index k = 0; k < d[2]; ++k) {
        if (p.w.observed(i, j, k)) {
          const double r = p.y(i, j, k) - cp(f.A, f.B, f.C, i, j, k);
          total += r * r;
        }
        const double a = cp(UA, f.B, f.C, i, j, k), b = cp(f.A, UB, f.C, i, j, k),
                     c = cp(f.A, f.B, TC, i, j, k);
        total += p.options.beta * (a * a + b * b + c * c);
      }
  return total + p.options.lambda * (f.A.squaredNorm() + f.B.squaredNorm() + f.C.squaredNorm());
}

Matrix fd_gradient(FactorMode mode, FactorSet f, const CompletionProblem& p, double h) {
  Matrix& x = factor_of(f, mode);
  Matrix g(x.rows(), x.cols());
  for (Index n = 0; n < x.size(); ++n) {
    const double keep = x.data()[n];
    x.data()[n] = keep + h;
    const double up = objective(f, p);
    x.data()[n] = keep - h;
    const double down = objective(f, p);
    x.data()[n] = keep;
    g.data()[n] = (up - down) / (2 * h);
  }
  return g;
}

constexpr FactorMode kModes[] = {FactorMode::A, FactorMode::B, FactorMode::C};

}  // namespace

TEST(Objective, MatchesLoopOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = small_problem(seed);
    const auto f = initial_factors(p.y.dims(), 2, seed + 10);
    EXPECT_NEAR(objective(f, p), objective_oracle(f, p), 1e-10 * objective_oracle(f, p));
  }
}

TEST(Objective, IgnoresValuesAtMissingEntries) {
  auto p = small_problem(3);
  const auto f = initial_factors(p.y.dims(), 2, 4);
  const double before = objective(f, p);
  for (std::size_t n = 0; n < p.y.size(); ++n)
    if (p.w.values().data()[n] == 0.0) p.y.data()[n] = 1e9;
  EXPECT_EQ(objective(f, p), before);
}

TEST(Objective, BaselineDropsContext) {
  const auto p = small_problem(5);
  const auto f = initial_factors(p.y.dims(), 2, 6);
  auto q = p;
  q.options.beta = 0;
  EXPECT_EQ(baseline_objective(f, p), objective(f, q));
}

TEST(NormalEquations, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = small_problem(seed);
    const auto f = initial_factors(p.y.dims(), 2, seed + 100);
    for (FactorMode mode : kModes) {
      const Matrix analytic = subproblem_gradient(mode, f, p);
      const Matrix numeric = fd_gradient(mode, f, p, 1e-5);
      EXPECT_LE((analytic - numeric).norm() / numeric.norm(), 1e-6)
          << "seed " << seed << " mode " << static_cast<int>(mode);
    }
  }
}

TEST(NormalEquations, SolvedFactorIsStationary) {
  const auto p = small_problem(7);
  auto f = initial_factors(p.y.dims(), 2, 8);
  for (FactorMode mode : kModes) {
    factor_of(f, mode) = solve_factor(mode, f, p);
    const Matrix g = subproblem_gradient(mode, f, p);
    EXPECT_LT(g.norm(), 1e-9);
  }
}

TEST(NormalEquations, DeltaIsSymmetric) {
  for (NormalEquations eq : {NormalEquations::Consistent, NormalEquations::PaperLiteral}) {
    auto p = small_problem(9);
    p.options.equations = eq;
    const auto f = initial_factors(p.y.dims(), 2, 10);
    for (FactorMode mode : kModes) {
      const auto sys = normal_equations(mode, f, p);
      EXPECT_LT((sys.delta - sys.delta.transpose()).norm(), 1e-12 * sys.delta.norm());
      EXPECT_EQ(sys.delta.rows(), sys.rows * 2);
    }
  }
}

TEST(NormalEquations, VariantsAgreeWithoutContext) {
  auto p = small_problem(11);
  p.options.beta = 0;
  const auto f = initial_factors(p.y.dims(), 2, 12);
  auto q = p;
  q.options.equations = NormalEquations::PaperLiteral;
  for (FactorMode mode : kModes)
    EXPECT_EQ(normal_equations(mode, f, p).delta, normal_equations(mode, f, q).delta);
}

TEST(NormalEquations, ObservedOnlyDataTermMatchesDenseForm) {
  // (Psi^T (x) I) diag(vec W_(1)) (Psi (x) I) + lambda I, built densely.
  auto p = small_problem(13);
  p.options.beta = 0;
  const auto f = initial_factors(p.y.dims(), 2, 14);
  const Matrix psi = khatri_rao(f.C, f.B);
  const Matrix big = kronecker(psi, Matrix::Identity(3, 3));
  const Vector wv = vec(matricize(p.w.values(), 1));
  const Matrix dense = big.transpose() * wv.asDiagonal() * big + 0.1 * Matrix::Identity(6, 6);
  EXPECT_LT((normal_equations(FactorMode::A, f, p).delta - dense).norm(), 1e-12);
}

TEST(Complete, ObjectiveIsMonotone) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = small_problem(seed, {5, 5, 8}, 2);
    for (const auto& run : {complete(p), baseline_complete(p)}) {
      const auto& trace = run.report.objective_trace;
      for (std::size_t t = 1; t < trace.size(); ++t)
        EXPECT_LE(trace[t], trace[t - 1] + 1e-9 * trace[0]) << "seed " << seed;
    }
  }
}

TEST(Complete, BaselineEqualsZeroBeta) {
  auto p = small_problem(21, {4, 4, 6}, 2);
  const auto base = baseline_complete(p);
  p.options.beta = 0.0;
  const auto zero = complete(p);
  EXPECT_EQ(base.report.objective_trace, zero.report.objective_trace);
  EXPECT_EQ(base.xhat, zero.xhat);
}

TEST(Complete, ExactRecoveryFullyObserved) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FactorSet truth{Matrix(6, 3), Matrix(6, 3), Matrix(10, 3)};
  for (Matrix* m : {&truth.A, &truth.B, &truth.C})
    for (Index n = 0; n < m->size(); ++n) m->data()[n] = u(rng);
  CompletionProblem p;
  p.y = cp_reconstruct(truth);
  p.w = MaskTensor(p.y.dims());
  p.u = Matrix::Identity(6, 6);
  p.to = toeplitz_temporal(10, 1).values;
  p.options.rank = 3;
  p.options.lambda = p.options.beta = 1e-9;
  p.options.tol = 1e-14;
  p.options.max_iters = 200;
  const auto r = complete(p);
  EXPECT_LE(relative_error(p.y, r.xhat), 1e-4);
}

TEST(Complete, DeterministicUnderSeed) {
  const auto p = small_problem(23, {4, 4, 6}, 2);
  const auto a = complete(p), b = complete(p);
  EXPECT_EQ(a.report.objective_trace, b.report.objective_trace);
  EXPECT_EQ(a.xhat, b.xhat);
}

TEST(Complete, RejectsBadProblems) {
  auto p = small_problem(24);
  p.w = MaskTensor(Tensor3(p.y.dims(), 0.0));
  EXPECT_THROW(complete(p), NothingObservedError);

  auto q = small_problem(25);
  q.u = Matrix::Identity(2, 2);
  EXPECT_THROW(complete(q), InputError);

  auto r = small_problem(26);
  r.options.rank = 0;
  EXPECT_THROW(complete(r), InputError);
}

TEST(Complete, PaperLiteralRuns) {
  auto p = small_problem(27, {4, 4, 6}, 2);
  p.options.equations = NormalEquations::PaperLiteral;
  const auto r = complete(p);
  EXPECT_GE(r.report.iterations, 1);
  for (double v : r.xhat.data()) EXPECT_TRUE(std::isfinite(v));
}

TEST(InitialFactors, SeededUniform) {
  const auto a = initial_factors({3, 3, 5}, 2, 9), b = initial_factors({3, 3, 5}, 2, 9);
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.C, b.C);
  EXPECT_NE(a.A, initial_factors({3, 3, 5}, 2, 10).A);
  EXPECT_GE(a.C.minCoeff(), 0.0);
  EXPECT_LT(a.C.maxCoeff(), 1.0);
}
