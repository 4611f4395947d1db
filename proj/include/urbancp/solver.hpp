#pragma once

// Urban and time aware CP completion.
//
// Minimizes
//
//   f(A,B,C) = ||W * (Y - [[A,B,C]])||^2
//            + lambda (||A||^2 + ||B||^2 + ||C||^2)
//            + beta (||[[UA,B,C]]||^2 + ||[[A,UB,C]]||^2 + ||[[A,B,To C]]||^2)
//
// by alternating least squares. Each factor update solves the vectorized
// normal equations Delta vec(F) = rhs with a Moore-Penrose inverse. Setting
// beta = 0 gives the plain regularized CP-ALS baseline.
//
// The dense Delta has size (I_n R)^2; the solve costs O((I_n R)^3) per factor
// per sweep, which bounds this solver to moderate M, T.

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "urbancp/linalg.hpp"
#include "urbancp/mask.hpp"
#include "urbancp/tensor.hpp"

namespace urbancp {

enum class FactorMode { A = 1, B = 2, C = 3 };

enum class NormalEquations {
  /// Delta derived from the gradient of f: beta on every context term, To^T To
  /// in the C update. Each update is an exact block minimizer.
  Consistent,
  /// lambda (I + Phi^T Phi + Gamma^T Gamma) (x) I + beta (Psi^T Psi) (x) L^T L,
  /// with L = U for A and B and L = To for C. Same as Consistent when beta = 0.
  PaperLiteral,
};

struct SolverOptions {
  Index rank = 3;
  double lambda = 0.1;
  double beta = 0.1;
  double tol = 1e-6;
  int max_iters = 200;
  std::uint64_t seed = 1;
  NormalEquations equations = NormalEquations::Consistent;
};

struct CompletionProblem {
  Tensor3 y;      ///< observed tensor, M x M x T
  MaskTensor w;   ///< 1 = observed
  Matrix u;       ///< M x M urban similarity
  Matrix to;      ///< T x T temporal Toeplitz matrix
  SolverOptions options;

  void validate() const {
    const auto& d = y.dims();
    detail::require(d[0] > 0, "completion problem: empty tensor");
    detail::require(w.dims() == d, "completion problem: mask dims " + to_string(w.dims()) +
                                       " differ from tensor dims " + to_string(d));
    detail::require(d[0] == d[1], "completion problem: tensor must be M x M x T");
    detail::require(u.rows() == d[0] && u.cols() == d[0],
                    "completion problem: urban matrix must be M x M");
    detail::require(to.rows() == d[2] && to.cols() == d[2],
                    "completion problem: temporal matrix must be T x T");
    detail::require(options.rank >= 1, "completion problem: rank must be >= 1");
    detail::require(options.lambda >= 0.0 && options.beta >= 0.0,
                    "completion problem: lambda and beta must be >= 0");
    detail::require(options.tol > 0.0, "completion problem: tol must be > 0");
    detail::require(options.max_iters >= 1, "completion problem: max_iters must be >= 1");
  }
};

struct SolveReport {
  FactorSet factors;
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

namespace detail {

inline void check_factors(const FactorSet& f, const CompletionProblem& prob) {
  f.validate();
  const auto& d = prob.y.dims();
  require(f.A.rows() == d[0] && f.B.rows() == d[1] && f.C.rows() == d[2],
          "factor shapes inconsistent with tensor dims " + to_string(d));
}

inline double sq_norm(const Tensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return s;
}

// Deterministic uniform [0, 1) from the top 53 bits of a 64-bit draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// (kron(G, I_n))(p + n*r, p + n*s) = G(r, s)
inline void add_kron_identity(Matrix& delta, const Matrix& g, Index n, double scale) {
  for (Index s = 0; s < g.cols(); ++s)
    for (Index r = 0; r < g.rows(); ++r) {
      const double v = scale * g(r, s);
      if (v == 0.0) continue;
      for (Index p = 0; p < n; ++p) delta(p + n * r, p + n * s) += v;
    }
}

// kron(G, H) with H n x n
inline void add_kron(Matrix& delta, const Matrix& g, const Matrix& h, double scale) {
  const Index n = h.rows();
  for (Index s = 0; s < g.cols(); ++s)
    for (Index r = 0; r < g.rows(); ++r) {
      const double v = scale * g(r, s);
      if (v == 0.0) continue;
      delta.block(n * r, n * s, n, n).noalias() += v * h;
    }
}

}  // namespace detail

/// Objective f over all three context terms. The residual uses W * Y, so
/// values of Y at missing entries do not matter.
inline double objective(const FactorSet& f, const CompletionProblem& prob) {
  prob.validate();
  detail::check_factors(f, prob);
  const Tensor3 xhat = cp_reconstruct(f);
  double fit = 0.0;
  const auto& w = prob.w.values().data();
  const auto& y = prob.y.data();
  const auto& x = xhat.data();
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (w[n] == 0.0) continue;
    const double r = y[n] - x[n];
    fit += r * r;
  }
  const double ridge = f.A.squaredNorm() + f.B.squaredNorm() + f.C.squaredNorm();
  double context = 0.0;
  if (prob.options.beta != 0.0) {
    context = detail::sq_norm(cp_reconstruct({prob.u * f.A, f.B, f.C})) +
              detail::sq_norm(cp_reconstruct({f.A, prob.u * f.B, f.C})) +
              detail::sq_norm(cp_reconstruct({f.A, f.B, prob.to * f.C}));
  }
  return fit + prob.options.lambda * ridge + prob.options.beta * context;
}

/// Objective with beta = 0.
inline double baseline_objective(const FactorSet& f, const CompletionProblem& prob) {
  CompletionProblem p = prob;
  p.options.beta = 0.0;
  return objective(f, p);
}

/// Normal equations Delta vec(F) = rhs of one factor subproblem.
struct NormalSystem {
  Matrix delta;
  Vector rhs;
  Index rows = 0;  ///< rows of the factor being solved for
};

inline NormalSystem normal_equations(FactorMode mode, const FactorSet& f,
                                     const CompletionProblem& prob) {
  prob.validate();
  detail::check_factors(f, prob);
  const auto& opt = prob.options;
  const Index R = f.rank();
  const int n = static_cast<int>(mode);

  Matrix psi;           // Khatri-Rao of the two fixed factors
  const Matrix* left;   // context operator applied directly to this factor
  Matrix phi, gamma;    // context terms that act through the fixed factors
  const bool need_context = opt.beta != 0.0;
  switch (mode) {
    case FactorMode::A:
      psi = khatri_rao(f.C, f.B);
      left = &prob.u;
      if (need_context) {
        phi = khatri_rao(f.C, prob.u * f.B);
        gamma = khatri_rao(prob.to * f.C, f.B);
      }
      break;
    case FactorMode::B:
      psi = khatri_rao(f.C, f.A);
      left = &prob.u;
      if (need_context) {
        phi = khatri_rao(f.C, prob.u * f.A);
        gamma = khatri_rao(prob.to * f.C, f.A);
      }
      break;
    default:
      psi = khatri_rao(f.B, f.A);
      left = &prob.to;
      if (need_context) {
        phi = khatri_rao(f.B, prob.u * f.A);
        gamma = khatri_rao(prob.u * f.B, f.A);
      }
      break;
  }

  const Tensor3 ym = prob.w.apply(prob.y);
  const Matrix y_n = matricize(ym, n);
  const Matrix w_n = matricize(prob.w.values(), n);
  const Index rows = y_n.rows();

  NormalSystem sys;
  sys.rows = rows;
  sys.rhs = vec(y_n * psi);
  sys.delta = Matrix::Zero(rows * R, rows * R);

  // data term: (Psi^T (x) I) diag(vec W) (Psi (x) I), block-diagonal per row
  Matrix gram(R, R);
  for (Index p = 0; p < rows; ++p) {
    gram.setZero();
    for (Index c = 0; c < psi.rows(); ++c) {
      if (w_n(p, c) == 0.0) continue;
      gram.selfadjointView<Eigen::Lower>().rankUpdate(psi.row(c).transpose());
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    for (Index s = 0; s < R; ++s)
      for (Index r = 0; r < R; ++r) sys.delta(p + rows * r, p + rows * s) += gram(r, s);
  }

  // Without context both variants reduce to the ridge system lambda I.
  if (!need_context) {
    detail::add_kron_identity(sys.delta, Matrix::Identity(R, R), rows, opt.lambda);
    return sys;
  }
  const Matrix psi_gram = psi.transpose() * psi;
  const Matrix side = phi.transpose() * phi + gamma.transpose() * gamma;
  detail::add_kron(sys.delta, psi_gram, left->transpose() * *left, opt.beta);
  if (opt.equations == NormalEquations::Consistent) {
    detail::add_kron_identity(sys.delta, Matrix::Identity(R, R), rows, opt.lambda);
    detail::add_kron_identity(sys.delta, side, rows, opt.beta);
  } else {
    const Matrix inner = Matrix::Identity(R, R) + side;
    detail::add_kron_identity(sys.delta, inner.transpose(), rows, opt.lambda);
  }
  return sys;
}

inline const Matrix& factor_of(const FactorSet& f, FactorMode mode) {
  switch (mode) {
    case FactorMode::A: return f.A;
    case FactorMode::B: return f.B;
    default: return f.C;
  }
}

inline Matrix& factor_of(FactorSet& f, FactorMode mode) {
  return const_cast<Matrix&>(factor_of(static_cast<const FactorSet&>(f), mode));
}

/// Gradient of the subproblem for `mode` at the current factors,
/// 2 (Delta vec(F) - rhs), returned in the factor's shape. Under
/// NormalEquations::Consistent this is the partial gradient of objective().
inline Matrix subproblem_gradient(FactorMode mode, const FactorSet& f,
                                  const CompletionProblem& prob) {
  const NormalSystem sys = normal_equations(mode, f, prob);
  const Matrix& x = factor_of(f, mode);
  return unvec(2.0 * (sys.delta * vec(x) - sys.rhs), x.rows(), x.cols());
}

/// New value of one factor with the other two fixed: unvec(pinv(Delta) rhs).
inline Matrix solve_factor(FactorMode mode, const FactorSet& f, const CompletionProblem& prob) {
  const NormalSystem sys = normal_equations(mode, f, prob);
  // lambda I is the only term known to be positive definite
  const double shift =
      prob.options.equations == NormalEquations::Consistent ? prob.options.lambda : 0.0;
  return unvec(pinv_solve_psd(sys.delta, sys.rhs, shift), sys.rows, f.rank());
}

/// Seeded initial factors with entries uniform in [0, 1).
inline FactorSet initial_factors(const Dims& dims, Index rank, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FactorSet f{Matrix(dims[0], rank), Matrix(dims[1], rank), Matrix(dims[2], rank)};
  for (Matrix* m : {&f.A, &f.B, &f.C})
    for (Index n = 0; n < m->size(); ++n) m->data()[n] = detail::uniform01(rng);
  return f;
}

struct CompletionResult {
  Tensor3 xhat;
  SolveReport report;
};

/// Alternating updates A, B, C until the objective decrease of a sweep
/// drops below tol or max_iters sweeps have run.
inline CompletionResult complete(const CompletionProblem& prob) {
  prob.validate();
  if (prob.w.observed_count() == 0)
    throw NothingObservedError("mask marks every entry missing; nothing to complete");
  const auto start = std::chrono::steady_clock::now();
  const auto& opt = prob.options;

  SolveReport report;
  report.factors = initial_factors(prob.y.dims(), opt.rank, opt.seed);
  FactorSet& f = report.factors;
  double prev = objective(f, prob);
  report.objective_trace.push_back(prev);
  for (int it = 1; it <= opt.max_iters; ++it) {
    f.A = solve_factor(FactorMode::A, f, prob);
    f.B = solve_factor(FactorMode::B, f, prob);
    f.C = solve_factor(FactorMode::C, f, prob);
    const double cur = objective(f, prob);
    report.objective_trace.push_back(cur);
    report.iterations = it;
    const double eps = prev - cur;
    prev = cur;
    if (eps < opt.tol) {
      report.converged = true;
      break;
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {cp_reconstruct(f), std::move(report)};
}

/// complete() with beta forced to 0.
inline CompletionResult baseline_complete(const CompletionProblem& prob) {
  CompletionProblem p = prob;
  p.options.beta = 0.0;
  return complete(p);
}

}  // namespace urbancp
