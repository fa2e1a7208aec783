#pragma once

#include <span>
#include <vector>

#include "schwarznet/graph.hpp"
#include "schwarznet/solve.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/subdomain.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

// Soft two-sided bound on an edge difference x_i - x_j.
struct BoxRow {
  Index i = 0;
  Index j = 0;
  double lo = 0.0;
  double hi = 0.0;
};

// Quadratic core plus quadratic slack penalties for violated edge-difference
// bounds:
//   phi(x) = 1/2 x^T H x - f^T x
//            + mu * sum_e (max(0, d_e - hi)^2 + max(0, lo - d_e)^2),
// with d_e = x_i - x_j. Strongly convex and C^1; subproblems always feasible.
struct ConstrainedProblem {
  StructuredMatrix h;
  std::vector<double> f;
  std::vector<BoxRow> box_rows;
  double mu = 0.0;  // <= 0 selects 1e3 * max diagonal of H

  double penalty_weight() const;
  void validate(const Graph& g) const;

  // gradient of phi; the convergence metric is its infinity norm.
  std::vector<double> gradient(std::span<const double> x) const;
  double kkt_residual_inf(std::span<const double> x) const;
};

struct ConstrainedSolveReport {
  IterationState state;
  std::vector<double> step_trace;  // ||x^{t+1} - x^t||_inf per iteration
  std::vector<double> kkt_trace;
  // Outer iterations at which any block's inner loop hit its cap.
  std::vector<int> inexact_iters;
  // Active set (box row index, +1 upper / -1 lower) of the final iterate.
  std::vector<std::pair<Index, int>> active_set;
};

struct ConstrainedOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  double inner_tol = 1e-8;
  int inner_maxit = 100;
  std::vector<double> x0;
  bool record_history = false;
  int n_threads = 0;
  double divergence_factor = 1e6;
  double active_tol = 1e-6;  // |d_e - bound| below this counts as active
};

// Minimizes phi over the variables of one expanded block with the exterior
// frozen at x_current; returns the full local solution on V_k^omega.
// Solved by an active-set Newton loop (exact for this piecewise-quadratic
// objective), warm-started from x_current.
std::vector<double> constrained_subsolve(const ConstrainedProblem& p,
                                         const SubdomainSystem& sd,
                                         std::span<const double> x_current,
                                         const ConstrainedOptions& opts,
                                         bool* hit_inner_cap = nullptr);

// Synchronous overlapping scheme in the optimization space: block
// minimizations with frozen exteriors, restriction to interiors. Converged
// when the KKT residual of the full soft-constrained problem is <= tol.
ConstrainedSolveReport constrained_sync_solve(const ConstrainedProblem& p,
                                              const Graph& g,
                                              const OverlapBlocks& blocks,
                                              const ConstrainedOptions& opts);

}  // namespace schwarznet
