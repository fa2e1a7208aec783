#pragma once

#include <span>
#include <vector>

#include "schwarznet/backend.hpp"
#include "schwarznet/graph.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

struct TraceRow {
  int iter = 0;
  double time_s = 0.0;
  double residual = 0.0;
  // ||x - x_ref||_inf when a reference solution was supplied, else NaN.
  double err_ref = std::numeric_limits<double>::quiet_NaN();
  int worker_id = -1;  // threaded async only
  int local_iter = -1;
};

struct IterationState {
  std::vector<double> x;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  double initial_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool timed_out = false;
  std::vector<TraceRow> trace;
  // Iterate snapshots (x0 first) when SolveOptions::record_history is set.
  std::vector<std::vector<double>> history;
  // Simulation mode: completed-epoch count per recorded iterate.
  std::vector<int> epochs;
  // Threaded mode: exact exit residual r satisfies r <= tol*(1+exit_slack).
  double exit_slack = 0.0;
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 10000;
  std::vector<double> x0;     // empty = zeros
  std::vector<double> x_ref;  // optional, enables err_ref trace column
  bool record_history = false;
  int n_threads = 0;          // 0 = library default
  int log_interval = 1;
  // Divergence detector: residual above this multiple of its running
  // minimum aborts with divergence_error.
  double divergence_factor = 1e6;
  double wall_limit_s = 0.0;  // threaded async; 0 = no limit (uses 600 s)
};

// Synchronous overlapping scheme: every block solves its expanded
// subproblem against the previous iterate, in parallel, and the new iterate
// takes each vertex's value from its owning block. Iterates are identical
// for any worker count.
IterationState sync_solve(const StructuredMatrix& h, std::span<const double> f,
                          const OverlapBlocks& blocks,
                          const BackendOptions& backend,
                          const SolveOptions& opts);

// Plain serial implementation of the same scheme, kept as the reference the
// parallel kernel is tested against (bitwise identical traces).
IterationState sync_solve_serial(const StructuredMatrix& h,
                                 std::span<const double> f,
                                 const OverlapBlocks& blocks,
                                 const BackendOptions& backend,
                                 const SolveOptions& opts);

struct RateMeasurement {
  double rate = 0.0;
  bool conclusive = false;
  int tail_points = 0;
};

// Measured per-step contraction sup ||x^{t+1}-x*|| / ||x^t-x*|| over the
// trace tail (after the residual first drops below 1e-2 of its initial
// value; iterates within solver roundoff of x* are excluded). Requires
// record_history.
RateMeasurement verify_linear_rate(const IterationState& state,
                                   std::span<const double> x_star);

}  // namespace schwarznet
