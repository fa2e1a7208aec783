#include <algorithm>
#include <chrono>
#include <cmath>

#include "schwarznet/solve.hpp"
#include "schwarznet/subdomain.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace schwarznet {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> initial_iterate(const StructuredMatrix& h,
                                    const SolveOptions& opts) {
  if (opts.x0.empty()) return std::vector<double>(h.n(), 0.0);
  if (static_cast<Index>(opts.x0.size()) != h.n())
    throw input_error("solve: x0 dimension mismatch");
  return opts.x0;
}

double err_to_ref(std::span<const double> x, const SolveOptions& opts) {
  if (opts.x_ref.empty()) return std::numeric_limits<double>::quiet_NaN();
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    e = std::max(e, std::abs(x[i] - opts.x_ref[i]));
  return e;
}

void check_divergence(double eps, double& eps_min, double factor) {
  if (!std::isfinite(eps))
    throw divergence_error("scheme diverging (non-finite residual; "
                           "rho(S^omega) >= 1 likely)");
  if (eps_min > 0.0 && eps > factor * eps_min)
    throw divergence_error("scheme diverging (residual grew " +
                           std::to_string(eps / eps_min) +
                           "x from its minimum; rho(S^omega) >= 1 likely)");
  eps_min = std::min(eps_min, eps);
}

// One driver for the parallel kernel and the serial reference: identical
// arithmetic per block, only the loop over blocks differs.
IterationState sync_solve_impl(const StructuredMatrix& h,
                               std::span<const double> f,
                               const OverlapBlocks& blocks,
                               const BackendOptions& backend,
                               const SolveOptions& opts, bool parallel) {
  if (opts.tol <= 0.0) throw input_error("solve: tol must be positive");
  if (static_cast<Index>(f.size()) != h.n())
    throw input_error("solve: f dimension mismatch");

  const auto t0 = Clock::now();
  auto subs = project_all(h, f, blocks, parallel ? opts.n_threads : 1);
  auto solvers = make_block_solvers(subs, backend);
  const Index k_blocks = blocks.k_blocks();

  IterationState state;
  state.x = initial_iterate(h, opts);
  std::vector<double> x_next = state.x;
  if (opts.record_history) state.history.push_back(state.x);

  // Per-block solution on V_k^omega; doubles as the CG warm start.
  std::vector<std::vector<double>> y(k_blocks);
  for (Index k = 0; k < k_blocks; ++k) {
    y[k].resize(subs[k].local_size());
    for (Index lr = 0; lr < subs[k].local_size(); ++lr)
      y[k][lr] = state.x[subs[k].block[lr]];
  }
  std::vector<double> block_eps(k_blocks, 0.0);

  state.initial_residual = residual_inf(h, state.x, f);
  double eps_min = state.initial_residual;

#ifdef _OPENMP
  const int threads =
      parallel ? (opts.n_threads > 0 ? opts.n_threads : omp_get_max_threads()) : 1;
#endif

  for (int t = 0; t < opts.max_iter; ++t) {
    // All blocks read the frozen x^(t) and write disjoint interior slices
    // of x^(t+1): results do not depend on the worker count.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (parallel)
#endif
    for (Index k = 0; k < k_blocks; ++k) {
      auto rhs = subs[k].boundary_rhs(state.x);
      solvers[k].solve(rhs, y[k]);
      for (std::size_t r = 0; r < subs[k].interior.size(); ++r)
        x_next[subs[k].interior[r]] = y[k][subs[k].restrict_rows[r]];
    }
    std::swap(state.x, x_next);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(threads) if (parallel)
#endif
    for (Index k = 0; k < k_blocks; ++k)
      block_eps[k] = subs[k].local_residual_inf(state.x);
    double eps = 0.0;
    for (Index k = 0; k < k_blocks; ++k) eps = std::max(eps, block_eps[k]);

    state.iterations = t + 1;
    state.residual = eps;
    if (opts.record_history) state.history.push_back(state.x);
    if ((t + 1) % std::max(1, opts.log_interval) == 0 || eps <= opts.tol)
      state.trace.push_back(
          {t + 1, seconds_since(t0), eps, err_to_ref(state.x, opts), -1, -1});

    if (eps <= opts.tol) {
      state.converged = true;
      break;
    }
    check_divergence(eps, eps_min, opts.divergence_factor);
  }
  return state;
}

}  // namespace

IterationState sync_solve(const StructuredMatrix& h, std::span<const double> f,
                          const OverlapBlocks& blocks,
                          const BackendOptions& backend,
                          const SolveOptions& opts) {
  return sync_solve_impl(h, f, blocks, backend, opts, true);
}

IterationState sync_solve_serial(const StructuredMatrix& h,
                                 std::span<const double> f,
                                 const OverlapBlocks& blocks,
                                 const BackendOptions& backend,
                                 const SolveOptions& opts) {
  return sync_solve_impl(h, f, blocks, backend, opts, false);
}

RateMeasurement verify_linear_rate(const IterationState& state,
                                   std::span<const double> x_star) {
  if (state.history.empty())
    throw input_error("verify_linear_rate: solve must record_history");
  double x_scale = 1.0;
  for (double v : x_star) x_scale = std::max(x_scale, std::abs(v));
  const double noise_floor = 1e-7 * x_scale;

  std::vector<double> err(state.history.size());
  for (std::size_t t = 0; t < state.history.size(); ++t) {
    double e = 0.0;
    for (std::size_t i = 0; i < x_star.size(); ++i)
      e = std::max(e, std::abs(state.history[t][i] - x_star[i]));
    err[t] = e;
  }

  // Tail: residual below 1e-2 of its initial value. The trace holds the
  // residual of iterate t at row t-1 (x0 is not logged).
  std::size_t tail_start = state.history.size();
  for (const auto& row : state.trace) {
    if (row.residual < 1e-2 * state.initial_residual) {
      tail_start = static_cast<std::size_t>(row.iter);
      break;
    }
  }

  RateMeasurement meas;
  double sup = 0.0;
  for (std::size_t t = tail_start; t + 1 < err.size(); ++t) {
    if (err[t] < noise_floor || err[t + 1] < noise_floor) continue;
    sup = std::max(sup, err[t + 1] / err[t]);
    ++meas.tail_points;
  }
  meas.rate = sup;
  meas.conclusive = meas.tail_points >= 5;
  return meas;
}

}  // namespace schwarznet
