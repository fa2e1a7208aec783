#include "schwarznet/constrained.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace schwarznet {

namespace {
using Clock = std::chrono::steady_clock;
}

double ConstrainedProblem::penalty_weight() const {
  if (mu > 0.0) return mu;
  return 1e3 * std::max(1.0, h.max_abs_diag());
}

void ConstrainedProblem::validate(const Graph& g) const {
  if (static_cast<Index>(f.size()) != h.n())
    throw input_error("constrained: f dimension mismatch");
  for (const auto& row : box_rows) {
    g.check_vertex(row.i);
    g.check_vertex(row.j);
    if (!(row.lo < row.hi))
      throw input_error("constrained: need lo < hi on every box row");
  }
}

std::vector<double> ConstrainedProblem::gradient(std::span<const double> x) const {
  std::vector<double> grad = h.multiply(x);
  for (Index i = 0; i < h.n(); ++i) grad[i] -= f[i];
  const double w = penalty_weight();
  for (const auto& row : box_rows) {
    const double d = x[row.i] - x[row.j];
    double pull = 0.0;
    if (d > row.hi)
      pull = 2.0 * w * (d - row.hi);
    else if (d < row.lo)
      pull = 2.0 * w * (d - row.lo);
    grad[row.i] += pull;
    grad[row.j] -= pull;
  }
  return grad;
}

double ConstrainedProblem::kkt_residual_inf(std::span<const double> x) const {
  auto grad = gradient(x);
  double best = 0.0;
  for (double v : grad) best = std::max(best, std::abs(v));
  return best;
}

namespace {

// A box row as seen from one block: local coefficient pattern and the frozen
// offset contributed by an exterior endpoint.
struct LocalRow {
  Index row_index;   // into ConstrainedProblem::box_rows
  Index li = -1;     // local index of i (or -1)
  Index lj = -1;     // local index of j (or -1)
  double offset = 0; // d = y_li - y_lj + offset with frozen terms folded in
  double lo = 0, hi = 0;
};

std::vector<LocalRow> localize_rows(const ConstrainedProblem& p,
                                    const SubdomainSystem& sd,
                                    std::span<const double> x_current) {
  std::vector<LocalRow> out;
  for (Index r = 0; r < static_cast<Index>(p.box_rows.size()); ++r) {
    const auto& br = p.box_rows[r];
    LocalRow lr;
    lr.row_index = r;
    lr.li = sd.local_of(br.i);
    lr.lj = sd.local_of(br.j);
    lr.lo = br.lo;
    lr.hi = br.hi;
    if (lr.li < 0 && lr.lj < 0) continue;  // constant in this subproblem
    if (lr.li < 0) lr.offset += x_current[br.i];
    if (lr.lj < 0) lr.offset -= x_current[br.j];
    out.push_back(lr);
  }
  return out;
}

double row_diff(const LocalRow& r, std::span<const double> y) {
  double d = r.offset;
  if (r.li >= 0) d += y[r.li];
  if (r.lj >= 0) d -= y[r.lj];
  return d;
}

// Signature of a violated set: +1 upper, -1 lower, 0 inactive per local row.
using ActiveSignature = std::vector<int>;

ActiveSignature violated_set(const std::vector<LocalRow>& rows,
                             std::span<const double> y) {
  ActiveSignature sig(rows.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double d = row_diff(rows[r], y);
    if (d > rows[r].hi)
      sig[r] = 1;
    else if (d < rows[r].lo)
      sig[r] = -1;
  }
  return sig;
}

struct SubsolveCache {
  ActiveSignature sig;
  Eigen::LLT<Eigen::MatrixXd> llt;
  bool valid = false;
};

// Active-set Newton for the block subproblem: assume the violated set, solve
// the resulting equality-penalized quadratic exactly, re-check. Exact on
// termination since the objective is piecewise quadratic and convex.
std::vector<double> subsolve_impl(const ConstrainedProblem& p,
                                  const SubdomainSystem& sd,
                                  std::span<const double> x_current,
                                  const ConstrainedOptions& opts,
                                  bool* hit_inner_cap, SubsolveCache* cache) {
  const Index m = sd.local_size();
  const double w = p.penalty_weight();
  auto rows = localize_rows(p, sd, x_current);
  auto rhs0 = sd.boundary_rhs(x_current);

  std::vector<double> y(m);
  for (Index lr = 0; lr < m; ++lr) y[lr] = x_current[sd.block[lr]];
  auto sig = violated_set(rows, y);

  Eigen::MatrixXd base = sd.h_block.dense();
  Eigen::VectorXd rhs(m);
  bool done = false;
  for (int pass = 0; pass < opts.inner_maxit; ++pass) {
    for (Index i = 0; i < m; ++i) rhs[i] = rhs0[i];
    const bool reuse = cache && cache->valid && cache->sig == sig;
    Eigen::MatrixXd mat;
    if (!reuse) mat = base;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (sig[r] == 0) continue;
      const auto& row = rows[r];
      const double bound = sig[r] > 0 ? row.hi : row.lo;
      if (!reuse) {
        if (row.li >= 0) mat(row.li, row.li) += 2.0 * w;
        if (row.lj >= 0) mat(row.lj, row.lj) += 2.0 * w;
        if (row.li >= 0 && row.lj >= 0) {
          mat(row.li, row.lj) -= 2.0 * w;
          mat(row.lj, row.li) -= 2.0 * w;
        }
      }
      const double shift = 2.0 * w * (bound - row.offset);
      if (row.li >= 0) rhs[row.li] += shift;
      if (row.lj >= 0) rhs[row.lj] -= shift;
    }
    if (!reuse) {
      if (cache) {
        cache->llt.compute(mat);
        cache->sig = sig;
        cache->valid = cache->llt.info() == Eigen::Success;
        if (!cache->valid)
          throw numeric_error("constrained subsolve: block matrix not PD for "
                              "block " + std::to_string(sd.k));
      }
    }
    Eigen::VectorXd sol;
    if (cache) {
      sol = cache->llt.solve(rhs);
    } else {
      Eigen::LLT<Eigen::MatrixXd> llt(mat);
      if (llt.info() != Eigen::Success)
        throw numeric_error("constrained subsolve: block matrix not PD for "
                            "block " + std::to_string(sd.k));
      sol = llt.solve(rhs);
    }
    for (Index i = 0; i < m; ++i) y[i] = sol[i];

    auto next = violated_set(rows, y);
    if (next == sig) {
      done = true;
      break;
    }
    sig = std::move(next);
  }
  if (!done && hit_inner_cap) *hit_inner_cap = true;
  return y;
}

}  // namespace

std::vector<double> constrained_subsolve(const ConstrainedProblem& p,
                                         const SubdomainSystem& sd,
                                         std::span<const double> x_current,
                                         const ConstrainedOptions& opts,
                                         bool* hit_inner_cap) {
  return subsolve_impl(p, sd, x_current, opts, hit_inner_cap, nullptr);
}

ConstrainedSolveReport constrained_sync_solve(const ConstrainedProblem& p,
                                              const Graph& g,
                                              const OverlapBlocks& blocks,
                                              const ConstrainedOptions& opts) {
  p.validate(g);
  if (opts.tol <= 0.0) throw input_error("constrained: tol must be positive");
  const auto t0 = Clock::now();
  auto subs = project_all(p.h, p.f, blocks, opts.n_threads);
  const Index k_blocks = blocks.k_blocks();
  std::vector<SubsolveCache> caches(k_blocks);

  ConstrainedSolveReport report;
  auto& state = report.state;
  state.x = opts.x0.empty() ? std::vector<double>(p.h.n(), 0.0) : opts.x0;
  if (static_cast<Index>(state.x.size()) != p.h.n())
    throw input_error("constrained: x0 dimension mismatch");
  if (opts.record_history) state.history.push_back(state.x);
  std::vector<double> x_next = state.x;

  state.initial_residual = p.kkt_residual_inf(state.x);
  double kkt_min = state.initial_residual;

#ifdef _OPENMP
  const int threads =
      opts.n_threads > 0 ? opts.n_threads : omp_get_max_threads();
#endif

  for (int t = 0; t < opts.max_iter; ++t) {
    bool inner_cap = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (Index k = 0; k < k_blocks; ++k) {
      bool cap = false;
      auto y = subsolve_impl(p, subs[k], state.x, opts, &cap, &caches[k]);
      for (std::size_t r = 0; r < subs[k].interior.size(); ++r)
        x_next[subs[k].interior[r]] = y[subs[k].restrict_rows[r]];
      if (cap) {
#ifdef _OPENMP
#pragma omp critical
#endif
        inner_cap = true;
      }
    }

    double step = 0.0;
    for (Index i = 0; i < p.h.n(); ++i)
      step = std::max(step, std::abs(x_next[i] - state.x[i]));
    std::swap(state.x, x_next);
    const double kkt = p.kkt_residual_inf(state.x);

    state.iterations = t + 1;
    state.residual = kkt;
    report.step_trace.push_back(step);
    report.kkt_trace.push_back(kkt);
    if (inner_cap) report.inexact_iters.push_back(t + 1);
    if (opts.record_history) state.history.push_back(state.x);
    state.trace.push_back(
        {t + 1, std::chrono::duration<double>(Clock::now() - t0).count(), kkt,
         std::numeric_limits<double>::quiet_NaN(), -1, -1});

    if (kkt <= opts.tol) {
      state.converged = true;
      break;
    }
    if (!std::isfinite(kkt))
      throw divergence_error("constrained scheme diverging (non-finite KKT "
                             "residual)");
    if (kkt_min > 0.0 && kkt > opts.divergence_factor * kkt_min)
      throw divergence_error("constrained scheme diverging (KKT residual grew " +
                             std::to_string(kkt / kkt_min) +
                             "x from its minimum)");
    kkt_min = std::min(kkt_min, kkt);
  }

  for (Index r = 0; r < static_cast<Index>(p.box_rows.size()); ++r) {
    const auto& br = p.box_rows[r];
    const double d = state.x[br.i] - state.x[br.j];
    if (d >= br.hi - opts.active_tol)
      report.active_set.emplace_back(r, 1);
    else if (d <= br.lo + opts.active_tol)
      report.active_set.emplace_back(r, -1);
  }
  return report;
}

}  // namespace schwarznet
