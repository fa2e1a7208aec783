#include "schwarznet/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace schwarznet {

namespace {
using Clock = std::chrono::steady_clock;
}

Index LiftedProblem::n_coupling_rows() const {
  Index total = 0;
  for (const auto& b : blocks) total += static_cast<Index>(b.coupling_local.size());
  return total;
}

LiftedProblem build_lifted(const StructuredMatrix& h, std::span<const double> f,
                           const OverlapBlocks& blocks) {
  if (!h.symmetric()) throw input_error("build_lifted: H must be symmetric");
  if (static_cast<Index>(f.size()) != h.n())
    throw input_error("build_lifted: f dimension mismatch");
  const Index n = h.n();
  const Index k_blocks = blocks.k_blocks();

  // Membership counts: c_i = #blocks whose expansion contains i.
  std::vector<std::vector<Index>> member_of(n);
  for (Index k = 0; k < k_blocks; ++k)
    for (Index v : blocks.blocks[k]) member_of[v].push_back(k);

  LiftedProblem lifted;
  lifted.n = n;
  lifted.omega = blocks.omega;
  std::vector<Index> z_index(n, -1);
  for (Index v = 0; v < n; ++v) {
    if (member_of[v].size() >= 2) {
      z_index[v] = static_cast<Index>(lifted.shared_vertices.size());
      lifted.shared_vertices.push_back(v);
    }
  }

  lifted.blocks.resize(k_blocks);
  std::vector<std::vector<Index>> local_of(k_blocks);
  for (Index k = 0; k < k_blocks; ++k) {
    auto& lb = lifted.blocks[k];
    lb.k = k;
    lb.block = blocks.blocks[k];
    lb.interior = blocks.interior[k];
    local_of[k].assign(n, -1);
    for (Index lr = 0; lr < static_cast<Index>(lb.block.size()); ++lr)
      local_of[k][lb.block[lr]] = lr;
    for (Index v : lb.interior) lb.restrict_rows.push_back(local_of[k][v]);
    for (Index lr = 0; lr < static_cast<Index>(lb.block.size()); ++lr) {
      const Index v = lb.block[lr];
      if (z_index[v] >= 0) {
        lb.coupling_local.push_back(lr);
        lb.coupling_z.push_back(z_index[v]);
      }
    }
  }

  // Split every entry of H across the blocks whose expansion contains both
  // endpoints; entries covered by no block are orphaned (the lifted form
  // would silently drop them).
  std::vector<std::vector<Triplet>> entries(k_blocks);
  Index n_orphans = 0;
  Index first_orphan_i = -1, first_orphan_j = -1;
  for (Index i = 0; i < n; ++i) {
    auto cols = h.row_cols(i);
    auto vals = h.row_vals(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const Index j = cols[e];
      Index count = 0;
      for (Index k : member_of[i])
        if (local_of[k][j] >= 0) ++count;
      if (count == 0) {
        ++n_orphans;
        if (first_orphan_i < 0) {
          first_orphan_i = i;
          first_orphan_j = j;
        }
        continue;
      }
      const double share = vals[e] / count;
      for (Index k : member_of[i])
        if (local_of[k][j] >= 0)
          entries[k].push_back({local_of[k][i], local_of[k][j], share});
    }
  }
  for (Index k = 0; k < k_blocks; ++k) {
    auto& lb = lifted.blocks[k];
    lb.h_split = StructuredMatrix::from_triplets(
        static_cast<Index>(lb.block.size()), std::move(entries[k]), true);
    lb.f_split.assign(lb.block.size(), 0.0);
    for (Index lr = 0; lr < static_cast<Index>(lb.block.size()); ++lr) {
      const Index v = lb.block[lr];
      lb.f_split[lr] = f[v] / static_cast<double>(member_of[v].size());
    }
  }

  if (n_orphans > 0) {
    lifted.orphaned_coupling = true;
    lifted.orphan_message =
        std::to_string(n_orphans) + " H entries are covered by no expanded "
        "block (first at (" + std::to_string(first_orphan_i) + "," +
        std::to_string(first_orphan_j) + ")); the lifted form is not "
        "equivalent to Hx=f. Increase omega (>= 1 required, >= "
        "ceil(B_G(H)/2) typically suffices).";
  }
  return lifted;
}

AdmmState admm_solve(const LiftedProblem& lifted, const AdmmOptions& opts) {
  if (opts.rho <= 0.0) throw input_error("admm_solve: rho must be positive");
  if (opts.tol <= 0.0) throw input_error("admm_solve: tol must be positive");
  if (lifted.orphaned_coupling)
    throw input_error("admm_solve: " + lifted.orphan_message);

  const auto t0 = Clock::now();
  const Index k_blocks = static_cast<Index>(lifted.blocks.size());
  const Index n_shared = static_cast<Index>(lifted.shared_vertices.size());

  AdmmState state;
  state.rho = opts.rho;
  state.x.assign(lifted.n, 0.0);
  state.z.assign(n_shared, 0.0);
  state.x_blocks.resize(k_blocks);
  state.y_blocks.resize(k_blocks);

  // Per-block solvers for (H_split + rho * A_k^T A_k); A_k^T A_k adds rho on
  // the diagonal of every shared local variable.
  std::vector<BlockSolver> solvers(k_blocks);
  std::vector<StructuredMatrix> x_update_mats(k_blocks);
  BackendOptions backend;
  backend.dense_threshold = opts.dense_threshold;
  backend.cg_tol = 1e-12;
  for (Index k = 0; k < k_blocks; ++k) {
    const auto& lb = lifted.blocks[k];
    std::vector<Triplet> t;
    for (Index lr = 0; lr < static_cast<Index>(lb.block.size()); ++lr) {
      auto cols = lb.h_split.row_cols(lr);
      auto vals = lb.h_split.row_vals(lr);
      for (std::size_t e = 0; e < cols.size(); ++e)
        t.push_back({lr, cols[e], vals[e]});
    }
    for (Index li : lb.coupling_local) t.push_back({li, li, opts.rho});
    x_update_mats[k] = StructuredMatrix::from_triplets(
        static_cast<Index>(lb.block.size()), std::move(t), true);
    try {
      solvers[k] = BlockSolver(x_update_mats[k], backend, k);
    } catch (const numeric_error&) {
      throw numeric_error("admm_solve: block " + std::to_string(k) +
                          " x-update matrix not PD");
    }
    state.x_blocks[k].assign(lb.block.size(), 0.0);
    state.y_blocks[k].assign(lb.coupling_local.size(), 0.0);
  }

  std::vector<double> z_prev = state.z;
  std::vector<std::vector<double>> rhs(k_blocks);

#ifdef _OPENMP
  const int threads =
      opts.n_threads > 0 ? opts.n_threads : omp_get_max_threads();
#endif

  for (int it = 0; it < opts.max_iter; ++it) {
    // x-update: (H_split + rho A^T A) x = f_split - A^T y + rho A^T z
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (Index k = 0; k < k_blocks; ++k) {
      const auto& lb = lifted.blocks[k];
      rhs[k] = lb.f_split;
      for (std::size_t r = 0; r < lb.coupling_local.size(); ++r)
        rhs[k][lb.coupling_local[r]] +=
            opts.rho * state.z[lb.coupling_z[r]] - state.y_blocks[k][r];
      solvers[k].solve(rhs[k], state.x_blocks[k]);
    }

    // z-update: average of local copies shifted by scaled duals.
    z_prev = state.z;
    std::vector<double> sum(n_shared, 0.0);
    std::vector<Index> count(n_shared, 0);
    for (Index k = 0; k < k_blocks; ++k) {
      const auto& lb = lifted.blocks[k];
      for (std::size_t r = 0; r < lb.coupling_local.size(); ++r) {
        sum[lb.coupling_z[r]] += state.x_blocks[k][lb.coupling_local[r]] +
                                 state.y_blocks[k][r] / opts.rho;
        ++count[lb.coupling_z[r]];
      }
    }
    for (Index s = 0; s < n_shared; ++s) state.z[s] = sum[s] / count[s];

    // dual update + primal residual
    double primal = 0.0;
    for (Index k = 0; k < k_blocks; ++k) {
      const auto& lb = lifted.blocks[k];
      for (std::size_t r = 0; r < lb.coupling_local.size(); ++r) {
        const double gap =
            state.x_blocks[k][lb.coupling_local[r]] - state.z[lb.coupling_z[r]];
        state.y_blocks[k][r] += opts.rho * gap;
        primal = std::max(primal, std::abs(gap));
      }
    }
    double dual = 0.0;
    for (Index s = 0; s < n_shared; ++s)
      dual = std::max(dual, opts.rho * std::abs(state.z[s] - z_prev[s]));

    // Assemble from interior owners.
    for (Index k = 0; k < k_blocks; ++k) {
      const auto& lb = lifted.blocks[k];
      for (std::size_t r = 0; r < lb.interior.size(); ++r)
        state.x[lb.interior[r]] = state.x_blocks[k][lb.restrict_rows[r]];
    }

    double err = std::numeric_limits<double>::quiet_NaN();
    if (!opts.x_ref.empty()) {
      err = 0.0;
      for (Index i = 0; i < lifted.n; ++i)
        err = std::max(err, std::abs(state.x[i] - opts.x_ref[i]));
    }

    state.iterations = it + 1;
    state.primal_residual = primal;
    state.dual_residual = dual;
    state.trace.push_back(
        {it + 1, std::chrono::duration<double>(Clock::now() - t0).count(),
         primal, dual, err});

    if (std::max(primal, dual) <= opts.tol) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace schwarznet
