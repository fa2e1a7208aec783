#include "schwarznet/subdomain.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace schwarznet {

Index SubdomainSystem::local_of(Index global) const {
  auto it = std::lower_bound(block.begin(), block.end(), global);
  if (it == block.end() || *it != global) return -1;
  return static_cast<Index>(it - block.begin());
}

std::vector<double> SubdomainSystem::boundary_rhs(
    std::span<const double> x_full) const {
  std::vector<double> rhs = f_block;
  for (const auto& e : h_cross)
    rhs[e.local_row] -= e.value * x_full[e.global_col];
  return rhs;
}

double SubdomainSystem::local_residual_inf(std::span<const double> x_full) const {
  const Index m = local_size();
  std::vector<double> r(m, 0.0);
  for (Index lr = 0; lr < m; ++lr) {
    double s = 0.0;
    auto cols = h_block.row_cols(lr);
    auto vals = h_block.row_vals(lr);
    for (std::size_t e = 0; e < cols.size(); ++e)
      s += vals[e] * x_full[block[cols[e]]];
    r[lr] = s;
  }
  for (const auto& e : h_cross) r[e.local_row] += e.value * x_full[e.global_col];
  double best = 0.0;
  for (Index lr = 0; lr < m; ++lr)
    best = std::max(best, std::abs(r[lr] - f_block[lr]));
  return best;
}

double SubdomainSystem::coupling_abs_sum() const {
  double s = 0.0;
  for (const auto& e : h_cross) s += std::abs(e.value);
  return s;
}

SubdomainSystem project_subdomain(const StructuredMatrix& h,
                                  std::span<const double> f,
                                  const OverlapBlocks& blocks, Index k) {
  if (!h.symmetric()) throw input_error("project_subdomain: H must be symmetric");
  if (static_cast<Index>(f.size()) != h.n())
    throw input_error("project_subdomain: f dimension mismatch");
  if (k < 0 || k >= blocks.k_blocks())
    throw input_error("project_subdomain: block id out of range");

  SubdomainSystem sd;
  sd.k = k;
  sd.interior = blocks.interior[k];
  sd.block = blocks.blocks[k];

  std::vector<Index> local(h.n(), -1);
  for (Index lr = 0; lr < sd.local_size(); ++lr) local[sd.block[lr]] = lr;

  sd.restrict_rows.reserve(sd.interior.size());
  for (Index v : sd.interior) sd.restrict_rows.push_back(local[v]);

  std::vector<Triplet> block_entries;
  sd.f_block.resize(sd.block.size());
  for (Index lr = 0; lr < sd.local_size(); ++lr) {
    const Index i = sd.block[lr];
    sd.f_block[lr] = f[i];
    auto cols = h.row_cols(i);
    auto vals = h.row_vals(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const Index j = cols[e];
      if (local[j] >= 0)
        block_entries.push_back({lr, local[j], vals[e]});
      else
        sd.h_cross.push_back({lr, j, vals[e]});
    }
  }
  sd.h_block = StructuredMatrix::from_triplets(
      sd.local_size(), std::move(block_entries), true);
  return sd;
}

std::vector<SubdomainSystem> project_all(const StructuredMatrix& h,
                                         std::span<const double> f,
                                         const OverlapBlocks& blocks,
                                         int n_threads) {
  const Index k_blocks = blocks.k_blocks();
  std::vector<SubdomainSystem> out(k_blocks);
#ifdef _OPENMP
  const int threads = n_threads > 0 ? n_threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (Index k = 0; k < k_blocks; ++k) out[k] = project_subdomain(h, f, blocks, k);
  return out;
}

}  // namespace schwarznet
