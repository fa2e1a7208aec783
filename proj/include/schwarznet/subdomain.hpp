#pragma once

#include <span>
#include <vector>

#include "schwarznet/graph.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

// One coupling entry of H with row inside V_k^omega and column outside.
struct CrossEntry {
  Index local_row;
  Index global_col;
  double value;
};

// Projection of (H, f) onto one expanded subdomain: H_k^omega over local
// indices, the cross block H_{-k}^omega as explicit coupling entries, and
// f_k^omega. Restriction operators are realized as index maps, never as
// materialized 0/1 matrices. Immutable after construction.
struct SubdomainSystem {
  Index k = 0;
  VertexList interior;              // V_k, sorted global ids
  VertexList block;                 // V_k^omega, sorted global ids
  std::vector<Index> restrict_rows; // positions of V_k inside `block`
  StructuredMatrix h_block;         // H_k^omega in local indices, symmetric
  std::vector<CrossEntry> h_cross;  // H_{-k}^omega; empty when V_k^omega = V
  std::vector<double> f_block;      // f_k^omega

  Index local_size() const { return static_cast<Index>(block.size()); }

  // Local index of a global vertex inside `block`, -1 if absent.
  Index local_of(Index global) const;

  // f_k^omega - H_{-k}^omega {x}_{V \ V_k^omega}
  std::vector<double> boundary_rhs(std::span<const double> x_full) const;

  // || H_{+-k}^omega x - f_k^omega ||_inf over the rows V_k^omega of the
  // full system, evaluated from local storage only (Algorithm 1's local
  // error). Summation order is fixed, so sync and async paths agree
  // bit-for-bit.
  double local_residual_inf(std::span<const double> x_full) const;

  // R_k = sum of |coupling entries| between V_k^omega and its complement.
  double coupling_abs_sum() const;
};

SubdomainSystem project_subdomain(const StructuredMatrix& h,
                                  std::span<const double> f,
                                  const OverlapBlocks& blocks, Index k);

// All subdomains; built concurrently.
std::vector<SubdomainSystem> project_all(const StructuredMatrix& h,
                                         std::span<const double> f,
                                         const OverlapBlocks& blocks,
                                         int n_threads = 0);

}  // namespace schwarznet
