#pragma once

#include <span>
#include <string>
#include <vector>

#include "schwarznet/backend.hpp"
#include "schwarznet/graph.hpp"
#include "schwarznet/solve.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

// One block of the lifted consensus form. Shared-vertex quadratic terms are
// split by 1/(number of sharing blocks) so the block objectives sum exactly
// to the original; coupling rows tie each local copy of a shared vertex to
// one consensus entry.
struct LiftedBlock {
  Index k = 0;
  VertexList block;                  // V_k^omega, sorted global ids
  VertexList interior;               // V_k
  std::vector<Index> restrict_rows;  // positions of V_k inside block
  StructuredMatrix h_split;          // split quadratic, local indices
  std::vector<double> f_split;
  std::vector<Index> coupling_local; // local index per coupling row
  std::vector<Index> coupling_z;     // consensus index per coupling row
};

struct LiftedProblem {
  Index n = 0;
  int omega = 0;
  VertexList shared_vertices;  // vertices in >= 2 expanded blocks, sorted
  std::vector<LiftedBlock> blocks;
  // Entries of H covered by no expanded block: the lifted form then drops
  // them and is not equivalent to Hx=f. admm_solve refuses such problems.
  bool orphaned_coupling = false;
  std::string orphan_message;

  Index n_coupling_rows() const;
};

LiftedProblem build_lifted(const StructuredMatrix& h, std::span<const double> f,
                           const OverlapBlocks& blocks);

struct AdmmTraceRow {
  int iter = 0;
  double time_s = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double err_ref = std::numeric_limits<double>::quiet_NaN();
};

struct AdmmState {
  std::vector<std::vector<double>> x_blocks;  // per-block local solutions
  std::vector<double> z;                      // consensus values
  std::vector<std::vector<double>> y_blocks;  // per-coupling-row duals
  double rho = 0.0;
  std::vector<double> x;  // assembled from interior owners
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<AdmmTraceRow> trace;
};

struct AdmmOptions {
  double rho = 1.0;
  double tol = 1e-8;
  int max_iter = 10000;
  std::vector<double> x_ref;  // optional, enables err_ref column
  int n_threads = 0;
  Index dense_threshold = 512;
};

// Consensus ADMM on the lifted form: per-block regularized solves, a
// closed-form averaging z-update, and dual ascent on the coupling rows.
// Stops when max(primal, dual) infinity-norm residual <= tol.
AdmmState admm_solve(const LiftedProblem& lifted, const AdmmOptions& opts);

}  // namespace schwarznet
