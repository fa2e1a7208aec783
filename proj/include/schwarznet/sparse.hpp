#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "schwarznet/graph.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

struct Triplet {
  Index row;
  Index col;
  double value;
};

// Sparse real matrix in compressed row storage with sorted columns, tied to
// a graph through the generalized bandwidth. Exact zeros are dropped at
// build; symmetric matrices are stored fully (both triangles) and storage
// symmetry is enforced bit-exactly. Immutable after construction.
class StructuredMatrix {
public:
  StructuredMatrix() = default;

  // Duplicate triplets are summed in input order (stable), entries that come
  // out exactly 0 are dropped.
  static StructuredMatrix from_triplets(Index n, std::vector<Triplet> triplets,
                                        bool symmetric);
  static StructuredMatrix identity(Index n);
  static StructuredMatrix diagonal(std::span<const double> values);
  static StructuredMatrix from_dense(const Eigen::MatrixXd& dense, bool symmetric,
                                     double drop_tol = 0.0);

  Index n() const { return n_; }
  std::size_t nnz() const { return vals_.size(); }
  bool symmetric() const { return symmetric_; }

  std::span<const Index> row_cols(Index i) const;
  std::span<const double> row_vals(Index i) const;

  // Entry lookup (0 when absent).
  double coeff(Index i, Index j) const;

  std::vector<double> multiply(std::span<const double> x) const;
  void multiply_into(std::span<const double> x, std::span<double> y) const;

  Eigen::MatrixXd dense() const;

  // max_i sum_j |a_ij|
  double inf_norm() const;
  double max_abs_diag() const;

private:
  Index n_ = 0;
  bool symmetric_ = false;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> cols_;
  std::vector<double> vals_;
};

StructuredMatrix add(const StructuredMatrix& a, const StructuredMatrix& b);
StructuredMatrix matmul(const StructuredMatrix& a, const StructuredMatrix& b);

// Generalized bandwidth: max over stored nonzeros (i,j) of d_G(i,j).
// 0 for diagonal (and empty) matrices. A nonzero between different graph
// components has infinite distance and raises numeric_error.
int bandwidth(const StructuredMatrix& m, const Graph& g);

struct BandwidthAlgebraReport {
  int bw_a = 0;
  int bw_b = 0;
  int bw_sum = 0;
  int bw_prod = 0;
  bool lemma_holds = false;  // bw(a+b) <= max(bw_a,bw_b) and bw(ab) <= bw_a+bw_b
};

BandwidthAlgebraReport check_bandwidth_algebra(const StructuredMatrix& a,
                                               const StructuredMatrix& b,
                                               const Graph& g);

// bandwidth / diameter, with a warning flag above `warn_threshold`; the
// matrix is useful to the decomposition schemes only when this is small.
struct StructureRatio {
  int bandwidth = 0;
  int diameter = 0;
  double ratio = 0.0;
  bool warn = false;
};
StructureRatio structure_ratio(const StructuredMatrix& m, const Graph& g,
                               double warn_threshold = 0.25);

// inf-norm of (h x - f) restricted to `rows` (all rows when empty).
double residual_inf(const StructuredMatrix& h, std::span<const double> x,
                    std::span<const double> f,
                    std::span<const Index> rows = {});

}  // namespace schwarznet
