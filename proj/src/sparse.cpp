#include "schwarznet/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace schwarznet {

StructuredMatrix StructuredMatrix::from_triplets(Index n,
                                                 std::vector<Triplet> triplets,
                                                 bool symmetric) {
  if (n < 0) throw input_error("matrix: negative dimension");
  for (const auto& t : triplets)
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw input_error("matrix: triplet index out of range");

  // Stable sort keeps duplicate contributions in input order, so mirrored
  // (i,j)/(j,i) duplicates sum in the same order and stay bit-identical.
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) {
                     return a.row != b.row ? a.row < b.row : a.col < b.col;
                   });

  StructuredMatrix m;
  m.n_ = n;
  m.symmetric_ = symmetric;
  m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  std::size_t i = 0;
  while (i < triplets.size()) {
    Index r = triplets[i].row, c = triplets[i].col;
    double v = triplets[i].value;
    std::size_t j = i + 1;
    while (j < triplets.size() && triplets[j].row == r && triplets[j].col == c)
      v += triplets[j++].value;
    if (v != 0.0) {
      m.cols_.push_back(c);
      m.vals_.push_back(v);
      ++m.row_ptr_[static_cast<std::size_t>(r) + 1];
    }
    i = j;
  }
  for (Index r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];

  if (symmetric) {
    for (Index r = 0; r < n; ++r) {
      auto cols = m.row_cols(r);
      auto vals = m.row_vals(r);
      for (std::size_t e = 0; e < cols.size(); ++e) {
        if (m.coeff(cols[e], r) != vals[e])
          throw input_error("matrix: storage not exactly symmetric at (" +
                            std::to_string(r) + "," + std::to_string(cols[e]) + ")");
      }
    }
  }
  return m;
}

StructuredMatrix StructuredMatrix::identity(Index n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, std::move(t), true);
}

StructuredMatrix StructuredMatrix::diagonal(std::span<const double> values) {
  std::vector<Triplet> t;
  t.reserve(values.size());
  for (Index i = 0; i < static_cast<Index>(values.size()); ++i)
    t.push_back({i, i, values[i]});
  return from_triplets(static_cast<Index>(values.size()), std::move(t), true);
}

StructuredMatrix StructuredMatrix::from_dense(const Eigen::MatrixXd& dense,
                                              bool symmetric, double drop_tol) {
  if (dense.rows() != dense.cols())
    throw input_error("matrix: from_dense requires a square matrix");
  std::vector<Triplet> t;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop_tol)
        t.push_back({i, j, dense(i, j)});
  return from_triplets(static_cast<Index>(dense.rows()), std::move(t), symmetric);
}

std::span<const Index> StructuredMatrix::row_cols(Index i) const {
  return {cols_.data() + row_ptr_[i],
          static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
}

std::span<const double> StructuredMatrix::row_vals(Index i) const {
  return {vals_.data() + row_ptr_[i],
          static_cast<std::size_t>(row_ptr_[i + 1] - row_ptr_[i])};
}

double StructuredMatrix::coeff(Index i, Index j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return vals_[row_ptr_[i] + (it - cols.begin())];
}

std::vector<double> StructuredMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  multiply_into(x, y);
  return y;
}

void StructuredMatrix::multiply_into(std::span<const double> x,
                                     std::span<double> y) const {
  if (static_cast<Index>(x.size()) != n_ || static_cast<Index>(y.size()) != n_)
    throw input_error("matrix: multiply dimension mismatch");
  for (Index i = 0; i < n_; ++i) {
    double s = 0.0;
    for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
      s += vals_[e] * x[cols_[e]];
    y[i] = s;
  }
}

Eigen::MatrixXd StructuredMatrix::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
      d(i, cols_[e]) = vals_[e];
  return d;
}

double StructuredMatrix::inf_norm() const {
  double best = 0.0;
  for (Index i = 0; i < n_; ++i) {
    double s = 0.0;
    for (Index e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e)
      s += std::abs(vals_[e]);
    best = std::max(best, s);
  }
  return best;
}

double StructuredMatrix::max_abs_diag() const {
  double best = 0.0;
  for (Index i = 0; i < n_; ++i) best = std::max(best, std::abs(coeff(i, i)));
  return best;
}

StructuredMatrix add(const StructuredMatrix& a, const StructuredMatrix& b) {
  if (a.n() != b.n()) throw input_error("add: dimension mismatch");
  std::vector<Triplet> t;
  for (Index i = 0; i < a.n(); ++i) {
    auto ca = a.row_cols(i), cb = b.row_cols(i);
    auto va = a.row_vals(i), vb = b.row_vals(i);
    for (std::size_t e = 0; e < ca.size(); ++e) t.push_back({i, ca[e], va[e]});
    for (std::size_t e = 0; e < cb.size(); ++e) t.push_back({i, cb[e], vb[e]});
  }
  return StructuredMatrix::from_triplets(a.n(), std::move(t),
                                         a.symmetric() && b.symmetric());
}

StructuredMatrix matmul(const StructuredMatrix& a, const StructuredMatrix& b) {
  if (a.n() != b.n()) throw input_error("matmul: dimension mismatch");
  const Index n = a.n();
  std::vector<Triplet> t;
  std::vector<double> acc(n, 0.0);
  std::vector<Index> touched;
  for (Index i = 0; i < n; ++i) {
    touched.clear();
    auto ca = a.row_cols(i);
    auto va = a.row_vals(i);
    for (std::size_t e = 0; e < ca.size(); ++e) {
      Index k = ca[e];
      auto cb = b.row_cols(k);
      auto vb = b.row_vals(k);
      for (std::size_t f = 0; f < cb.size(); ++f) {
        if (acc[cb[f]] == 0.0 &&
            std::find(touched.begin(), touched.end(), cb[f]) == touched.end())
          touched.push_back(cb[f]);
        acc[cb[f]] += va[e] * vb[f];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      if (acc[j] != 0.0) t.push_back({i, j, acc[j]});
      acc[j] = 0.0;
    }
  }
  return StructuredMatrix::from_triplets(n, std::move(t), false);
}

int bandwidth(const StructuredMatrix& m, const Graph& g) {
  if (m.n() > g.n_vertices())
    throw input_error("bandwidth: matrix larger than graph");
  int best = 0;
  std::vector<int> dist(g.n_vertices());
  std::deque<Index> queue;
  for (Index i = 0; i < m.n(); ++i) {
    auto cols = m.row_cols(i);
    std::size_t pending = 0;
    for (Index c : cols) pending += (c != i);
    if (pending == 0) continue;

    // BFS from i, stopping as soon as every stored column of the row has
    // been reached; avoids all-pairs distances.
    std::fill(dist.begin(), dist.end(), kUnreachable);
    queue.clear();
    dist[i] = 0;
    queue.push_back(i);
    while (!queue.empty() && pending > 0) {
      Index v = queue.front();
      queue.pop_front();
      if (v != i && std::binary_search(cols.begin(), cols.end(), v)) {
        best = std::max(best, dist[v]);
        --pending;
      }
      for (Index w : g.neighbors(v)) {
        if (dist[w] == kUnreachable) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    if (pending > 0)
      throw numeric_error(
          "bandwidth: nonzero between disconnected vertices in row " +
          std::to_string(i) + " (infinite bandwidth)");
  }
  return best;
}

BandwidthAlgebraReport check_bandwidth_algebra(const StructuredMatrix& a,
                                               const StructuredMatrix& b,
                                               const Graph& g) {
  if (a.n() != b.n()) throw input_error("check_bandwidth_algebra: dimension mismatch");
  BandwidthAlgebraReport r;
  r.bw_a = bandwidth(a, g);
  r.bw_b = bandwidth(b, g);
  r.bw_sum = bandwidth(add(a, b), g);
  r.bw_prod = bandwidth(matmul(a, b), g);
  r.lemma_holds = r.bw_sum <= std::max(r.bw_a, r.bw_b) &&
                  r.bw_prod <= r.bw_a + r.bw_b;
  return r;
}

StructureRatio structure_ratio(const StructuredMatrix& m, const Graph& g,
                               double warn_threshold) {
  StructureRatio out;
  out.bandwidth = bandwidth(m, g);
  out.diameter = diameter(g);
  out.ratio = out.diameter > 0
                  ? static_cast<double>(out.bandwidth) / out.diameter
                  : (out.bandwidth > 0 ? 1.0 : 0.0);
  out.warn = out.ratio > warn_threshold;
  return out;
}

double residual_inf(const StructuredMatrix& h, std::span<const double> x,
                    std::span<const double> f, std::span<const Index> rows) {
  if (static_cast<Index>(x.size()) != h.n() ||
      static_cast<Index>(f.size()) != h.n())
    throw input_error("residual_inf: dimension mismatch");
  auto row_residual = [&](Index i) {
    double s = 0.0;
    auto cols = h.row_cols(i);
    auto vals = h.row_vals(i);
    for (std::size_t e = 0; e < cols.size(); ++e) s += vals[e] * x[cols[e]];
    return std::abs(s - f[i]);
  };
  double best = 0.0;
  if (rows.empty()) {
    for (Index i = 0; i < h.n(); ++i) best = std::max(best, row_residual(i));
  } else {
    for (Index i : rows) {
      if (i < 0 || i >= h.n()) throw input_error("residual_inf: bad row id");
      best = std::max(best, row_residual(i));
    }
  }
  return best;
}

}  // namespace schwarznet
