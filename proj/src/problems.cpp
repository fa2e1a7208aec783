#include "schwarznet/problems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>

namespace schwarznet {

void GraphQPSpec::validate() const {
  const auto nv = static_cast<std::size_t>(g.n_vertices());
  const auto ne = static_cast<std::size_t>(g.n_edges());
  if (q.size() != nv || r.size() != nv || f_lin.size() != nv ||
      a_diag.size() != nv)
    throw input_error("graph QP: per-vertex data length mismatch");
  if (s.size() != ne || a_off.size() != ne || b.size() != ne)
    throw input_error("graph QP: per-edge data length mismatch");
  for (double v : q)
    if (v < 0) throw input_error("graph QP: q must be nonnegative");
  for (double v : r)
    if (v < 0) throw input_error("graph QP: r must be nonnegative");
  for (double v : s)
    if (v < 0) throw input_error("graph QP: s must be nonnegative");
}

std::pair<StructuredMatrix, std::vector<double>> reduce_graph_qp(
    const GraphQPSpec& spec) {
  spec.validate();
  const Index n = spec.g.n_vertices();
  std::vector<Triplet> t;

  // Q
  for (Index i = 0; i < n; ++i)
    if (spec.q[i] != 0.0) t.push_back({i, i, spec.q[i]});

  // A^T R A: row i of A is a_ii on the diagonal and -a_ij on neighbors.
  for (Index i = 0; i < n; ++i) {
    if (spec.r[i] == 0.0) continue;
    std::vector<std::pair<Index, double>> row;
    row.emplace_back(i, spec.a_diag[i]);
    for (Index j : spec.g.neighbors(i))
      row.emplace_back(j, -spec.a_off[spec.g.edge_index(i, j)]);
    for (auto [c1, v1] : row)
      for (auto [c2, v2] : row) {
        // v1 * v2 first: the (c1,c2) and (c2,c1) entries must round
        // identically for exact storage symmetry.
        const double v = spec.r[i] * (v1 * v2);
        if (v != 0.0) t.push_back({c1, c2, v});
      }
  }

  // B^T S B: row e of B is b_e (x_i - x_j) for the canonical edge (i, j).
  for (Index e = 0; e < spec.g.n_edges(); ++e) {
    if (spec.s[e] == 0.0 || spec.b[e] == 0.0) continue;
    const auto [i, j] = spec.g.edges()[e];
    const double w = spec.s[e] * spec.b[e] * spec.b[e];
    t.push_back({i, i, w});
    t.push_back({j, j, w});
    t.push_back({i, j, -w});
    t.push_back({j, i, -w});
  }

  auto h = StructuredMatrix::from_triplets(n, std::move(t), true);

  // PD check by attempted sparse factorization, with a smallest-eigenvalue
  // estimate in the failure message.
  Eigen::SparseMatrix<double> sp(n, n);
  {
    std::vector<Eigen::Triplet<double>> st;
    for (Index i = 0; i < n; ++i) {
      auto cols = h.row_cols(i);
      auto vals = h.row_vals(i);
      for (std::size_t e = 0; e < cols.size(); ++e)
        st.emplace_back(i, cols[e], vals[e]);
    }
    sp.setFromTriplets(st.begin(), st.end());
  }
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sp);
  if (llt.info() != Eigen::Success) {
    double lmin = std::numeric_limits<double>::quiet_NaN();
    if (n <= 2048) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense(),
                                                        Eigen::EigenvaluesOnly);
      if (es.info() == Eigen::Success) lmin = es.eigenvalues().minCoeff();
    }
    throw numeric_error(
        "reduce_graph_qp: H not positive definite (smallest eigenvalue "
        "estimate " + std::to_string(lmin) +
        "); add node regularization q > 0 or input weights r > 0");
  }
  return {std::move(h), spec.f_lin};
}

std::pair<Graph, std::vector<double>> generate_network(
    const NetworkOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::vector<std::array<Index, 2>> edges;
  Index n = 0;
  switch (opts.kind) {
    case NetworkKind::lattice2d: {
      if (opts.rows < 1 || opts.cols < 1)
        throw input_error("generate_network: lattice sizes must be >= 1");
      n = opts.rows * opts.cols;
      auto id = [&](Index r, Index c) { return r * opts.cols + c; };
      for (Index r = 0; r < opts.rows; ++r)
        for (Index c = 0; c < opts.cols; ++c) {
          if (c + 1 < opts.cols) edges.push_back({id(r, c), id(r, c + 1)});
          if (r + 1 < opts.rows) edges.push_back({id(r, c), id(r + 1, c)});
        }
      break;
    }
    case NetworkKind::random_tree_plus_chords: {
      if (opts.n < 1) throw input_error("generate_network: n must be >= 1");
      n = opts.n;
      for (Index v = 1; v < n; ++v) {
        const Index parent = static_cast<Index>(rng() % v);
        edges.push_back({parent, v});
      }
      Index added = 0;
      std::size_t guard = 0;
      while (added < opts.chords && guard++ < 100u * opts.chords + 1000u) {
        Index i = static_cast<Index>(rng() % n);
        Index j = static_cast<Index>(rng() % n);
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        if (std::find(edges.begin(), edges.end(),
                      std::array<Index, 2>{i, j}) != edges.end())
          continue;
        edges.push_back({i, j});
        ++added;
      }
      break;
    }
  }
  Graph g(n, edges);
  std::uniform_real_distribution<double> ydist(opts.y_lo, opts.y_hi);
  std::vector<double> y(g.n_edges());
  for (auto& v : y) v = ydist(rng);
  return {std::move(g), std::move(y)};
}

EstimationProblem simulate_measurements(const Graph& g,
                                        std::span<const double> y,
                                        const MeasurementOptions& opts) {
  if (static_cast<Index>(y.size()) != g.n_edges())
    throw input_error("simulate_measurements: y length != n_edges");
  if (opts.c <= 0) throw input_error("simulate_measurements: c must be positive");
  if (opts.measured_fraction <= 0 || opts.measured_fraction > 1)
    throw input_error("simulate_measurements: measured_fraction in (0, 1]");
  for (double v : y)
    if (v <= 0) throw input_error("simulate_measurements: susceptances must be positive");

  std::mt19937_64 rng(opts.noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Index n = g.n_vertices();
  const Index m = g.n_edges();

  EstimationProblem p;
  p.g = g;
  p.y.assign(y.begin(), y.end());
  p.c = opts.c;

  // Truth field: zero, or white noise smoothed by a few neighbor-averaging
  // sweeps (a cheap low-pass on the graph) normalized to the requested std.
  p.truth.assign(n, 0.0);
  if (opts.truth_mode == TruthMode::random_smooth) {
    for (auto& v : p.truth) v = gauss(rng);
    std::vector<double> next(n);
    for (int sweep = 0; sweep < 8; ++sweep) {
      for (Index i = 0; i < n; ++i) {
        double s = p.truth[i];
        auto nb = g.neighbors(i);
        for (Index j : nb) s += p.truth[j];
        next[i] = s / (1.0 + nb.size());
      }
      p.truth.swap(next);
    }
    double mean = 0.0;
    for (double v : p.truth) mean += v;
    mean /= std::max<Index>(1, n);
    double var = 0.0;
    for (auto& v : p.truth) {
      v -= mean;
      var += v * v;
    }
    var /= std::max<Index>(1, n);
    if (var > 0) {
      const double scale = opts.truth_amplitude / std::sqrt(var);
      for (auto& v : p.truth) v *= scale;
    }
  }

  // Measured subset: a seeded shuffle, about measured_fraction of the edges.
  std::vector<Index> order(m);
  for (Index e = 0; e < m; ++e) order[e] = e;
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_measured =
      static_cast<Index>(std::llround(opts.measured_fraction * m));
  p.measured.assign(m, 0);
  for (Index e = 0; e < n_measured; ++e) p.measured[order[e]] = 1;

  p.sigma_p.resize(m);
  p.p_meas.resize(m);
  for (Index e = 0; e < m; ++e) {
    const auto [i, j] = g.edges()[e];
    const double flow = p.y[e] * (p.truth[i] - p.truth[j]);
    p.sigma_p[e] = p.measured[e] ? p.y[e] : std::sqrt(10.0) * p.y[e];
    p.p_meas[e] = flow + opts.noise_scale * p.sigma_p[e] * gauss(rng);
  }
  const double sigma_delta = 1.0 / opts.c;
  p.delta_meas.resize(n);
  for (Index i = 0; i < n; ++i)
    p.delta_meas[i] = p.truth[i] + opts.noise_scale * sigma_delta * gauss(rng);
  return p;
}

std::pair<StructuredMatrix, std::vector<double>> build_estimation_system(
    const EstimationProblem& p) {
  const Index n = p.g.n_vertices();
  const Index m = p.g.n_edges();
  if (static_cast<Index>(p.y.size()) != m ||
      static_cast<Index>(p.p_meas.size()) != m ||
      static_cast<Index>(p.delta_meas.size()) != n)
    throw input_error("build_estimation_system: inconsistent problem data");

  std::vector<Triplet> t;
  std::vector<double> f(n, 0.0);
  const double prior_w = p.c * p.c;  // Sigma_delta = c^2 I
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, prior_w});
    f[i] += prior_w * p.delta_meas[i];
  }
  // Y^T Sigma_P Y with Y[e, i] = y_e, Y[e, j] = -y_e for edge i -> j.
  for (Index e = 0; e < m; ++e) {
    const auto [i, j] = p.g.edges()[e];
    const double w = p.y[e] * p.y[e] / (p.sigma_p[e] * p.sigma_p[e]);
    t.push_back({i, i, w});
    t.push_back({j, j, w});
    t.push_back({i, j, -w});
    t.push_back({j, i, -w});
    const double fw = p.y[e] * p.p_meas[e] / (p.sigma_p[e] * p.sigma_p[e]);
    f[i] += fw;
    f[j] -= fw;
  }
  return {StructuredMatrix::from_triplets(n, std::move(t), true), std::move(f)};
}

}  // namespace schwarznet
