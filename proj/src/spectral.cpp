#include "schwarznet/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

namespace schwarznet {

double EigenInterval::decay_ratio() const {
  return (lambda_max - lambda_min) / (lambda_max + lambda_min);
}

namespace {

EigenInterval exact_dense_interval(const StructuredMatrix& m,
                                   const EigenOptions& opts) {
  if (m.n() > opts.exact_dense_limit)
    throw input_error("eigen_interval: matrix too large for exact_dense (n=" +
                      std::to_string(m.n()) + ")");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.dense(),
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numeric_error("eigen_interval: dense eigensolve failed");
  EigenInterval out;
  out.lambda_min = es.eigenvalues().minCoeff();
  out.lambda_max = es.eigenvalues().maxCoeff();
  out.method = EigMethod::exact_dense;
  out.certified = true;
  if (out.lambda_min <= 0.0)
    throw numeric_error("eigen_interval: matrix not positive definite "
                        "(lambda_min = " + std::to_string(out.lambda_min) + ")");
  return out;
}

EigenInterval gershgorin_interval(const StructuredMatrix& m) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Index i = 0; i < m.n(); ++i) {
    auto cols = m.row_cols(i);
    auto vals = m.row_vals(i);
    double diag = 0.0, off = 0.0, abs_sum = 0.0;
    for (std::size_t e = 0; e < cols.size(); ++e) {
      abs_sum += std::abs(vals[e]);
      if (cols[e] == i)
        diag = vals[e];
      else
        off += std::abs(vals[e]);
    }
    lo = std::min(lo, diag - off);
    hi = std::max(hi, abs_sum);
  }
  if (m.n() == 0) lo = hi = 1.0;
  if (lo <= 0.0)
    throw numeric_error(
        "eigen_interval: not certifiable via Gershgorin (lower bound " +
        std::to_string(lo) + " <= 0); use exact_dense");
  EigenInterval out;
  out.lambda_min = lo;
  out.lambda_max = hi;
  out.method = EigMethod::gershgorin;
  out.certified = true;
  return out;
}

// Lanczos with full reorthogonalization; extremal Ritz values, iterated
// until they stabilize to tol. Estimates only, flagged non-certified.
EigenInterval lanczos_interval(const StructuredMatrix& m,
                               const EigenOptions& opts) {
  const Index n = m.n();
  if (n == 1) {
    double v = m.coeff(0, 0);
    if (v <= 0.0) throw numeric_error("eigen_interval: not PD");
    return {v, v, EigMethod::lanczos_estimated, false};
  }
  const int maxit = std::min<int>(opts.lanczos_maxit, n);
  Eigen::MatrixXd basis(n, maxit);
  std::vector<double> alpha, beta;
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  v.normalize();
  basis.col(0) = v;
  Eigen::VectorXd w(n);
  double prev_lo = 0, prev_hi = 0;
  int j = 0;
  for (; j < maxit; ++j) {
    m.multiply_into({basis.col(j).data(), static_cast<std::size_t>(n)},
                    {w.data(), static_cast<std::size_t>(n)});
    double a = basis.col(j).dot(w);
    alpha.push_back(a);
    w -= a * basis.col(j);
    if (j > 0) w -= beta.back() * basis.col(j - 1);
    // full reorthogonalization
    for (int r = 0; r <= j; ++r) w -= basis.col(r).dot(w) * basis.col(r);
    double b = w.norm();
    if (j + 1 >= maxit || b < 1e-14) {
      ++j;
      break;
    }
    beta.push_back(b);
    basis.col(j + 1) = w / b;

    if (j >= 2) {
      Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(j + 1, j + 1);
      for (int r = 0; r <= j; ++r) tri(r, r) = alpha[r];
      for (int r = 0; r < j; ++r) tri(r, r + 1) = tri(r + 1, r) = beta[r];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri,
                                                        Eigen::EigenvaluesOnly);
      double lo = es.eigenvalues().minCoeff();
      double hi = es.eigenvalues().maxCoeff();
      if (j > 3 && std::abs(lo - prev_lo) <= opts.lanczos_tol * std::abs(hi) &&
          std::abs(hi - prev_hi) <= opts.lanczos_tol * std::abs(hi)) {
        prev_lo = lo;
        prev_hi = hi;
        ++j;
        break;
      }
      prev_lo = lo;
      prev_hi = hi;
    }
  }
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(j, j);
  for (int r = 0; r < j; ++r) tri(r, r) = alpha[r];
  for (int r = 0; r + 1 < j; ++r) tri(r, r + 1) = tri(r + 1, r) = beta[r];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri, Eigen::EigenvaluesOnly);
  EigenInterval out;
  out.lambda_min = es.eigenvalues().minCoeff();
  out.lambda_max = es.eigenvalues().maxCoeff();
  out.method = EigMethod::lanczos_estimated;
  out.certified = false;
  if (out.lambda_min <= 0.0)
    throw numeric_error("eigen_interval: Lanczos estimate not PD (lambda_min = " +
                        std::to_string(out.lambda_min) + ")");
  return out;
}

}  // namespace

EigenInterval eigen_interval(const StructuredMatrix& m, EigMethod method,
                             const EigenOptions& opts) {
  if (!m.symmetric()) throw input_error("eigen_interval: matrix must be symmetric");
  switch (method) {
    case EigMethod::exact_dense:
      return exact_dense_interval(m, opts);
    case EigMethod::gershgorin:
      return gershgorin_interval(m);
    case EigMethod::lanczos_estimated:
      return lanczos_interval(m, opts);
  }
  throw input_error("eigen_interval: unknown method");
}

EigenInterval eigen_interval(const SubdomainSystem& sd, EigMethod method,
                             const EigenOptions& opts) {
  return eigen_interval(sd.h_block, method, opts);
}

double ratio_power(double ratio, int dist, int bw) {
  if (dist == 0) return 1.0;
  if (bw == 0) return 0.0;
  return std::pow(ratio, static_cast<double>(dist) / bw);
}

double inverse_decay_bound(const EigenInterval& eig, int bw, int dist) {
  if (eig.lambda_min <= 0.0)
    throw numeric_error("inverse_decay_bound: requires a PD spectrum bracket");
  return (1.0 / eig.lambda_min) * ratio_power(eig.decay_ratio(), dist, bw);
}

double inverse_decay_bound(const StructuredMatrix& h, const Graph& g,
                           const EigenInterval& eig, Index i, Index j) {
  g.check_vertex(i);
  g.check_vertex(j);
  const int bw = bandwidth(h, g);
  Index src[1] = {i};
  const int dist = bfs_distance(g, src)[j];
  if (dist == kUnreachable) return 0.0;  // inverse entry is exactly zero
  return inverse_decay_bound(eig, bw, dist);
}

namespace {

// B_G(H_k^omega) from the block's stored entries under global distances.
int block_bandwidth(const SubdomainSystem& sd, const Graph& g) {
  std::vector<Triplet> t;
  for (Index lr = 0; lr < sd.local_size(); ++lr) {
    auto cols = sd.h_block.row_cols(lr);
    auto vals = sd.h_block.row_vals(lr);
    for (std::size_t e = 0; e < cols.size(); ++e)
      t.push_back({sd.block[lr], sd.block[cols[e]], vals[e]});
  }
  auto lifted = StructuredMatrix::from_triplets(g.n_vertices(), std::move(t), false);
  return bandwidth(lifted, g);
}

}  // namespace

RateBound rate_bound(const StructuredMatrix& h, const Graph& g,
                     const OverlapBlocks& blocks, EigMethod method,
                     const EigenOptions& opts) {
  std::vector<double> f(h.n(), 0.0);
  auto subs = project_all(h, f, blocks);

  RateBound rb;
  rb.omega = blocks.omega;
  rb.certified = true;
  rb.per_block.resize(subs.size());
  const int omega = blocks.omega;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (Index k = 0; k < static_cast<Index>(subs.size()); ++k) {
    BlockRateBound b;
    b.k = k;
    b.coupling_r = subs[k].coupling_abs_sum();
    b.eig = eigen_interval(subs[k], method, opts);
    b.bw = block_bandwidth(subs[k], g);
    if (b.coupling_r == 0.0) {
      b.bound = 0.0;  // V_k^omega = V: one-shot convergence
    } else if (b.bw == 0) {
      // Diagonal block: its inverse is diagonal with entries <= 1/lambda_min.
      b.bound = b.coupling_r / b.eig.lambda_min;
    } else {
      double expo = static_cast<double>(omega + 1) / b.bw - 1.0;
      b.bound = b.coupling_r / b.eig.lambda_min *
                std::pow(b.eig.decay_ratio(), expo);
    }
    rb.per_block[k] = b;
  }

  rb.alpha = 0.0;
  double r_max = 0.0;
  for (const auto& b : rb.per_block) {
    rb.alpha = std::max(rb.alpha, b.bound);
    r_max = std::max(r_max, b.coupling_r);
    rb.certified = rb.certified && b.eig.certified;
  }

  // Coarser single-interval form over the global spectrum of H.
  if (r_max == 0.0) {
    rb.simplified_alpha = 0.0;
  } else {
    auto eig_h = eigen_interval(h, method, opts);
    const int bw_h = bandwidth(h, g);
    if (bw_h == 0) {
      rb.simplified_alpha = r_max / eig_h.lambda_min;
    } else {
      double expo = static_cast<double>(omega + 1) / bw_h - 1.0;
      rb.simplified_alpha =
          r_max / eig_h.lambda_min * std::pow(eig_h.decay_ratio(), expo);
    }
  }
  rb.valid = rb.alpha < 1.0;
  return rb;
}

IterationMatrices build_iteration_matrices(const StructuredMatrix& h,
                                           const OverlapBlocks& blocks,
                                           Index dense_limit) {
  const Index n = h.n();
  if (n > dense_limit)
    throw input_error("build_iteration_matrices: diagnostic path limited to n <= " +
                      std::to_string(dense_limit));
  std::vector<double> f(n, 0.0);
  auto subs = project_all(h, f, blocks);

  IterationMatrices out;
  out.s = Eigen::MatrixXd::Zero(n, n);
  out.u = Eigen::MatrixXd::Zero(n, n);

  for (const auto& sd : subs) {
    const Index m = sd.local_size();
    Eigen::LLT<Eigen::MatrixXd> llt(sd.h_block.dense());
    if (llt.info() != Eigen::Success)
      throw numeric_error("build_iteration_matrices: H_k^omega not PD for block " +
                          std::to_string(sd.k));
    // inv(H_k) * H_{-k} columnwise, then rows restricted to V_k.
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(m, n);
    for (const auto& e : sd.h_cross) cross(e.local_row, e.global_col) = e.value;
    Eigen::MatrixXd solved = llt.solve(cross);
    Eigen::MatrixXd inv_block = llt.solve(Eigen::MatrixXd::Identity(m, m));
    for (std::size_t r = 0; r < sd.interior.size(); ++r) {
      const Index gi = sd.interior[r];
      const Index lr = sd.restrict_rows[r];
      out.s.row(gi) = -solved.row(lr);
      for (Index lc = 0; lc < m; ++lc)
        out.u(gi, sd.block[lc]) = inv_block(lr, lc);
    }
  }

  out.inf_norm = out.s.cwiseAbs().rowwise().sum().maxCoeff();
  Eigen::EigenSolver<Eigen::MatrixXd> es(out.s, false);
  if (es.info() != Eigen::Success)
    throw numeric_error("build_iteration_matrices: eigensolve on S failed");
  out.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  return out;
}

Theorem4Report theorem4_check(const StructuredMatrix& m, const Graph& g,
                              const SpectralDisk& disk, int m_max,
                              Index dense_limit) {
  const Index n = m.n();
  if (n > dense_limit)
    throw input_error("theorem4_check: limited to n <= " +
                      std::to_string(dense_limit));
  const double z_abs = std::abs(disk.center);
  if (z_abs == 0.0) throw input_error("theorem4_check: disk center must be nonzero");
  if (disk.radius <= 0.0 || disk.radius >= z_abs)
    throw input_error("theorem4_check: need 0 < R < |z|");
  if (disk.epsilon <= 0.0 || disk.epsilon >= 1.0 - disk.radius / z_abs)
    throw input_error("theorem4_check: epsilon outside (0, 1 - R/|z|)");

  Eigen::MatrixXd dense = m.dense();
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense, false);
  if (es.info() != Eigen::Success)
    throw numeric_error("theorem4_check: eigensolve failed");
  for (Index i = 0; i < n; ++i) {
    if (std::abs(es.eigenvalues()[i] - disk.center) > disk.radius * (1 + 1e-12))
      throw numeric_error("theorem4_check: eigenvalue " +
                          std::to_string(es.eigenvalues()[i].real()) + "+" +
                          std::to_string(es.eigenvalues()[i].imag()) +
                          "i outside the disk");
  }

  Theorem4Report rep;
  rep.bw = bandwidth(m, g);
  const double rate = disk.radius / z_abs + disk.epsilon;

  // Fit the smallest C with max_ij |((I - H/z)^p)_ij| <= C rate^p over the
  // sampled powers.
  Eigen::MatrixXcd base =
      Eigen::MatrixXcd::Identity(n, n) - dense.cast<std::complex<double>>() / disk.center;
  Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
  // C >= 1 always: the inverse series starts at the identity power, whose
  // diagonal entries equal 1 = C * rate^0.
  double c_fit = 1.0;
  double scale = 1.0;
  for (int p = 1; p <= m_max; ++p) {
    power = power * base;
    scale *= rate;
    c_fit = std::max(c_fit, power.cwiseAbs().maxCoeff() / scale);
  }
  rep.c_fit = c_fit;

  // Entrywise inverse bound with the fitted C.
  Eigen::MatrixXd inv = dense.inverse();
  const double prefix = c_fit / ((1.0 - disk.epsilon) * z_abs - disk.radius);
  rep.decay_ok = true;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    Index src[1] = {i};
    auto dist = bfs_distance(g, src);
    for (Index j = 0; j < n; ++j) {
      if (dist[j] == kUnreachable)
        throw input_error("theorem4_check: graph must be connected");
      const double bound = prefix * ratio_power(rate, dist[j], rep.bw);
      const double margin = bound - std::abs(inv(i, j));
      rep.worst_margin = std::min(rep.worst_margin, margin);
      if (margin < -1e-14 * prefix) rep.decay_ok = false;
    }
  }
  return rep;
}

}  // namespace schwarznet
