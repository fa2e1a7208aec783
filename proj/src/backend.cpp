#include "schwarznet/backend.hpp"

#include <cmath>

namespace schwarznet {

int conjugate_gradient(const StructuredMatrix& a, std::span<const double> b,
                       std::span<double> x, double tol, int maxit) {
  const Index n = a.n();
  std::vector<double> r(n), p(n), ap(n);
  a.multiply_into(x, r);
  double bnorm2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    r[i] = b[i] - r[i];
    p[i] = r[i];
    bnorm2 += b[i] * b[i];
  }
  const double stop2 = tol * tol * std::max(bnorm2, 1e-300);
  double rs_old = 0.0;
  for (Index i = 0; i < n; ++i) rs_old += r[i] * r[i];
  int it = 0;
  while (rs_old > stop2 && it < maxit) {
    a.multiply_into(p, ap);
    double pap = 0.0;
    for (Index i = 0; i < n; ++i) pap += p[i] * ap[i];
    if (pap <= 0.0)
      throw numeric_error("conjugate_gradient: operator not positive definite "
                          "(p^T A p = " + std::to_string(pap) + ")");
    const double step = rs_old / pap;
    double rs_new = 0.0;
    for (Index i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * ap[i];
      rs_new += r[i] * r[i];
    }
    const double beta = rs_new / rs_old;
    for (Index i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rs_old = rs_new;
    ++it;
  }
  return it;
}

BlockSolver::BlockSolver(const StructuredMatrix& a, const BackendOptions& opts,
                         Index block_id)
    : a_(&a), opts_(opts), block_id_(block_id) {
  use_factor_ = opts.kind == BackendKind::prefactorized ||
                (opts.kind == BackendKind::auto_select &&
                 a.n() <= opts.dense_threshold);
  if (a.n() == 1) {
    // 1x1 blocks solve exactly by a reciprocal; LLT would round through
    // sqrt twice.
    const double d = a.coeff(0, 0);
    if (d <= 0.0)
      throw numeric_error("block factorization failed: H_k^omega not positive "
                          "definite for block " + std::to_string(block_id));
    inv_scalar_ = 1.0 / d;
    use_factor_ = true;
    return;
  }
  if (use_factor_) {
    llt_ = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(a.dense());
    if (llt_->info() != Eigen::Success)
      throw numeric_error("block factorization failed: H_k^omega not positive "
                          "definite for block " + std::to_string(block_id));
  }
}

BlockSolver::BlockSolver(const SubdomainSystem& sd, const BackendOptions& opts)
    : BlockSolver(sd.h_block, opts, sd.k) {}

void BlockSolver::solve(std::span<const double> rhs, std::span<double> y) const {
  const Index m = a_->n();
  if (static_cast<Index>(rhs.size()) != m || static_cast<Index>(y.size()) != m)
    throw input_error("BlockSolver: dimension mismatch");
  if (m == 1 && inv_scalar_ != 0.0) {
    y[0] = rhs[0] * inv_scalar_;
  } else if (use_factor_) {
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), m);
    Eigen::Map<Eigen::VectorXd> out(y.data(), m);
    out = llt_->solve(b);
  } else {
    try {
      conjugate_gradient(*a_, rhs, y, opts_.cg_tol, opts_.cg_maxit);
    } catch (const numeric_error&) {
      throw numeric_error("block CG failed: H_k^omega not positive definite "
                          "for block " + std::to_string(block_id_));
    }
  }
}

std::vector<BlockSolver> make_block_solvers(
    const std::vector<SubdomainSystem>& subs, const BackendOptions& opts) {
  std::vector<BlockSolver> out;
  out.reserve(subs.size());
  for (const auto& sd : subs) out.emplace_back(sd, opts);
  return out;
}

}  // namespace schwarznet
