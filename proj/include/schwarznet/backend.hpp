#pragma once

#include <Eigen/Cholesky>
#include <memory>
#include <span>
#include <vector>

#include "schwarznet/subdomain.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

enum class BackendKind {
  auto_select,    // prefactorized up to dense_threshold, iterative beyond
  prefactorized,  // dense Cholesky of H_k^omega, factored once, reused
  iterative       // conjugate gradient, warm-started from the previous solve
};

struct BackendOptions {
  BackendKind kind = BackendKind::auto_select;
  double cg_tol = 1e-10;
  int cg_maxit = 50000;
  Index dense_threshold = 512;
};

// Conjugate gradient on a symmetric PD StructuredMatrix. x is the warm start
// on entry and the solution on exit. Relative tolerance on ||b - Ax||_2.
// Throws numeric_error when the operator is detected indefinite.
int conjugate_gradient(const StructuredMatrix& a, std::span<const double> b,
                       std::span<double> x, double tol, int maxit);

// Per-block solve context, reused across outer iterations. Holds either a
// Cholesky factor of the block matrix or the matrix itself for CG.
class BlockSolver {
public:
  BlockSolver() = default;
  BlockSolver(const StructuredMatrix& a, const BackendOptions& opts,
              Index block_id = -1);
  BlockSolver(const SubdomainSystem& sd, const BackendOptions& opts);

  // Solves A y = rhs. `y` carries the warm start for the iterative path and
  // receives the solution.
  void solve(std::span<const double> rhs, std::span<double> y) const;

  bool prefactorized() const { return use_factor_; }

private:
  const StructuredMatrix* a_ = nullptr;
  BackendOptions opts_;
  Index block_id_ = -1;
  bool use_factor_ = false;
  double inv_scalar_ = 0.0;  // 1x1 fast path
  std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> llt_;
};

std::vector<BlockSolver> make_block_solvers(
    const std::vector<SubdomainSystem>& subs, const BackendOptions& opts);

}  // namespace schwarznet
