#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

#include "schwarznet/graph.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/subdomain.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

enum class EigMethod { exact_dense, lanczos_estimated, gershgorin };

// Certified (or estimated) bracket on the spectrum of a symmetric PD matrix.
struct EigenInterval {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  EigMethod method = EigMethod::exact_dense;
  // exact_dense and gershgorin brackets are certified; Lanczos extremal
  // estimates are not and propagate a non-certified flag into rate bounds.
  bool certified = false;

  double lambda_mid() const { return 0.5 * (lambda_min + lambda_max); }
  // (lambda_max - lambda_min) / (lambda_max + lambda_min), the decay base.
  double decay_ratio() const;
};

struct EigenOptions {
  Index exact_dense_limit = 1024;
  double lanczos_tol = 1e-8;
  int lanczos_maxit = 400;
};

EigenInterval eigen_interval(const StructuredMatrix& m, EigMethod method,
                             const EigenOptions& opts = {});
EigenInterval eigen_interval(const SubdomainSystem& sd, EigMethod method,
                             const EigenOptions& opts = {});

// ratio^(dist/bw) with the B_G = 0 convention: 1 when dist = 0, else 0 when
// bw = 0 (a bandwidth-0 matrix is diagonal and its inverse has exact zeros
// off the diagonal).
double ratio_power(double ratio, int dist, int bw);

// Componentwise bound on |(H^{-1})_{ij}| for PD graph-structured H:
//   (1/lambda_min) * ratio^(d_G(i,j)/B_G(H)).
double inverse_decay_bound(const EigenInterval& eig, int bw, int dist);
double inverse_decay_bound(const StructuredMatrix& h, const Graph& g,
                           const EigenInterval& eig, Index i, Index j);

struct BlockRateBound {
  Index k = 0;
  double coupling_r = 0.0;  // R_k
  EigenInterval eig;        // spectrum bracket of H_k^omega
  int bw = 0;               // B_G(H_k^omega), global graph distances
  double bound = 0.0;       // (R_k/lambda_min) * ratio^((omega+1)/bw - 1)
};

// Certified convergence-rate bound for the synchronous scheme:
// alpha = max_k block bound; also the coarser single-interval form using the
// global spectrum of H. valid means alpha < 1 (contraction certified if the
// eigendata is).
struct RateBound {
  std::vector<BlockRateBound> per_block;
  double alpha = 0.0;
  double simplified_alpha = 0.0;
  bool valid = false;
  bool certified = false;
  int omega = 0;
};

RateBound rate_bound(const StructuredMatrix& h, const Graph& g,
                     const OverlapBlocks& blocks,
                     EigMethod method = EigMethod::exact_dense,
                     const EigenOptions& opts = {});

// Explicit dense iteration operators of the synchronous scheme,
// x <- S x + U f. Diagnostic only (never used by the solvers).
struct IterationMatrices {
  Eigen::MatrixXd s;
  Eigen::MatrixXd u;
  double spectral_radius = 0.0;
  double inf_norm = 0.0;
};

IterationMatrices build_iteration_matrices(const StructuredMatrix& h,
                                           const OverlapBlocks& blocks,
                                           Index dense_limit = 2048);

// Disk containing the spectrum of a (possibly nonsymmetric) matrix, for the
// generalized decay bound.
struct SpectralDisk {
  std::complex<double> center;  // z, nonzero
  double radius = 0.0;          // R < |z|
  double epsilon = 0.0;         // in (0, 1 - R/|z|)
};

struct Theorem4Report {
  double c_fit = 0.0;     // smallest C covering the sampled powers
  bool decay_ok = false;  // inverse bound holds entrywise with c_fit
  int bw = 0;
  double worst_margin = 0.0;  // min over (i,j) of bound - |inv|
};

// Consistency check of the generalized (non-PD) decay bound: fits the
// power-growth constant C over p = 1..m_max, then verifies the inverse
// bound entrywise against a dense inverse. Not a certificate (C is
// existential); zero violations expected on in-disk spectra.
Theorem4Report theorem4_check(const StructuredMatrix& m, const Graph& g,
                              const SpectralDisk& disk, int m_max = 64,
                              Index dense_limit = 512);

}  // namespace schwarznet
