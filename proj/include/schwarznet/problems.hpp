#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "schwarznet/graph.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet {

// Quadratic program on a graph: node states x with node inputs u and edge
// states v tied to x linearly; eliminating u and v leaves a PD system on x.
// Per-edge data follows the canonical low-id -> high-id edge direction.
struct GraphQPSpec {
  Graph g;
  std::vector<double> q;       // per-vertex state weight, >= 0
  std::vector<double> r;       // per-vertex input weight, >= 0
  std::vector<double> f_lin;   // per-vertex linear cost
  std::vector<double> s;       // per-edge weight, >= 0
  std::vector<double> a_diag;  // a_ii
  std::vector<double> a_off;   // a_ij per canonical edge (applied on both sides)
  std::vector<double> b;       // per-edge incidence scale

  void validate() const;
};

// H = Q + A^T R A + B^T S B, f = f_lin. Errors when H is not PD.
std::pair<StructuredMatrix, std::vector<double>> reduce_graph_qp(
    const GraphQPSpec& spec);

enum class NetworkKind { lattice2d, random_tree_plus_chords };

struct NetworkOptions {
  NetworkKind kind = NetworkKind::lattice2d;
  Index rows = 10;
  Index cols = 10;
  Index n = 100;       // tree mode
  Index chords = 20;   // tree mode
  double y_lo = 0.5;
  double y_hi = 2.0;
  std::uint64_t seed = 0;
};

// Synthetic connected network with per-edge susceptances.
std::pair<Graph, std::vector<double>> generate_network(const NetworkOptions& opts);

// DC state-estimation problem: flows P = y (delta_i - delta_j) measured on a
// subset of edges, Gaussian priors on all angles.
struct EstimationProblem {
  Graph g;
  std::vector<double> y;        // per-edge susceptance, > 0
  std::vector<char> measured;   // per-edge
  std::vector<double> sigma_p;  // y on measured edges, sqrt(10) y otherwise
  std::vector<double> p_meas;   // per-edge measured flow
  std::vector<double> delta_meas;  // per-vertex prior mean
  double c = 0.1;               // prior weight; sigma_delta = 1/c
  std::vector<double> truth;    // synthetic truth angles (may be empty)
};

enum class TruthMode { zero, random_smooth };

struct MeasurementOptions {
  double c = 0.1;
  double measured_fraction = 0.5;
  std::uint64_t noise_seed = 0;
  TruthMode truth_mode = TruthMode::random_smooth;
  double noise_scale = 1.0;      // 0 disables measurement/prior noise
  double truth_amplitude = 0.5;  // std of the smooth truth field
};

EstimationProblem simulate_measurements(const Graph& g,
                                        std::span<const double> y,
                                        const MeasurementOptions& opts);

// H = Sigma_delta + Y^T Sigma_P Y with inverse-variance diagonals
// (Sigma_delta = c^2 I, Sigma_P = diag(1/sigma_P^2));
// f = Y^T Sigma_P P^m + Sigma_delta delta^m. bandwidth(H, g) <= 1.
std::pair<StructuredMatrix, std::vector<double>> build_estimation_system(
    const EstimationProblem& p);

}  // namespace schwarznet
