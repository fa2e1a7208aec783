#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "schwarznet/admm.hpp"
#include "schwarznet/async.hpp"
#include "schwarznet/constrained.hpp"
#include "schwarznet/graph.hpp"
#include "schwarznet/problems.hpp"
#include "schwarznet/solve.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/types.hpp"

namespace schwarznet::io {

namespace fs = std::filesystem;

// graph.json: {"n": int, "edges": [[i, j], ...]} with 0-based ids.
Graph read_graph(const fs::path& path);
void write_graph(const fs::path& path, const Graph& g);

// partition.json: {"k": int, "assignment": [int, ...]}.
Partition read_partition(const fs::path& path);
void write_partition(const fs::path& path, const Partition& p);

// Matrix Market coordinate format; symmetric matrices store one triangle.
StructuredMatrix read_matrix_market(const fs::path& path);
void write_matrix_market(const fs::path& path, const StructuredMatrix& m);

// Vectors: plain text one value per line, or a JSON array (by extension).
std::vector<double> read_vector(const fs::path& path);
void write_vector(const fs::path& path, std::span<const double> v);

// Problem bundle directory: graph.json, y.csv (edge,i,j,y,measured),
// meas.csv (P_m per edge, delta_m per vertex), config.json. Values are
// written in full precision so reload reproduces H and f bit-identically.
void write_bundle(const fs::path& dir, const EstimationProblem& p);
EstimationProblem read_bundle(const fs::path& dir);

// bounds.json: [{"edge": [i, j], "lo": ..., "hi": ..., "mu": ...}, ...];
// mu applies problem-wide (last nonzero wins).
struct BoundsFile {
  std::vector<BoxRow> rows;
  double mu = 0.0;
};
BoundsFile read_bounds(const fs::path& path, const Graph& g);

// Delay schedule trace file:
// {"events": [{"t": int, "k": int, "tau": [int, ...]}, ...]}.
DelaySchedule read_delay_trace(const fs::path& path);
void write_delay_trace(const fs::path& path, const DelaySchedule& schedule);

// trace.csv: iter,time_s,residual_inf[,err_inf][,worker_id,local_iter]
void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace,
                     bool threaded_columns, bool err_column);
void write_admm_trace_csv(const fs::path& path,
                          const std::vector<AdmmTraceRow>& trace);

std::string format_full(double v);

}  // namespace schwarznet::io
