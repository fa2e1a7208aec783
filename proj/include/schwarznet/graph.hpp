#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "schwarznet/types.hpp"

namespace schwarznet {

// Undirected simple graph with 0-based contiguous vertex ids.
// Immutable after construction; safe to share across threads.
class Graph {
public:
  Graph() = default;

  // Builds from an edge list. Duplicate edges are merged, self-loops rejected.
  Graph(Index n_vertices, const std::vector<std::array<Index, 2>>& edge_list);

  Index n_vertices() const { return n_; }
  Index n_edges() const { return static_cast<Index>(edges_.size()); }

  std::span<const Index> neighbors(Index v) const;

  // Canonical edge list: each edge once, directed low id -> high id,
  // sorted lexicographically. Edge index = position in this list.
  const std::vector<std::array<Index, 2>>& edges() const { return edges_; }

  // Edge index of {i,j}, or -1 if not an edge.
  Index edge_index(Index i, Index j) const;

  void check_vertex(Index v) const;

private:
  Index n_ = 0;
  std::vector<Index> adj_ptr_;
  std::vector<Index> adj_;
  std::vector<std::array<Index, 2>> edges_;
};

// Min-edge-count distance from a vertex set to every vertex (set-distance
// semantics: d(i, S) = min over s in S of d(i, s)). Entries beyond `cutoff`
// are kUnreachable, as are vertices in other components.
std::vector<int> bfs_distance(const Graph& g, std::span<const Index> sources,
                              std::optional<int> cutoff = std::nullopt);

// Max pairwise distance within the (single) component containing vertex 0;
// errors on disconnected graphs.
int diameter(const Graph& g);

// Component id per vertex (0-based, in order of discovery from vertex 0).
std::vector<Index> connected_components(const Graph& g, Index& n_components);

struct Partition {
  Index k_blocks = 0;
  std::vector<Index> assignment;  // per-vertex block id in [0, k_blocks)

  // Sorted member list per block.
  std::vector<VertexList> members() const;
  void validate(const Graph& g) const;
};

// A partition together with its omega-expanded blocks.
struct OverlapBlocks {
  int omega = 0;
  std::vector<VertexList> blocks;     // V_k^omega, sorted
  std::vector<VertexList> interior;   // V_k, sorted
  // Vertices outside V_k^omega adjacent to it, i.e. V_k^{omega+1} \ V_k^omega.
  std::vector<VertexList> complement_boundary;

  Index k_blocks() const { return static_cast<Index>(blocks.size()); }
};

// V_k^omega = { i : d_G(i, V_k) <= omega } for every block of p.
OverlapBlocks expand_overlap(const Graph& g, const Partition& p, int omega);

struct PartitionOptions {
  std::uint64_t seed = 0;
  // Relative block sizes for the skewed mode; empty selects uniform balance.
  std::vector<double> weights;
  // Optional per-edge weights (canonical edge order). When present, frontier
  // vertices with stronger coupling into the block are claimed first.
  std::vector<double> edge_weights;
};

// Seeded greedy BFS region growing. Deterministic for a fixed seed; ties
// broken toward the lowest vertex id. Disconnected graphs are handled by
// distributing blocks over components proportionally to their size.
Partition greedy_partition(const Graph& g, Index k_blocks,
                           const PartitionOptions& opts = {});

struct PartitionStats {
  int max_omega = 0;
  // block_size[k][w] = |V_k^w| for w = 0..max_omega.
  std::vector<std::vector<Index>> block_size;
  // ring_size[k][w-1] = |V_k^w \ V_k^{w-1}| for w = 1..max_omega.
  std::vector<std::vector<Index>> ring_size;

  Index total_interior() const;
};

PartitionStats partition_stats(const Graph& g, const OverlapBlocks& blocks,
                               int max_omega);

}  // namespace schwarznet
