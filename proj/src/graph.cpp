#include "schwarznet/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>

namespace schwarznet {

Graph::Graph(Index n_vertices, const std::vector<std::array<Index, 2>>& edge_list)
    : n_(n_vertices) {
  if (n_ < 0) throw input_error("graph: negative vertex count");
  edges_.reserve(edge_list.size());
  for (auto [i, j] : edge_list) {
    if (i < 0 || i >= n_ || j < 0 || j >= n_)
      throw input_error("graph: edge endpoint out of range: (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
    if (i == j) throw input_error("graph: self-loop at vertex " + std::to_string(i));
    if (i > j) std::swap(i, j);
    edges_.push_back({i, j});
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  adj_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (auto [i, j] : edges_) {
    ++adj_ptr_[static_cast<std::size_t>(i) + 1];
    ++adj_ptr_[static_cast<std::size_t>(j) + 1];
  }
  for (Index v = 0; v < n_; ++v) adj_ptr_[v + 1] += adj_ptr_[v];
  adj_.resize(adj_ptr_[n_]);
  std::vector<Index> fill(adj_ptr_.begin(), adj_ptr_.end() - 1);
  for (auto [i, j] : edges_) {
    adj_[fill[i]++] = j;
    adj_[fill[j]++] = i;
  }
  for (Index v = 0; v < n_; ++v)
    std::sort(adj_.begin() + adj_ptr_[v], adj_.begin() + adj_ptr_[v + 1]);
}

std::span<const Index> Graph::neighbors(Index v) const {
  check_vertex(v);
  return {adj_.data() + adj_ptr_[v],
          static_cast<std::size_t>(adj_ptr_[v + 1] - adj_ptr_[v])};
}

Index Graph::edge_index(Index i, Index j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(edges_.begin(), edges_.end(),
                             std::array<Index, 2>{i, j});
  if (it == edges_.end() || (*it)[0] != i || (*it)[1] != j) return -1;
  return static_cast<Index>(it - edges_.begin());
}

void Graph::check_vertex(Index v) const {
  if (v < 0 || v >= n_)
    throw input_error("graph: vertex id " + std::to_string(v) + " out of range");
}

std::vector<int> bfs_distance(const Graph& g, std::span<const Index> sources,
                              std::optional<int> cutoff) {
  if (sources.empty()) throw input_error("bfs_distance: empty source set");
  std::vector<int> dist(g.n_vertices(), kUnreachable);
  std::deque<Index> queue;
  for (Index s : sources) {
    g.check_vertex(s);
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    Index v = queue.front();
    queue.pop_front();
    if (cutoff && dist[v] >= *cutoff) continue;
    for (Index w : g.neighbors(v)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

int diameter(const Graph& g) {
  if (g.n_vertices() == 0) return 0;
  int best = 0;
  for (Index v = 0; v < g.n_vertices(); ++v) {
    Index src[1] = {v};
    auto dist = bfs_distance(g, src);
    for (int d : dist) {
      if (d == kUnreachable)
        throw input_error("diameter: graph is disconnected");
      best = std::max(best, d);
    }
  }
  return best;
}

std::vector<Index> connected_components(const Graph& g, Index& n_components) {
  std::vector<Index> comp(g.n_vertices(), -1);
  n_components = 0;
  for (Index v = 0; v < g.n_vertices(); ++v) {
    if (comp[v] >= 0) continue;
    Index id = n_components++;
    std::deque<Index> queue{v};
    comp[v] = id;
    while (!queue.empty()) {
      Index u = queue.front();
      queue.pop_front();
      for (Index w : g.neighbors(u)) {
        if (comp[w] < 0) {
          comp[w] = id;
          queue.push_back(w);
        }
      }
    }
  }
  return comp;
}

std::vector<VertexList> Partition::members() const {
  std::vector<VertexList> out(k_blocks);
  for (Index v = 0; v < static_cast<Index>(assignment.size()); ++v)
    out[assignment[v]].push_back(v);
  return out;
}

void Partition::validate(const Graph& g) const {
  if (static_cast<Index>(assignment.size()) != g.n_vertices())
    throw input_error("partition: assignment length != n_vertices");
  if (k_blocks < 1) throw input_error("partition: k_blocks must be >= 1");
  std::vector<bool> seen(k_blocks, false);
  for (Index b : assignment) {
    if (b < 0 || b >= k_blocks)
      throw input_error("partition: block id out of range");
    seen[b] = true;
  }
  for (Index k = 0; k < k_blocks; ++k)
    if (!seen[k])
      throw input_error("partition: block " + std::to_string(k) + " is empty");
}

OverlapBlocks expand_overlap(const Graph& g, const Partition& p, int omega) {
  if (omega < 0) throw input_error("expand_overlap: omega must be >= 0");
  p.validate(g);
  OverlapBlocks out;
  out.omega = omega;
  out.interior = p.members();
  out.blocks.resize(p.k_blocks);
  out.complement_boundary.resize(p.k_blocks);
  for (Index k = 0; k < p.k_blocks; ++k) {
    // One BFS to omega+1 yields both the expansion and its boundary ring.
    auto dist = bfs_distance(g, out.interior[k], omega + 1);
    for (Index v = 0; v < g.n_vertices(); ++v) {
      if (dist[v] == kUnreachable) continue;
      if (dist[v] <= omega)
        out.blocks[k].push_back(v);
      else
        out.complement_boundary[k].push_back(v);
    }
  }
  return out;
}

namespace {

// Capacity targets per block: uniform split or normalized weights.
std::vector<Index> block_capacities(Index n, Index k,
                                    const std::vector<double>& weights) {
  std::vector<Index> cap(k);
  if (weights.empty()) {
    Index base = n / k, extra = n % k;
    for (Index b = 0; b < k; ++b) cap[b] = base + (b < extra ? 1 : 0);
    return cap;
  }
  if (static_cast<Index>(weights.size()) != k)
    throw input_error("greedy_partition: weights length != k");
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0) throw input_error("greedy_partition: weights must be positive");
  Index assigned = 0;
  for (Index b = 0; b < k; ++b) {
    cap[b] = std::max<Index>(1, static_cast<Index>(weights[b] / total * n));
    assigned += cap[b];
  }
  // Largest blocks absorb the rounding remainder.
  Index b = static_cast<Index>(std::max_element(weights.begin(), weights.end()) -
                               weights.begin());
  cap[b] += n - assigned;
  if (cap[b] < 1) throw input_error("greedy_partition: degenerate weights");
  return cap;
}

}  // namespace

Partition greedy_partition(const Graph& g, Index k_blocks,
                           const PartitionOptions& opts) {
  const Index n = g.n_vertices();
  if (k_blocks < 1 || k_blocks > n)
    throw input_error("greedy_partition: need 1 <= k <= n_vertices");
  if (!opts.edge_weights.empty() &&
      static_cast<Index>(opts.edge_weights.size()) != g.n_edges())
    throw input_error("greedy_partition: edge_weights length != n_edges");

  Index n_comp = 0;
  auto comp = connected_components(g, n_comp);

  // Blocks per component, proportional to size, at least one where possible.
  std::vector<Index> comp_size(n_comp, 0);
  for (Index v = 0; v < n; ++v) ++comp_size[comp[v]];
  std::vector<Index> comp_blocks(n_comp, 0);
  if (n_comp == 1) {
    comp_blocks[0] = k_blocks;
  } else {
    // Largest-remainder allocation; components may share a block when
    // k < n_comp (blocks then span components, which is unavoidable).
    Index left = k_blocks;
    for (Index c = 0; c < n_comp && left > 0; ++c) {
      comp_blocks[c] = std::max<Index>(
          1, std::min<Index>(left, k_blocks * comp_size[c] / n));
      left -= comp_blocks[c];
    }
    for (Index c = 0; left > 0; c = (c + 1) % n_comp) {
      if (comp_blocks[c] < comp_size[c]) {
        ++comp_blocks[c];
        --left;
      }
    }
  }

  Partition part;
  part.k_blocks = k_blocks;
  part.assignment.assign(n, -1);
  std::mt19937_64 rng(opts.seed);
  Index next_block = 0;

  for (Index c = 0; c < n_comp; ++c) {
    VertexList verts;
    for (Index v = 0; v < n; ++v)
      if (comp[v] == c) verts.push_back(v);
    Index kc = std::max<Index>(1, comp_blocks[c]);
    kc = std::min<Index>(kc, static_cast<Index>(verts.size()));
    Index block0 = next_block;
    next_block += kc;
    if (next_block > k_blocks) {  // k < n_comp: reuse the last block
      next_block = k_blocks;
      block0 = k_blocks - 1;
      kc = 1;
    }

    std::vector<double> local_weights;
    if (!opts.weights.empty() && n_comp == 1) local_weights = opts.weights;
    auto cap = block_capacities(static_cast<Index>(verts.size()), kc, local_weights);

    // Seed selection: random first seed, then farthest-point spreading so
    // the grown regions stay contiguous and balanced.
    VertexList seeds;
    seeds.push_back(verts[rng() % verts.size()]);
    while (static_cast<Index>(seeds.size()) < kc) {
      auto dist = bfs_distance(g, seeds);
      Index best = -1;
      int best_d = -1;
      for (Index v : verts) {
        if (part.assignment[v] >= 0) continue;
        if (dist[v] != kUnreachable && dist[v] > best_d &&
            std::find(seeds.begin(), seeds.end(), v) == seeds.end()) {
          best_d = dist[v];
          best = v;
        }
      }
      if (best < 0) break;
      seeds.push_back(best);
    }

    std::vector<Index> size(kc, 0);
    std::vector<std::deque<Index>> frontier(kc);
    for (Index b = 0; b < static_cast<Index>(seeds.size()); ++b) {
      part.assignment[seeds[b]] = block0 + b;
      ++size[b];
      frontier[b].push_back(seeds[b]);
    }

    // Round-robin BFS growth, claiming unassigned neighbors up to capacity.
    // Claim order per expansion step: strongest coupling first when edge
    // weights are present, otherwise lowest vertex id.
    bool progress = true;
    while (progress) {
      progress = false;
      for (Index b = 0; b < kc; ++b) {
        if (frontier[b].empty() || size[b] >= cap[b]) continue;
        std::size_t level = frontier[b].size();
        std::vector<std::pair<double, Index>> claims;
        for (std::size_t q = 0; q < level; ++q) {
          Index v = frontier[b].front();
          frontier[b].pop_front();
          for (Index w : g.neighbors(v)) {
            if (part.assignment[w] >= 0) continue;
            double key = 0.0;
            if (!opts.edge_weights.empty())
              key = -opts.edge_weights[g.edge_index(v, w)];
            claims.emplace_back(key, w);
          }
        }
        std::sort(claims.begin(), claims.end());
        for (auto [key, w] : claims) {
          (void)key;
          if (size[b] >= cap[b]) break;
          if (part.assignment[w] >= 0) continue;
          part.assignment[w] = block0 + b;
          ++size[b];
          frontier[b].push_back(w);
          progress = true;
        }
      }
    }

    // Vertices enclosed by full blocks: attach to the nearest block with
    // spare capacity (ties toward the lowest block id).
    for (Index v : verts) {
      if (part.assignment[v] >= 0) continue;
      Index vv[1] = {v};
      auto dist = bfs_distance(g, vv);
      Index best_b = -1;
      int best_d = kUnreachable;
      for (Index b = 0; b < kc; ++b) {
        if (size[b] >= cap[b]) continue;
        for (Index u : verts) {
          if (part.assignment[u] == block0 + b && dist[u] < best_d) {
            best_d = dist[u];
            best_b = b;
          }
        }
      }
      if (best_b < 0) {  // all at capacity (rounding); take nearest block
        for (Index u : verts) {
          if (part.assignment[u] >= 0 && dist[u] < best_d) {
            best_d = dist[u];
            best_b = part.assignment[u] - block0;
          }
        }
      }
      part.assignment[v] = block0 + best_b;
      ++size[best_b];
    }
  }

  // Guard: every block must be non-empty (possible only via degenerate
  // weight vectors); steal from the largest block if needed.
  std::vector<Index> count(k_blocks, 0);
  for (Index v = 0; v < n; ++v) ++count[part.assignment[v]];
  for (Index b = 0; b < k_blocks; ++b) {
    if (count[b] > 0) continue;
    Index donor = static_cast<Index>(
        std::max_element(count.begin(), count.end()) - count.begin());
    for (Index v = 0; v < n; ++v) {
      if (part.assignment[v] == donor) {
        part.assignment[v] = b;
        --count[donor];
        ++count[b];
        break;
      }
    }
  }
  part.validate(g);
  return part;
}

Index PartitionStats::total_interior() const {
  Index total = 0;
  for (const auto& row : block_size) total += row[0];
  return total;
}

PartitionStats partition_stats(const Graph& g, const OverlapBlocks& blocks,
                               int max_omega) {
  if (max_omega < 1) throw input_error("partition_stats: max_omega must be >= 1");
  PartitionStats st;
  st.max_omega = max_omega;
  const Index k_blocks = blocks.k_blocks();
  st.block_size.assign(k_blocks, std::vector<Index>(max_omega + 1, 0));
  st.ring_size.assign(k_blocks, std::vector<Index>(max_omega, 0));
  for (Index k = 0; k < k_blocks; ++k) {
    auto dist = bfs_distance(g, blocks.interior[k], max_omega);
    std::vector<Index> at_depth(max_omega + 1, 0);
    for (Index v = 0; v < g.n_vertices(); ++v)
      if (dist[v] != kUnreachable) ++at_depth[dist[v]];
    Index cum = 0;
    for (int w = 0; w <= max_omega; ++w) {
      cum += at_depth[w];
      st.block_size[k][w] = cum;
      if (w >= 1) st.ring_size[k][w - 1] = at_depth[w];
    }
  }
  return st;
}

}  // namespace schwarznet
