#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "schwarznet/graph.hpp"

using namespace schwarznet;

TEST_CASE("graph construction rejects bad input") {
  CHECK_THROWS_AS(Graph(3, {{0, 3}}), input_error);
  CHECK_THROWS_AS(Graph(3, {{1, 1}}), input_error);
  Graph g(4, {{0, 1}, {1, 0}, {1, 2}});  // duplicate collapses
  CHECK(g.n_edges() == 2);
  CHECK(g.neighbors(1).size() == 2);
  CHECK(g.edge_index(2, 1) == 1);
  CHECK(g.edge_index(0, 2) == -1);
}

TEST_CASE("bfs_distance on a path") {
  auto g = oracles::path_graph(4);
  Index src[1] = {0};
  auto d = bfs_distance(g, src);
  CHECK(d == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("bfs_distance with sources = V is zero") {
  std::mt19937_64 rng(7);
  auto g = oracles::random_connected_graph(9, 5, rng);
  std::vector<Index> all(9);
  for (Index v = 0; v < 9; ++v) all[v] = v;
  auto d = bfs_distance(g, all);
  for (int x : d) CHECK(x == 0);
}

TEST_CASE("bfs_distance set semantics: triangle plus pendant") {
  // triangle {0,1,2} with pendant 3 attached to 2, sources {0,1}
  Graph g(4, {{0, 1}, {1, 2}, {0, 2}, {2, 3}});
  std::vector<Index> src{0, 1};
  auto d = bfs_distance(g, src);
  CHECK(d == oracles::brute_force_distance(g, src));
  CHECK(d == std::vector<int>{0, 0, 1, 2});
}

TEST_CASE("bfs_distance: cutoff and invalid ids") {
  auto g = oracles::path_graph(5);
  Index src[1] = {0};
  auto d = bfs_distance(g, src, 2);
  CHECK(d[2] == 2);
  CHECK(d[3] == kUnreachable);
  Index bad[1] = {9};
  CHECK_THROWS_AS(bfs_distance(g, bad), input_error);
  CHECK_THROWS_AS(bfs_distance(g, std::span<const Index>{}), input_error);
}

TEST_CASE("set-distance decomposes over singleton sources") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 4 + static_cast<Index>(rng() % 9);
    auto g = oracles::random_connected_graph(n, rng() % 6, rng);
    std::vector<Index> sources;
    for (Index v = 0; v < n; ++v)
      if (rng() % 3 == 0) sources.push_back(v);
    if (sources.empty()) sources.push_back(0);
    auto d = bfs_distance(g, sources);
    for (Index v = 0; v < n; ++v) {
      int best = kUnreachable;
      for (Index s : sources) {
        Index one[1] = {s};
        best = std::min(best, bfs_distance(g, one)[v]);
      }
      CHECK(d[v] == best);
    }
  }
}

TEST_CASE("expand_overlap on the 6-path") {
  auto g = oracles::path_graph(6);
  auto p = oracles::contiguous_partition(6, 2);
  auto ob = expand_overlap(g, p, 1);
  CHECK(ob.blocks[0] == VertexList{0, 1, 2, 3});
  CHECK(ob.blocks[1] == VertexList{2, 3, 4, 5});
  CHECK(ob.complement_boundary[0] == VertexList{4});
  CHECK(ob.complement_boundary[1] == VertexList{1});

  auto ob0 = expand_overlap(g, p, 0);
  CHECK(ob0.blocks == ob0.interior);

  auto obd = expand_overlap(g, p, diameter(g));
  for (const auto& blk : obd.blocks) CHECK(blk.size() == 6);
}

TEST_CASE("expand_overlap monotone in omega and overlaps intersect") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 6 + static_cast<Index>(rng() % 15);
    auto g = oracles::random_connected_graph(n, rng() % 8, rng);
    const Index k = 2 + static_cast<Index>(rng() % 3);
    auto p = greedy_partition(g, k, {.seed = static_cast<std::uint64_t>(trial)});
    auto a = expand_overlap(g, p, 1);
    auto b = expand_overlap(g, p, 2);
    for (Index blk = 0; blk < k; ++blk)
      CHECK(std::includes(b.blocks[blk].begin(), b.blocks[blk].end(),
                          a.blocks[blk].begin(), a.blocks[blk].end()));
    // connected + omega >= 1: every block overlaps some other block
    for (Index blk = 0; blk < k; ++blk) {
      bool overlaps = false;
      for (Index other = 0; other < k && !overlaps; ++other) {
        if (other == blk) continue;
        std::vector<Index> inter;
        std::set_intersection(a.blocks[blk].begin(), a.blocks[blk].end(),
                              a.blocks[other].begin(), a.blocks[other].end(),
                              std::back_inserter(inter));
        overlaps = !inter.empty();
      }
      CHECK(overlaps);
    }
  }
}

TEST_CASE("greedy_partition balance and determinism") {
  auto g = oracles::path_graph(6);
  auto p = greedy_partition(g, 2, {.seed = 3});
  auto members = p.members();
  CHECK(members[0].size() == 3);
  CHECK(members[1].size() == 3);

  auto p2 = greedy_partition(g, 2, {.seed = 3});
  CHECK(p.assignment == p2.assignment);

  auto p1 = greedy_partition(g, 1, {});
  CHECK(p1.assignment == std::vector<Index>(6, 0));

  auto pn = greedy_partition(g, 6, {});
  std::set<Index> ids(pn.assignment.begin(), pn.assignment.end());
  CHECK(ids.size() == 6);

  CHECK_THROWS_AS(greedy_partition(g, 7, {}), input_error);
}

TEST_CASE("greedy_partition near-uniform balance on random graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 20 + static_cast<Index>(rng() % 60);
    auto g = oracles::random_connected_graph(n, n / 3, rng);
    const Index k = 2 + static_cast<Index>(rng() % 4);
    auto p = greedy_partition(g, k, {.seed = static_cast<std::uint64_t>(trial) * 13u});
    p.validate(g);
    auto members = p.members();
    for (const auto& blk : members) {
      CHECK(blk.size() >= static_cast<std::size_t>(n / k) - 1);
      CHECK(blk.size() <= static_cast<std::size_t>(n / k) + 2);
    }
  }
}

TEST_CASE("greedy_partition skewed weights") {
  auto [g, y] = generate_network(
      {.kind = NetworkKind::lattice2d, .rows = 10, .cols = 10, .seed = 1});
  (void)y;
  auto p = greedy_partition(g, 4, {.seed = 5, .weights = {6, 1, 1, 1}});
  auto members = p.members();
  CHECK(members[0].size() >= 3 * members[1].size());
  CHECK(members[0].size() >= 3 * members[2].size());
  CHECK(members[0].size() >= 3 * members[3].size());
}

TEST_CASE("greedy_partition on a disconnected graph") {
  // two 4-paths
  Graph g(8, {{0, 1}, {1, 2}, {2, 3}, {4, 5}, {5, 6}, {6, 7}});
  auto p = greedy_partition(g, 2, {.seed = 9});
  p.validate(g);
  // blocks must not straddle components
  for (auto [i, j] : g.edges()) CHECK(p.assignment[i] == p.assignment[j]);
  CHECK(p.assignment[0] != p.assignment[4]);
}

TEST_CASE("partition_stats on the 6-path") {
  auto g = oracles::path_graph(6);
  auto p = oracles::contiguous_partition(6, 2);
  auto ob = expand_overlap(g, p, 1);
  auto st = partition_stats(g, ob, 2);
  CHECK(st.block_size[0][0] == 3);
  CHECK(st.ring_size[0][0] == 1);  // |V_k^1 \ V_k| = 1 per block
  CHECK(st.ring_size[1][0] == 1);
  CHECK(st.total_interior() == 6);
  for (Index k = 0; k < 2; ++k)
    for (int w = 1; w <= 2; ++w)
      CHECK(st.block_size[k][w] >= st.block_size[k][w - 1]);
}

TEST_CASE("partition_stats star graph: leaves block expands to everything") {
  const Index n = 8;
  std::vector<std::array<Index, 2>> edges;
  for (Index v = 1; v < n; ++v) edges.push_back({0, v});
  Graph g(n, edges);
  Partition p;
  p.k_blocks = 2;
  p.assignment.assign(n, 1);
  p.assignment[0] = 0;  // center alone in block 0
  auto ob = expand_overlap(g, p, 1);
  auto st = partition_stats(g, ob, 1);
  CHECK(st.block_size[1][1] == n);  // all leaves are within 1 of the center
  CHECK(st.block_size[0][1] == n);
  // cross-check against brute-force distances
  auto d = oracles::brute_force_distance(g, ob.interior[1]);
  Index within = 0;
  for (Index v = 0; v < n; ++v) within += (d[v] <= 1);
  CHECK(st.block_size[1][1] == within);
}

TEST_CASE("partition_stats interior sizes sum to n on generated networks") {
  auto [g, y] = generate_network(
      {.kind = NetworkKind::random_tree_plus_chords, .n = 200, .chords = 40,
       .seed = 3});
  (void)y;
  auto p = greedy_partition(g, 4, {.seed = 2});
  auto ob = expand_overlap(g, p, 1);
  auto st = partition_stats(g, ob, 4);
  CHECK(st.total_interior() == g.n_vertices());
  for (Index k = 0; k < 4; ++k)
    for (int w = 1; w <= 4; ++w) {
      CHECK(st.block_size[k][w] >= st.block_size[k][w - 1]);
      CHECK(st.ring_size[k][w - 1] ==
            st.block_size[k][w] - st.block_size[k][w - 1]);
    }
}
