#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "schwarznet/sparse.hpp"
#include "schwarznet/subdomain.hpp"

using namespace schwarznet;

TEST_CASE("from_triplets sums duplicates and drops zeros") {
  auto m = StructuredMatrix::from_triplets(
      2, {{0, 0, 1.0}, {0, 0, 1.0}, {0, 1, 0.5}, {1, 0, 0.5}, {1, 1, -2.0},
          {1, 1, 2.0}},
      true);
  CHECK(m.coeff(0, 0) == 2.0);
  CHECK(m.nnz() == 3);  // (1,1) cancelled exactly
  CHECK(m.coeff(1, 1) == 0.0);
}

TEST_CASE("symmetric storage is enforced") {
  CHECK_THROWS_AS(
      StructuredMatrix::from_triplets(2, {{0, 1, 1.0}}, true), input_error);
  CHECK_NOTHROW(StructuredMatrix::from_triplets(2, {{0, 1, 1.0}}, false));
}

TEST_CASE("bandwidth basics") {
  auto g = oracles::path_graph(5);
  CHECK(bandwidth(StructuredMatrix::identity(5), g) == 0);

  // graph Laplacian w.r.t. its own graph
  std::vector<Triplet> t;
  for (Index i = 0; i < 5; ++i) t.push_back({i, i, double(g.neighbors(i).size())});
  for (auto [i, j] : g.edges()) {
    t.push_back({i, j, -1.0});
    t.push_back({j, i, -1.0});
  }
  auto lap = StructuredMatrix::from_triplets(5, std::move(t), true);
  CHECK(bandwidth(lap, g) == 1);

  // L^2 has bandwidth 2, consistent with the dense-multiply oracle
  Eigen::MatrixXd l2_dense = lap.dense() * lap.dense();
  auto l2 = StructuredMatrix::from_dense(l2_dense, false);
  CHECK(bandwidth(l2, g) == 2);
  CHECK(bandwidth(l2, g) == oracles::brute_force_bandwidth(l2, g));
  CHECK(bandwidth(l2, g) <= bandwidth(lap, g) + bandwidth(lap, g));
}

TEST_CASE("bandwidth errors on cross-component nonzeros") {
  Graph g(4, {{0, 1}, {2, 3}});
  auto m = StructuredMatrix::from_triplets(4, {{0, 2, 1.0}, {2, 0, 1.0}}, true);
  CHECK_THROWS_AS(bandwidth(m, g), numeric_error);
}

TEST_CASE("check_bandwidth_algebra examples") {
  auto g = oracles::path_graph(4);
  auto i4 = StructuredMatrix::identity(4);
  auto rep = check_bandwidth_algebra(i4, i4, g);
  CHECK(rep.bw_sum == 0);
  CHECK(rep.bw_prod == 0);
  CHECK(rep.lemma_holds);

  std::mt19937_64 rng(3);
  auto cyc = oracles::cycle_graph(10);
  for (int trial = 0; trial < 25; ++trial) {
    auto a = oracles::random_bandwidth1(cyc, rng);
    auto b = oracles::random_bandwidth1(cyc, rng);
    auto r = check_bandwidth_algebra(a, b, cyc);
    CHECK(r.lemma_holds);
    CHECK(r.bw_prod <= 2);
    // dense-multiply oracle agrees on the product bandwidth
    auto prod = StructuredMatrix::from_dense(a.dense() * b.dense(), false);
    CHECK(r.bw_prod == oracles::brute_force_bandwidth(prod, cyc));
    // diagonal times bandwidth-1 stays within bandwidth 1
    std::vector<double> diag(10, 1.5);
    auto d = StructuredMatrix::diagonal(diag);
    CHECK(check_bandwidth_algebra(d, b, cyc).bw_prod <= 1);
  }
}

TEST_CASE("bandwidth invariant under consistent relabeling") {
  std::mt19937_64 rng(17);
  auto g = oracles::random_connected_graph(9, 4, rng);
  auto m = oracles::random_bandwidth1(g, rng);
  // permute labels
  std::vector<Index> perm(9);
  for (Index i = 0; i < 9; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::array<Index, 2>> pedges;
  for (auto [i, j] : g.edges()) pedges.push_back({perm[i], perm[j]});
  Graph pg(9, pedges);
  std::vector<Triplet> t;
  for (Index i = 0; i < 9; ++i) {
    auto cols = m.row_cols(i);
    auto vals = m.row_vals(i);
    for (std::size_t e = 0; e < cols.size(); ++e)
      t.push_back({perm[i], perm[cols[e]], vals[e]});
  }
  auto pm = StructuredMatrix::from_triplets(9, std::move(t), true);
  CHECK(bandwidth(pm, pg) == bandwidth(m, g));
}

TEST_CASE("residual_inf") {
  auto h = StructuredMatrix::from_triplets(
      2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}}, true);
  std::vector<double> f{3.0, 3.0};
  std::vector<double> exact{1.0, 1.0};
  CHECK(residual_inf(h, exact, f) <= 1e-12);
  std::vector<double> zero{0.0, 0.0};
  CHECK(residual_inf(h, zero, f) == 3.0);
  Index rows[1] = {0};
  std::vector<double> x{1.0, 0.0};
  CHECK(residual_inf(h, x, f, rows) == doctest::Approx(1.0));
}

TEST_CASE("project_subdomain 2x2 example") {
  auto h = StructuredMatrix::from_triplets(
      2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 2.0}}, true);
  std::vector<double> f{3.0, 4.0};
  auto g = oracles::path_graph(2);
  auto p = oracles::contiguous_partition(2, 2);
  auto ob = expand_overlap(g, p, 0);
  auto sd = project_subdomain(h, f, ob, 0);
  CHECK(sd.block == VertexList{0});
  CHECK(sd.h_block.coeff(0, 0) == 2.0);
  REQUIRE(sd.h_cross.size() == 1);
  CHECK(sd.h_cross[0].local_row == 0);
  CHECK(sd.h_cross[0].global_col == 1);
  CHECK(sd.h_cross[0].value == 1.0);
  CHECK(sd.f_block == std::vector<double>{3.0});

  // omega large enough that the block covers everything: empty cross part
  auto ob2 = expand_overlap(g, p, 1);
  auto sd2 = project_subdomain(h, f, ob2, 0);
  CHECK(sd2.h_cross.empty());
  CHECK(sd2.local_size() == 2);
}

TEST_CASE("project_subdomain tridiagonal bookkeeping") {
  auto h = oracles::tridiag2(6);
  std::vector<double> f{1, 2, 3, 4, 5, 6};
  auto g = oracles::path_graph(6);
  auto p = oracles::contiguous_partition(6, 2);
  auto ob = expand_overlap(g, p, 1);
  auto sd = project_subdomain(h, f, ob, 0);
  CHECK(sd.block == VertexList{0, 1, 2, 3});
  // the 4x4 block is tridiag(2,-1) again
  auto expect = oracles::tridiag2(4);
  CHECK(sd.h_block.dense() == expect.dense());
  REQUIRE(sd.h_cross.size() == 1);
  CHECK(sd.h_cross[0].local_row == 3);  // vertex 3 couples to vertex 4
  CHECK(sd.h_cross[0].global_col == 4);
  CHECK(sd.h_cross[0].value == -1.0);
  CHECK(sd.restrict_rows == std::vector<Index>{0, 1, 2});
}

TEST_CASE("reassembling subdomain systems recovers H rows bit-exactly") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 10 + static_cast<Index>(rng() % 20);
    auto spec = oracles::random_qp_spec(n, n / 2, 0.5, rng);
    auto [h, f] = reduce_graph_qp(spec);
    auto p = greedy_partition(spec.g, 3, {.seed = static_cast<std::uint64_t>(trial)});
    auto ob = expand_overlap(spec.g, p, 1 + trial % 2);
    auto subs = project_all(h, f, ob);
    for (const auto& sd : subs) {
      for (Index lr = 0; lr < sd.local_size(); ++lr) {
        const Index gi = sd.block[lr];
        // every stored entry of row gi appears exactly once across
        // h_block and h_cross, with identical values
        std::vector<std::pair<Index, double>> rebuilt;
        auto cols = sd.h_block.row_cols(lr);
        auto vals = sd.h_block.row_vals(lr);
        for (std::size_t e = 0; e < cols.size(); ++e)
          rebuilt.emplace_back(sd.block[cols[e]], vals[e]);
        for (const auto& ce : sd.h_cross)
          if (ce.local_row == lr) rebuilt.emplace_back(ce.global_col, ce.value);
        std::sort(rebuilt.begin(), rebuilt.end());
        auto hcols = h.row_cols(gi);
        auto hvals = h.row_vals(gi);
        REQUIRE(rebuilt.size() == hcols.size());
        for (std::size_t e = 0; e < hcols.size(); ++e) {
          CHECK(rebuilt[e].first == hcols[e]);
          CHECK(rebuilt[e].second == hvals[e]);
        }
        CHECK(sd.f_block[lr] == f[gi]);
      }
    }
  }
}

TEST_CASE("local_residual_inf equals the row-restricted global residual") {
  std::mt19937_64 rng(31);
  auto spec = oracles::random_qp_spec(15, 6, 0.4, rng);
  auto [h, f] = reduce_graph_qp(spec);
  auto p = greedy_partition(spec.g, 3, {.seed = 1});
  auto ob = expand_overlap(spec.g, p, 1);
  auto subs = project_all(h, f, ob);
  std::vector<double> x(h.n());
  for (auto& v : x) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  for (const auto& sd : subs) {
    const double local = sd.local_residual_inf(x);
    const double global = residual_inf(h, x, f, sd.block);
    CHECK(local == doctest::Approx(global).epsilon(1e-12));
  }
}

TEST_CASE("structure_ratio warns above threshold") {
  auto g = oracles::path_graph(12);
  auto h = oracles::tridiag2(12);
  auto sr = structure_ratio(h, g);
  CHECK(sr.bandwidth == 1);
  CHECK(sr.diameter == 11);
  CHECK(!sr.warn);
  Eigen::MatrixXd denseful = Eigen::MatrixXd::Constant(12, 12, 0.1);
  auto full = StructuredMatrix::from_dense(denseful, true);
  CHECK(structure_ratio(full, g).warn);
}
