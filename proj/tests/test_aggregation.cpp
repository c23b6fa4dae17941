// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace amg;
using testutil::poisson1d;

namespace {

SparseMatrix all_strong_path(index_t n) {
    return normalize_strength(symmetric_strength(poisson1d(n), 0.0));
}

}  // namespace

TEST_CASE("greedy aggregation on the 8-point line", "[aggregation]") {
    Aggregation agg = greedy_aggregate(all_strong_path(8));
    REQUIRE(agg.n_agg == 3);
    REQUIRE(agg.roots == std::vector<index_t>{0, 3, 6});
    REQUIRE(agg.node_to_agg == std::vector<index_t>{0, 0, 1, 1, 1, 2, 2, 2});
    for (index_t i = 0; i < 8; ++i) REQUIRE(agg.pattern.coeff(i, agg.node_to_agg[i]) == 1.0);
    REQUIRE(agg.pattern.nnz() == 8);
}

TEST_CASE("greedy aggregation on the 5-point path", "[aggregation]") {
    Aggregation agg = greedy_aggregate(all_strong_path(5));
    REQUIRE(agg.n_agg == 2);
    REQUIRE(agg.roots == std::vector<index_t>{0, 3});
    REQUIRE(agg.node_to_agg == std::vector<index_t>{0, 0, 1, 1, 1});
}

TEST_CASE("diagonal strength yields singletons", "[aggregation]") {
    Aggregation agg = greedy_aggregate(identity(5));
    REQUIRE(agg.n_agg == 5);
    for (index_t i = 0; i < 5; ++i) {
        REQUIRE(agg.roots[i] == i);
        REQUIRE(agg.node_to_agg[i] == i);
    }
}

TEST_CASE("leftover node joins the strongest adjacent aggregate", "[aggregation]") {
    // 3-node path: pass 1 builds {0,1}; node 2 attaches through its edge to 1
    Aggregation agg = greedy_aggregate(all_strong_path(3));
    REQUIRE(agg.n_agg == 1);
    REQUIRE(agg.roots == std::vector<index_t>{0});
    REQUIRE(agg.node_to_agg == std::vector<index_t>{0, 0, 0});
}

TEST_CASE("aggregation is a deterministic partition of unity", "[aggregation]") {
    std::mt19937 rng(31);
    for (int t = 0; t < 10; ++t) {
        SparseMatrix R = testutil::random_sparse(20, 20, 0.2, rng);
        for (auto& v : R.values) v = std::fabs(v);
        SparseMatrix S = normalize_strength(R);
        Aggregation a = greedy_aggregate(S);
        Aggregation b = greedy_aggregate(S);
        REQUIRE(a.node_to_agg == b.node_to_agg);
        REQUIRE(a.roots == b.roots);

        std::vector<double> ones(a.n_agg, 1.0), cover(20);
        spmv(a.pattern, ones, cover);
        for (double v : cover) REQUIRE(v == 1.0);
        std::vector<char> seen(20, 0);
        for (index_t j = 0; j < a.n_agg; ++j) {
            REQUIRE(a.node_to_agg[a.roots[j]] == j);
            REQUIRE(!seen[a.roots[j]]);
            seen[a.roots[j]] = 1;
        }
    }
}

TEST_CASE("unamalgamate expands nodal patterns by blocks", "[aggregation]") {
    SECTION("m = 1 leaves inputs unchanged") {
        SparseMatrix N = from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}});
        auto [D, roots] = unamalgamate(N, {0}, 1);
        REQUIRE(D == N);
        REQUIRE(roots == std::vector<index_t>{0});
    }
    SECTION("all-ones 2x1 with m = 2 becomes all-ones 4x2") {
        SparseMatrix N = from_triplets(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}});
        auto [D, roots] = unamalgamate(N, {1}, 2);
        REQUIRE(D.n_rows == 4);
        REQUIRE(D.n_cols == 2);
        REQUIRE(D.nnz() == 8);
        for (index_t i = 0; i < 4; ++i)
            for (index_t j = 0; j < 2; ++j) REQUIRE(D.coeff(i, j) == 1.0);
        REQUIRE(roots == std::vector<index_t>{2, 3});
    }
    SECTION("nodal root 3 with m = 2 owns DOFs 6 and 7") {
        SparseMatrix N = from_triplets(4, 1, {{3, 0, 1.0}});
        auto [D, roots] = unamalgamate(N, {3}, 2);
        REQUIRE(roots == std::vector<index_t>{6, 7});
        REQUIRE(D.coeff(6, 0) == 1.0);
        REQUIRE(D.coeff(7, 1) == 1.0);
    }
}
