// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace amg;
using Catch::Matchers::WithinRel;

namespace {

// dense-ish block with an exact nonzero count, values are irrelevant here
SparseMatrix with_nnz(index_t rows, index_t cols, index_t nnz) {
    std::vector<Triplet> trips;
    for (index_t t = 0; t < nnz; ++t)
        trips.push_back({t / cols, t % cols, 1.0});
    return from_triplets(rows, cols, std::move(trips));
}

Hierarchy two_level_100_25() {
    Hierarchy h;
    h.levels.push_back({.A = with_nnz(10, 10, 100), .P = with_nnz(10, 5, 30),
                        .R = with_nnz(5, 10, 30), .B = constant_candidates(10)});
    h.levels.push_back({.A = with_nnz(5, 5, 25), .B = constant_candidates(5)});
    return h;
}

}  // namespace

TEST_CASE("operator complexity matches the frozen two level example", "[complexity][oracle]") {
    Hierarchy h = two_level_100_25();
    REQUIRE_THAT(operator_complexity(h), WithinRel(1.25, 1e-15));
}

TEST_CASE("cycle complexity matches the frozen V(1,1) example", "[complexity][oracle]") {
    Hierarchy h = two_level_100_25();
    h.options.pre_relax.sweeps = 1;
    h.options.post_relax.sweeps = 1;
    REQUIRE_THAT(cycle_complexity(h), WithinRel(3.6, 1e-15));
    // explicit sweep counts override the stored options
    REQUIRE_THAT(cycle_complexity(h, 2, 1), WithinRel(4.6, 1e-15));
    REQUIRE_THAT(cycle_complexity(h, 0, 0), WithinRel(1.6, 1e-15));
}

TEST_CASE("single level hierarchies cost one operator and no cycle work", "[complexity]") {
    Hierarchy h;
    h.levels.push_back({.A = with_nnz(8, 8, 40), .B = constant_candidates(8)});
    REQUIRE(operator_complexity(h) == 1.0);
    REQUIRE(cycle_complexity(h) == 0.0);
}

TEST_CASE("three level cycle complexity sums per level charges", "[complexity][oracle]") {
    Hierarchy h;
    h.levels.push_back({.A = with_nnz(20, 20, 200), .P = with_nnz(20, 8, 60),
                        .R = with_nnz(8, 20, 50), .B = constant_candidates(20)});
    h.levels.push_back({.A = with_nnz(8, 8, 40), .P = with_nnz(8, 4, 12),
                        .R = with_nnz(4, 8, 12), .B = constant_candidates(8)});
    h.levels.push_back({.A = with_nnz(4, 4, 10), .B = constant_candidates(4)});
    h.options.pre_relax.sweeps = 2;
    h.options.post_relax.sweeps = 1;
    REQUIRE_THAT(operator_complexity(h), WithinRel(1.25, 1e-15));
    // (4*200 + 60 + 50 + 4*40 + 12 + 12) / 200
    REQUIRE_THAT(cycle_complexity(h), WithinRel(5.47, 1e-15));
}

TEST_CASE("setup report carries levels, complexities and work buckets", "[complexity]") {
    SparseMatrix A = testutil::aniso2d(12, 0.1);
    SetupOptions o;
    o.max_size = 10;
    Hierarchy h = setup(A, constant_candidates(A.n_rows), o);
    nlohmann::json j = setup_report(h);

    REQUIRE(j.contains("levels"));
    REQUIRE(j["levels"].size() == static_cast<std::size_t>(h.n_levels()));
    REQUIRE(j["levels"][0]["rows"] == A.n_rows);
    REQUIRE(j["levels"][0]["nnz"] == A.nnz());
    REQUIRE(j["levels"][0].contains("nnz_P"));
    REQUIRE_FALSE(j["levels"].back().contains("nnz_P"));
    REQUIRE_THAT(j["operator_complexity"].get<double>(),
                 WithinRel(operator_complexity(h), 1e-15));
    REQUIRE_THAT(j["cycle_complexity"].get<double>(), WithinRel(cycle_complexity(h), 1e-15));

    const auto& w = j["work_units"];
    const double sum = w["aggregation"].get<double>() + w["candidates"].get<double>() +
                       w["interp"].get<double>() + w["rap"].get<double>();
    REQUIRE_THAT(w["setup_total"].get<double>(), WithinRel(sum, 1e-12));
}

TEST_CASE("csv report is deterministic and well formed", "[complexity]") {
    SparseMatrix A = testutil::aniso2d(10, 0.5);
    SetupOptions o;
    o.max_size = 12;
    Hierarchy h = setup(A, constant_candidates(A.n_rows), o);
    const std::string a = setup_report_csv(h);
    const std::string b = setup_report_csv(h);
    REQUIRE(a == b);
    REQUIRE(a.rfind("level,rows,nnz,nnz_per_row,nnz_P,nnz_R\n", 0) == 0);
    const auto lines = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
    REQUIRE(lines == static_cast<std::size_t>(h.n_levels()) + 4);
}
