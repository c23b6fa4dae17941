// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "helpers.hpp"

using namespace amg;
using testutil::random_sparse;
using testutil::tridiag;

TEST_CASE("from_triplets sums duplicates and sorts columns", "[sparse]") {
    SparseMatrix A = from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}, {1, 1, -3.0}});
    REQUIRE(A.nnz() == 3);
    REQUIRE(A.coeff(0, 0) == 2.0);
    REQUIRE(A.coeff(0, 2) == 1.5);
    REQUIRE(A.coeff(1, 1) == -3.0);
    auto cols = A.row_cols(0);
    REQUIRE(std::is_sorted(cols.begin(), cols.end()));
}

TEST_CASE("spmv identity and Dirichlet tridiagonal", "[sparse]") {
    std::vector<double> x{1.0, 2.0, 3.0};
    auto y = spmv(identity(3), x);
    REQUIRE(y == std::vector<double>{1.0, 2.0, 3.0});

    std::vector<double> ones{1.0, 1.0, 1.0};
    auto z = spmv(tridiag(3, -1.0, 2.0, -1.0), ones);
    REQUIRE(z == std::vector<double>{1.0, 0.0, 1.0});
}

TEST_CASE("spmv charges one operation per stored entry", "[sparse][work]") {
    SparseMatrix A = tridiag(5, -1.0, 2.0, -1.0);
    OpCounter c;
    std::vector<double> x(5, 1.0), y(5);
    spmv(A, x, y, &c);
    REQUIRE(c.ops == static_cast<double>(A.nnz()));
}

TEST_CASE("transpose examples and round trip", "[sparse]") {
    REQUIRE(transpose(identity(4)) == identity(4));

    SparseMatrix A = from_triplets(2, 3, {{0, 2, 5.0}});
    SparseMatrix T = transpose(A);
    REQUIRE(T.n_rows == 3);
    REQUIRE(T.n_cols == 2);
    REQUIRE(T.coeff(2, 0) == 5.0);

    std::mt19937 rng(7);
    SparseMatrix R = random_sparse(9, 6, 0.35, rng);
    REQUIRE(transpose(transpose(R)) == R);
}

TEST_CASE("matmul identity and permutation composition", "[sparse]") {
    std::mt19937 rng(11);
    SparseMatrix A = random_sparse(6, 6, 0.4, rng);
    REQUIRE(matmul(A, identity(6)) == A);

    // cycle (0 1 2) composed with itself is (0 2 1)
    SparseMatrix P1 = from_triplets(3, 3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}});
    SparseMatrix P2 = matmul(P1, P1);
    REQUIRE(P2.coeff(0, 2) == 1.0);
    REQUIRE(P2.coeff(1, 0) == 1.0);
    REQUIRE(P2.coeff(2, 1) == 1.0);
    REQUIRE(P2.nnz() == 3);
}

TEST_CASE("kernels match dense oracles on random instances", "[sparse][oracle]") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<index_t> pick(2, 64);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const index_t n = pick(rng), m = pick(rng), k = pick(rng);
        SparseMatrix A = random_sparse(n, m, 0.3, rng);
        SparseMatrix B = random_sparse(m, k, 0.3, rng);
        Eigen::MatrixXd Ad = to_dense(A), Bd = to_dense(B);

        std::vector<double> x(m);
        for (auto& v : x) v = val(rng);
        Eigen::VectorXd xd = Eigen::Map<Eigen::VectorXd>(x.data(), m);
        auto y = spmv(A, x);
        Eigen::VectorXd yd = Ad * xd;
        for (index_t i = 0; i < n; ++i)
            REQUIRE_THAT(y[i], Catch::Matchers::WithinRel(yd[i], 1e-13) ||
                                   Catch::Matchers::WithinAbs(yd[i], 1e-13));

        REQUIRE(testutil::rel_max_err(to_dense(transpose(A)), Ad.transpose()) < 1e-13);
        REQUIRE(testutil::rel_max_err(to_dense(matmul(A, B)), Ad * Bd) < 1e-13);

        SparseMatrix R = random_sparse(k, n, 0.3, rng);
        Eigen::MatrixXd Rd = to_dense(R);
        REQUIRE(testutil::rel_max_err(to_dense(galerkin_product(R, A, B)), Rd * Ad * Bd) < 1e-13);
    }
}

TEST_CASE("galerkin product with R = P^T keeps symmetry and definiteness", "[sparse]") {
    std::mt19937 rng(5);
    SparseMatrix A = testutil::random_spd_sparse(24, 0.3, rng);
    SparseMatrix P = random_sparse(24, 7, 0.5, rng);
    SparseMatrix Ac = galerkin_product(transpose(P), A, P);
    REQUIRE(is_symmetric(Ac, 1e-13));
    Eigen::MatrixXd Acd = to_dense(Ac);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Acd);
    REQUIRE(es.eigenvalues().minCoeff() > 0.0);  // P drawn dense enough to have full rank
}

TEST_CASE("filter_matrix frozen rows", "[sparse]") {
    SECTION("theta = 0 is the identity") {
        std::mt19937 rng(3);
        SparseMatrix G = random_sparse(8, 8, 0.4, rng);
        REQUIRE(filter_matrix(G, 0.0, std::nullopt) == G);
    }
    SECTION("k-th largest keeps the top entries") {
        SparseMatrix G =
            from_triplets(1, 4, {{0, 0, 4.0}, {0, 1, 2.0}, {0, 2, 1.0}, {0, 3, 9.0}});
        // non-square row: no diagonal exemption; magnitudes 4,2,1,9 with k=2
        SparseMatrix F = filter_matrix(G, std::nullopt, 2);
        REQUIRE(F.nnz() == 2);
        REQUIRE(F.coeff(0, 3) == 9.0);
        REQUIRE(F.coeff(0, 0) == 4.0);
    }
    SECTION("theta drops entries under the row-max fraction") {
        SparseMatrix G = from_triplets(
            3, 3, {{0, 0, 2.0}, {0, 1, 1.0}, {0, 2, 0.05}, {1, 0, 0.3}, {1, 1, 2.0}, {2, 2, 2.0}});
        SparseMatrix F = filter_matrix(G, 0.1, std::nullopt);
        REQUIRE(F.coeff(0, 1) == 1.0);
        REQUIRE(F.coeff(0, 2) == 0.0);   // 0.05 < 0.1 * 1.0
        REQUIRE(F.coeff(1, 0) == 0.3);   // sole off-diagonal survives
        REQUIRE(F.coeff(0, 0) == 2.0);   // diagonal exempt
    }
    SECTION("ties with the k-th magnitude are kept") {
        SparseMatrix G =
            from_triplets(1, 3, {{0, 0, 2.0}, {0, 1, 2.0}, {0, 2, 1.0}});
        SparseMatrix F = filter_matrix(G, std::nullopt, 1);
        REQUIRE(F.nnz() == 2);
    }
}

TEST_CASE("filter_matrix is idempotent and keeps each row's max off-diagonal", "[sparse]") {
    std::mt19937 rng(17);
    for (int t = 0; t < 20; ++t) {
        SparseMatrix G = random_sparse(12, 12, 0.45, rng);
        SparseMatrix F = filter_matrix(G, 0.3, 2);
        REQUIRE(filter_matrix(F, 0.3, 2) == F);
        for (index_t i = 0; i < G.n_rows; ++i) {
            double best = 0.0;
            index_t arg = -1;
            for (index_t p = G.row_offsets[i]; p < G.row_offsets[i + 1]; ++p)
                if (G.col_indices[p] != i && std::fabs(G.values[p]) > best) {
                    best = std::fabs(G.values[p]);
                    arg = G.col_indices[p];
                }
            if (arg >= 0) REQUIRE(F.coeff(i, arg) == G.coeff(i, arg));
        }
    }
}

TEST_CASE("matrix market round trip is exact", "[sparse][io]") {
    std::mt19937 rng(23);
    SparseMatrix A = random_sparse(10, 7, 0.3, rng);
    std::stringstream ss;
    write_matrix_market(ss, A);
    REQUIRE(read_matrix_market(ss) == A);
}

TEST_CASE("matrix market symmetric storage expands", "[sparse][io]") {
    std::stringstream ss;
    ss << "%%MatrixMarket matrix coordinate real symmetric\n"
          "3 3 3\n"
          "1 1 2.0\n"
          "2 1 -1.0\n"
          "3 3 1.5\n";
    SparseMatrix A = read_matrix_market(ss);
    REQUIRE(A.coeff(0, 1) == -1.0);
    REQUIRE(A.coeff(1, 0) == -1.0);
    REQUIRE(A.nnz() == 4);
    REQUIRE(is_symmetric(A));
}

TEST_CASE("block size survives transpose, filter and galerkin", "[sparse]") {
    SparseMatrix A = tridiag(6, -1.0, 2.0, -1.0);
    A.block_size = 2;
    REQUIRE(transpose(A).block_size == 2);
    REQUIRE(filter_matrix(A, 0.5, std::nullopt).block_size == 2);
}
