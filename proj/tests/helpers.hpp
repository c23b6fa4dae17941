// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <random>

#include "amg/amg.hpp"

namespace testutil {

using namespace amg;

inline SparseMatrix tridiag(index_t n, double lo, double di, double up) {
    std::vector<Triplet> t;
    for (index_t i = 0; i < n; ++i) {
        if (i > 0) t.push_back({i, i - 1, lo});
        t.push_back({i, i, di});
        if (i + 1 < n) t.push_back({i, i + 1, up});
    }
    return from_triplets(n, n, std::move(t));
}

inline SparseMatrix poisson1d(index_t n) { return tridiag(n, -1.0, 2.0, -1.0); }

// grid-aligned anisotropy u_xx + eps u_yy on an n x n interior grid
inline SparseMatrix aniso2d(index_t n, double eps) {
    std::vector<Triplet> t;
    auto id = [n](index_t i, index_t j) { return j * n + i; };
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < n; ++i) {
            const index_t r = id(i, j);
            t.push_back({r, r, 2.0 + 2.0 * eps});
            if (i > 0) t.push_back({r, id(i - 1, j), -1.0});
            if (i + 1 < n) t.push_back({r, id(i + 1, j), -1.0});
            if (j > 0) t.push_back({r, id(i, j - 1), -eps});
            if (j + 1 < n) t.push_back({r, id(i, j + 1), -eps});
        }
    return from_triplets(n * n, n * n, std::move(t));
}

inline SparseMatrix random_sparse(index_t rows, index_t cols, double density, std::mt19937& rng) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<Triplet> t;
    for (index_t i = 0; i < rows; ++i)
        for (index_t j = 0; j < cols; ++j)
            if (coin(rng) < density) {
                double v = val(rng);
                if (v == 0.0) v = 0.5;
                t.push_back({i, j, v});
            }
    return from_triplets(rows, cols, std::move(t));
}

inline SparseMatrix random_spd_sparse(index_t n, double density, std::mt19937& rng) {
    SparseMatrix M = random_sparse(n, n, density, rng);
    Eigen::MatrixXd D = to_dense(M);
    D = (D.transpose() * D).eval();
    D += static_cast<double>(n) * 0.5 * Eigen::MatrixXd::Identity(n, n);
    return from_dense(D);
}

inline double a_norm(const SparseMatrix& A, std::span<const double> x) {
    std::vector<double> y(x.size());
    spmv(A, x, y);
    return std::sqrt(dot(x, y));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double rel_max_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    const double scale = std::max(want.cwiseAbs().maxCoeff(), 1e-300);
    return (got - want).cwiseAbs().maxCoeff() / scale;
}

inline double rel_max_err(const std::vector<double>& got, const std::vector<double>& want) {
    double scale = 1e-300;
    for (double v : want) scale = std::max(scale, std::fabs(v));
    return max_abs_diff(got, want) / scale;
}

}  // namespace testutil
