// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "amg/core/sparse.hpp"

namespace amg {

/// Estimate rho(D^{-1} A) with a fixed number of Arnoldi steps (default 15),
/// taking the largest eigenvalue magnitude of the small Hessenberg matrix.
/// Deterministic start vector; charges steps * |A| multiplies.
inline double spectral_radius_estimate(const SparseMatrix& A, int steps = 15,
                                       OpCounter* c = nullptr) {
    if (A.n_rows != A.n_cols) throw std::invalid_argument("spectral_radius_estimate: square matrix required");
    const index_t n = A.n_rows;
    if (n == 0) return 0.0;
    std::vector<double> dinv(n);
    for (index_t i = 0; i < n; ++i) {
        const double d = A.coeff(i, i);
        if (d == 0.0)
            throw std::runtime_error("spectral_radius_estimate: zero diagonal at row " + std::to_string(i));
        dinv[i] = 1.0 / d;
    }

    const int m = std::min<int>(steps, n);
    std::mt19937 gen(20240911u);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<std::vector<double>> V;
    std::vector<double> v0(n);
    for (index_t i = 0; i < n; ++i) v0[i] = 1.0 + dist(gen);
    scale(1.0 / norm2(v0), v0);
    V.push_back(std::move(v0));

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    int built = 0;
    std::vector<double> w(n);
    for (int j = 0; j < m; ++j) {
        spmv(A, V[j], w, c);
        for (index_t i = 0; i < n; ++i) w[i] *= dinv[i];
        for (int t = 0; t <= j; ++t) {
            const double h = dot(w, V[t]);
            H(t, j) = h;
            axpy(-h, V[t], w);
        }
        const double h = norm2(w);
        H(j + 1, j) = h;
        built = j + 1;
        if (h < 1e-14) break;  // invariant subspace found
        std::vector<double> v(w);
        scale(1.0 / h, v);
        V.push_back(std::move(v));
    }

    Eigen::MatrixXd Hs = H.topLeftCorner(built, built);
    Eigen::EigenSolver<Eigen::MatrixXd> es(Hs, /*computeEigenvectors=*/false);
    double rho = 0.0;
    for (int i = 0; i < built; ++i) rho = std::max(rho, std::abs(es.eigenvalues()[i]));
    return rho;
}

}  // namespace amg
