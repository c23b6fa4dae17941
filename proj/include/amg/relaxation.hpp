// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amg/core/sparse.hpp"
#include "amg/core/spectral.hpp"

namespace amg {

enum class RelaxScheme { jacobi, gauss_seidel, sym_gauss_seidel, gsne, block_sym_gauss_seidel };

struct RelaxConfig {
    RelaxScheme scheme = RelaxScheme::sym_gauss_seidel;
    double weight = 0.0;  // jacobi damping; 0 selects 4 / (3 rho(D^{-1}A))
    int sweeps = 1;
};

/// Matrix-bound data reused across sweeps: inverse diagonal, transpose and
/// column norms for gsne, factored diagonal blocks for the block scheme.
struct RelaxWorkspace {
    std::vector<double> inv_diag;
    double jacobi_weight = 0.0;
    SparseMatrix At;
    std::vector<double> col_norm2;
    index_t block = 1;
    std::vector<double> block_inv;  // m x m inverses, row-major per block
    std::vector<double> scratch;
};

inline void require_nonzero_diag(const std::vector<double>& d) {
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] == 0.0) throw std::runtime_error("relax: zero diagonal at row " + std::to_string(i));
}

inline RelaxWorkspace make_relax_workspace(const SparseMatrix& A, const RelaxConfig& cfg,
                                           OpCounter* c = nullptr) {
    if (A.n_rows != A.n_cols) throw std::invalid_argument("relax: square matrix required");
    RelaxWorkspace ws;
    switch (cfg.scheme) {
        case RelaxScheme::jacobi: {
            ws.inv_diag = diagonal(A);
            require_nonzero_diag(ws.inv_diag);
            for (double& v : ws.inv_diag) v = 1.0 / v;
            ws.jacobi_weight = cfg.weight;
            if (ws.jacobi_weight == 0.0)
                ws.jacobi_weight = 4.0 / (3.0 * spectral_radius_estimate(A, 15, c));
            break;
        }
        case RelaxScheme::gauss_seidel:
        case RelaxScheme::sym_gauss_seidel: {
            ws.inv_diag = diagonal(A);
            require_nonzero_diag(ws.inv_diag);
            for (double& v : ws.inv_diag) v = 1.0 / v;
            break;
        }
        case RelaxScheme::gsne: {
            ws.At = transpose(A);
            ws.col_norm2.assign(A.n_cols, 0.0);
            for (index_t i = 0; i < ws.At.n_rows; ++i)
                for (double v : ws.At.row_vals(i)) ws.col_norm2[i] += v * v;
            for (index_t i = 0; i < A.n_cols; ++i)
                if (ws.col_norm2[i] == 0.0)
                    throw std::runtime_error("relax: zero column at " + std::to_string(i));
            break;
        }
        case RelaxScheme::block_sym_gauss_seidel: {
            const index_t m = A.block_size;
            ws.block = m;
            if (m < 1 || A.n_rows % m != 0)
                throw std::invalid_argument("relax: bad block size for block relaxation");
            const index_t nb = A.n_rows / m;
            ws.block_inv.assign(static_cast<std::size_t>(nb) * m * m, 0.0);
            Eigen::MatrixXd blk(m, m);
            for (index_t b = 0; b < nb; ++b) {
                blk.setZero();
                for (index_t r = 0; r < m; ++r) {
                    const index_t i = b * m + r;
                    for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
                        const index_t j = A.col_indices[p];
                        if (j / m == b) blk(r, j - b * m) = A.values[p];
                    }
                }
                Eigen::FullPivLU<Eigen::MatrixXd> lu(blk);
                if (!lu.isInvertible())
                    throw std::runtime_error("relax: singular diagonal block " + std::to_string(b));
                Eigen::MatrixXd inv = lu.inverse();
                for (index_t r = 0; r < m; ++r)
                    for (index_t cc = 0; cc < m; ++cc)
                        ws.block_inv[(static_cast<std::size_t>(b) * m + r) * m + cc] = inv(r, cc);
            }
            break;
        }
    }
    return ws;
}

namespace detail {

inline void jacobi_sweep(const SparseMatrix& A, std::span<double> x, std::span<const double> b,
                         const RelaxWorkspace& ws, std::vector<double>& r) {
    r.resize(A.n_rows);
    spmv(A, x, r);
    for (index_t i = 0; i < A.n_rows; ++i)
        x[i] += ws.jacobi_weight * ws.inv_diag[i] * (b[i] - r[i]);
}

inline void gs_sweep(const SparseMatrix& A, std::span<double> x, std::span<const double> b,
                     const RelaxWorkspace& ws, bool forward) {
    const index_t n = A.n_rows;
    for (index_t s = 0; s < n; ++s) {
        const index_t i = forward ? s : n - 1 - s;
        double acc = b[i];
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t j = A.col_indices[p];
            if (j != i) acc -= A.values[p] * x[j];
        }
        x[i] = acc * ws.inv_diag[i];
    }
}

/// One forward Gauss-Seidel sweep on the normal equations A^T A x = A^T b,
/// realized column by column: x_i += (A e_i)^T r / ||A e_i||^2 with the
/// residual r = b - A x updated incrementally. Costs 2 |A| multiplies.
inline void gsne_sweep(const SparseMatrix& A, std::span<double> x, std::span<const double> b,
                       const RelaxWorkspace& ws, std::vector<double>& r) {
    r.resize(A.n_rows);
    spmv(A, x, r);
    for (index_t i = 0; i < A.n_rows; ++i) r[i] = b[i] - r[i];
    for (index_t i = 0; i < A.n_cols; ++i) {
        double num = 0.0;
        for (index_t p = ws.At.row_offsets[i]; p < ws.At.row_offsets[i + 1]; ++p)
            num += ws.At.values[p] * r[ws.At.col_indices[p]];
        const double delta = num / ws.col_norm2[i];
        x[i] += delta;
        for (index_t p = ws.At.row_offsets[i]; p < ws.At.row_offsets[i + 1]; ++p)
            r[ws.At.col_indices[p]] -= delta * ws.At.values[p];
    }
}

inline void block_gs_sweep(const SparseMatrix& A, std::span<double> x, std::span<const double> b,
                           const RelaxWorkspace& ws, bool forward) {
    const index_t m = ws.block;
    const index_t nb = A.n_rows / m;
    std::vector<double> rhs(m), sol(m);
    for (index_t s = 0; s < nb; ++s) {
        const index_t blk = forward ? s : nb - 1 - s;
        for (index_t r = 0; r < m; ++r) {
            const index_t i = blk * m + r;
            double acc = b[i];
            for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
                const index_t j = A.col_indices[p];
                if (j / m != blk) acc -= A.values[p] * x[j];
            }
            rhs[r] = acc;
        }
        const double* inv = ws.block_inv.data() + static_cast<std::size_t>(blk) * m * m;
        for (index_t r = 0; r < m; ++r) {
            double acc = 0.0;
            for (index_t cc = 0; cc < m; ++cc) acc += inv[r * m + cc] * rhs[cc];
            sol[r] = acc;
        }
        for (index_t r = 0; r < m; ++r) x[blk * m + r] = sol[r];
    }
}

}  // namespace detail

/// Work charged per sweep under the cycle cost model: |A| for every scheme
/// except gsne, which costs 2 |A|.
inline double relax_sweep_cost(RelaxScheme scheme, double nnz) {
    return scheme == RelaxScheme::gsne ? 2.0 * nnz : nnz;
}

/// Apply cfg.sweeps sweeps of the configured scheme to A x = b in place.
inline void relax(const RelaxConfig& cfg, const SparseMatrix& A, std::span<double> x,
                  std::span<const double> b, RelaxWorkspace& ws, OpCounter* c = nullptr) {
    if (static_cast<index_t>(x.size()) != A.n_rows || static_cast<index_t>(b.size()) != A.n_rows)
        throw std::invalid_argument("relax: dimension mismatch");
    for (int s = 0; s < cfg.sweeps; ++s) {
        switch (cfg.scheme) {
            case RelaxScheme::jacobi:
                detail::jacobi_sweep(A, x, b, ws, ws.scratch);
                break;
            case RelaxScheme::gauss_seidel:
                detail::gs_sweep(A, x, b, ws, true);
                break;
            case RelaxScheme::sym_gauss_seidel:
                detail::gs_sweep(A, x, b, ws, true);
                detail::gs_sweep(A, x, b, ws, false);
                break;
            case RelaxScheme::gsne:
                detail::gsne_sweep(A, x, b, ws, ws.scratch);
                break;
            case RelaxScheme::block_sym_gauss_seidel:
                detail::block_gs_sweep(A, x, b, ws, true);
                detail::block_gs_sweep(A, x, b, ws, false);
                break;
        }
        count(c, relax_sweep_cost(cfg.scheme, static_cast<double>(A.nnz())));
    }
}

/// Convenience overload that builds the workspace on the fly.
inline std::vector<double> relax(const RelaxConfig& cfg, const SparseMatrix& A,
                                 std::vector<double> x, std::span<const double> b,
                                 OpCounter* c = nullptr) {
    RelaxWorkspace ws = make_relax_workspace(A, cfg, c);
    relax(cfg, A, x, b, ws, c);
    return x;
}

}  // namespace amg
