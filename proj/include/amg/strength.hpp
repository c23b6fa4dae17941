// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "amg/core/spectral.hpp"
#include "amg/core/sparse.hpp"

namespace amg {

enum class StrengthMeasure { classical, symmetric, evolution };
enum class EvolutionWeighting { spectral, l1jacobi };

struct StrengthConfig {
    StrengthMeasure measure = StrengthMeasure::evolution;
    // Threshold; relative cutoff theta in [0,1] for classical/symmetric,
    // magnitude ratio (> 1 keeps more) for evolution.
    double drop_tol = 4.0;
    int evolution_steps = 2;
    EvolutionWeighting weighting = EvolutionWeighting::spectral;
};

/// Classical strength: j is strong in row i if -A(i,j) >= theta * max_k(-A(i,k)).
/// Only negative couplings qualify; stored value is -A(i,j). Diagonal kept at 1.
inline SparseMatrix classical_strength(const SparseMatrix& A, double theta,
                                       OpCounter* c = nullptr) {
    if (A.n_rows != A.n_cols) throw std::invalid_argument("classical_strength: square matrix required");
    if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("classical_strength: theta must lie in [0, 1]");
    SparseMatrix S(A.n_rows, A.n_cols);
    S.block_size = A.block_size;
    for (index_t i = 0; i < A.n_rows; ++i) {
        double mx = 0.0;
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
            if (A.col_indices[p] != i) mx = std::max(mx, -A.values[p]);
        bool diag_done = false;
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t j = A.col_indices[p];
            if (j == i) continue;
            const double raw = -A.values[p];
            if (mx > 0.0 && raw > 0.0 && raw >= theta * mx) {
                if (!diag_done && j > i) {
                    S.col_indices.push_back(i);
                    S.values.push_back(1.0);
                    diag_done = true;
                }
                S.col_indices.push_back(j);
                S.values.push_back(raw);
            }
        }
        if (!diag_done) {
            // Keep the diagonal; insert in sorted position.
            auto begin = S.col_indices.begin() + S.row_offsets[i];
            auto it = std::lower_bound(begin, S.col_indices.end(), i);
            const auto off = it - S.col_indices.begin();
            S.col_indices.insert(it, i);
            S.values.insert(S.values.begin() + off, 1.0);
        }
        S.row_offsets[i + 1] = static_cast<index_t>(S.col_indices.size());
    }
    count(c, static_cast<double>(A.n_rows));  // theta * max per row
    return S;
}

/// Symmetric strength: j is strong in row i if |A(i,j)| / sqrt(|A(i,i) A(j,j)|) >= theta.
/// theta = 0 keeps the full pattern of A. Stored value is the scaled magnitude.
inline SparseMatrix symmetric_strength(const SparseMatrix& A, double theta,
                                       OpCounter* c = nullptr) {
    if (A.n_rows != A.n_cols) throw std::invalid_argument("symmetric_strength: square matrix required");
    if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("symmetric_strength: theta must lie in [0, 1]");
    const std::vector<double> d = diagonal(A);
    for (index_t i = 0; i < A.n_rows; ++i)
        if (d[i] == 0.0)
            throw std::runtime_error("symmetric_strength: zero diagonal at row " + std::to_string(i));
    SparseMatrix S(A.n_rows, A.n_cols);
    S.block_size = A.block_size;
    for (index_t i = 0; i < A.n_rows; ++i) {
        bool diag_done = false;
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t j = A.col_indices[p];
            if (j == i) continue;
            const double raw = std::fabs(A.values[p]) / std::sqrt(std::fabs(d[i]) * std::fabs(d[j]));
            if (raw >= theta && raw > 0.0) {
                if (!diag_done && j > i) {
                    S.col_indices.push_back(i);
                    S.values.push_back(1.0);
                    diag_done = true;
                }
                S.col_indices.push_back(j);
                S.values.push_back(raw);
            }
        }
        if (!diag_done) {
            auto begin = S.col_indices.begin() + S.row_offsets[i];
            auto it = std::lower_bound(begin, S.col_indices.end(), i);
            const auto off = it - S.col_indices.begin();
            S.col_indices.insert(it, i);
            S.values.insert(S.values.begin() + off, 1.0);
        }
        S.row_offsets[i + 1] = static_cast<index_t>(S.col_indices.size());
    }
    count(c, static_cast<double>(A.nnz()) + A.n_rows);
    return S;
}

/// Evolution strength: evolve a unit impulse at node i by `steps` applications
/// of (I - W^{-1} A) restricted to the distance-`steps` neighborhood of i,
/// then mark j strong when |z_j| is within a factor drop_tol of the largest
/// off-center magnitude. The result is restricted to the pattern of A so the
/// measure compares only immediate neighbors. W is (1/omega_hat) D with
/// omega_hat = 1/rho(D^{-1}A) for spectral weighting, or diag(sum_j |A(i,j)|)
/// for l1jacobi weighting (which needs no eigenvalue estimate).
inline SparseMatrix evolution_strength(const SparseMatrix& A, const StrengthConfig& cfg,
                                       OpCounter* c = nullptr) {
    if (A.n_rows != A.n_cols) throw std::invalid_argument("evolution_strength: square matrix required");
    if (cfg.drop_tol <= 0.0) throw std::invalid_argument("evolution_strength: drop_tol must be positive");
    if (cfg.evolution_steps < 1) throw std::invalid_argument("evolution_strength: steps must be >= 1");
    const index_t n = A.n_rows;
    std::vector<double> winv(n);
    if (cfg.weighting == EvolutionWeighting::spectral) {
        const double rho = spectral_radius_estimate(A, 15, c);
        if (rho <= 0.0) throw std::runtime_error("evolution_strength: spectral radius estimate failed");
        const double omega = 1.0 / rho;
        for (index_t i = 0; i < n; ++i) {
            const double d = A.coeff(i, i);
            if (d == 0.0)
                throw std::runtime_error("evolution_strength: zero diagonal at row " + std::to_string(i));
            winv[i] = omega / d;
        }
    } else {
        for (index_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (double v : A.row_vals(i)) s += std::fabs(v);
            if (s == 0.0)
                throw std::runtime_error("evolution_strength: zero row at " + std::to_string(i));
            winv[i] = 1.0 / s;
        }
    }

    const SparseMatrix At = transpose(A);  // undirected neighborhoods need column adjacency
    SparseMatrix S(n, n);
    S.block_size = A.block_size;

    std::vector<index_t> nbhd;           // nodes within graph distance <= steps
    std::vector<index_t> local(n, -1);   // global -> local index, lazily reset
    std::vector<index_t> ring;           // one-ring of i in A + A^T
    std::vector<double> z, znew;
    double ops = 0.0;
    for (index_t i = 0; i < n; ++i) {
        // Breadth-first neighborhood over the symmetrized pattern.
        nbhd.clear();
        nbhd.push_back(i);
        local[i] = 0;
        std::size_t frontier_begin = 0;
        for (int step = 0; step < cfg.evolution_steps; ++step) {
            const std::size_t frontier_end = nbhd.size();
            for (std::size_t f = frontier_begin; f < frontier_end; ++f) {
                const index_t u = nbhd[f];
                for (index_t j : A.row_cols(u))
                    if (local[j] < 0) {
                        local[j] = static_cast<index_t>(nbhd.size());
                        nbhd.push_back(j);
                    }
                for (index_t j : At.row_cols(u))
                    if (local[j] < 0) {
                        local[j] = static_cast<index_t>(nbhd.size());
                        nbhd.push_back(j);
                    }
            }
            frontier_begin = frontier_end;
        }

        z.assign(nbhd.size(), 0.0);
        znew.assign(nbhd.size(), 0.0);
        z[0] = 1.0;
        for (int step = 0; step < cfg.evolution_steps; ++step) {
            for (std::size_t t = 0; t < nbhd.size(); ++t) {
                const index_t u = nbhd[t];
                double au_z = 0.0;
                for (index_t p = A.row_offsets[u]; p < A.row_offsets[u + 1]; ++p) {
                    const index_t lj = local[A.col_indices[p]];
                    if (lj >= 0) {
                        au_z += A.values[p] * z[lj];
                        ops += 1.0;
                    }
                }
                znew[t] = z[t] - winv[u] * au_z;
                ops += 1.0;
            }
            std::swap(z, znew);
        }

        // Strength decision over the immediate neighbors of i in A or A^T.
        // The union matters for one-sided stencils (triangular upwind
        // operators): the evolved mass lands on column neighbors only.
        ring.clear();
        {
            auto ar = A.row_cols(i);
            auto tr = At.row_cols(i);
            std::merge(ar.begin(), ar.end(), tr.begin(), tr.end(), std::back_inserter(ring));
            ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
        }
        double mx = 0.0;
        for (index_t j : ring)
            if (j != i && local[j] >= 0) mx = std::max(mx, std::fabs(z[local[j]]));
        const double cutoff = mx / cfg.drop_tol;
        bool diag_done = false;
        const double zi = std::fabs(z[0]);
        for (index_t j : ring) {
            if (j == i) continue;
            const double mag = (local[j] >= 0) ? std::fabs(z[local[j]]) : 0.0;
            if (mx > 0.0 && mag >= cutoff && mag > 0.0) {
                if (!diag_done && j > i) {
                    S.col_indices.push_back(i);
                    S.values.push_back(zi > 0.0 ? zi : 1.0);
                    diag_done = true;
                }
                S.col_indices.push_back(j);
                S.values.push_back(mag);
            }
        }
        if (!diag_done) {
            auto begin = S.col_indices.begin() + S.row_offsets[i];
            auto it = std::lower_bound(begin, S.col_indices.end(), i);
            const auto off = it - S.col_indices.begin();
            S.col_indices.insert(it, i);
            S.values.insert(S.values.begin() + off, zi > 0.0 ? zi : 1.0);
        }
        S.row_offsets[i + 1] = static_cast<index_t>(S.col_indices.size());

        for (index_t u : nbhd) local[u] = -1;
    }
    count(c, ops);
    return S;
}

inline SparseMatrix strength(const SparseMatrix& A, const StrengthConfig& cfg,
                             OpCounter* c = nullptr) {
    switch (cfg.measure) {
        case StrengthMeasure::classical: return classical_strength(A, cfg.drop_tol, c);
        case StrengthMeasure::symmetric: return symmetric_strength(A, cfg.drop_tol, c);
        case StrengthMeasure::evolution: return evolution_strength(A, cfg, c);
    }
    throw std::invalid_argument("strength: unknown measure");
}

/// Scale each row so the largest off-diagonal equals 1 and set the diagonal
/// to 1. Rows without off-diagonal entries keep only the unit diagonal.
inline SparseMatrix normalize_strength(const SparseMatrix& S, OpCounter* c = nullptr) {
    if (S.n_rows != S.n_cols) throw std::invalid_argument("normalize_strength: square matrix required");
    for (double v : S.values)
        if (v < 0.0) throw std::invalid_argument("normalize_strength: negative strength value");
    SparseMatrix N(S.n_rows, S.n_cols);
    N.block_size = S.block_size;
    for (index_t i = 0; i < S.n_rows; ++i) {
        double mx = 0.0;
        for (index_t p = S.row_offsets[i]; p < S.row_offsets[i + 1]; ++p)
            if (S.col_indices[p] != i) mx = std::max(mx, S.values[p]);
        bool diag_done = false;
        for (index_t p = S.row_offsets[i]; p < S.row_offsets[i + 1]; ++p) {
            const index_t j = S.col_indices[p];
            if (j == i) continue;
            if (mx <= 0.0) continue;
            const double v = S.values[p] / mx;
            if (v == 0.0) continue;
            if (!diag_done && j > i) {
                N.col_indices.push_back(i);
                N.values.push_back(1.0);
                diag_done = true;
            }
            N.col_indices.push_back(j);
            N.values.push_back(v);
        }
        if (!diag_done) {
            auto begin = N.col_indices.begin() + N.row_offsets[i];
            auto it = std::lower_bound(begin, N.col_indices.end(), i);
            const auto off = it - N.col_indices.begin();
            N.col_indices.insert(it, i);
            N.values.insert(N.values.begin() + off, 1.0);
        }
        N.row_offsets[i + 1] = static_cast<index_t>(N.col_indices.size());
    }
    count(c, static_cast<double>(S.nnz()));
    return N;
}

/// Collapse a DOF-level strength matrix to nodes: entry (I, J) is the largest
/// magnitude within the m x m block. Requires dimensions divisible by m.
inline SparseMatrix amalgamate(const SparseMatrix& S, index_t m) {
    if (m < 1) throw std::invalid_argument("amalgamate: block size must be >= 1");
    if (m == 1) return S;
    if (S.n_rows % m != 0 || S.n_cols % m != 0)
        throw std::invalid_argument("amalgamate: dimensions not divisible by block size");
    const index_t nr = S.n_rows / m;
    const index_t nc = S.n_cols / m;
    std::vector<std::vector<std::pair<index_t, double>>> rows(nr);
    for (index_t i = 0; i < S.n_rows; ++i) {
        const index_t bi = i / m;
        for (index_t p = S.row_offsets[i]; p < S.row_offsets[i + 1]; ++p)
            rows[bi].push_back({S.col_indices[p] / m, std::fabs(S.values[p])});
    }
    SparseMatrix N(nr, nc);
    for (index_t bi = 0; bi < nr; ++bi) {
        auto& r = rows[bi];
        std::sort(r.begin(), r.end());
        for (std::size_t p = 0; p < r.size();) {
            const index_t j = r[p].first;
            double mx = 0.0;
            while (p < r.size() && r[p].first == j) {
                mx = std::max(mx, r[p].second);
                ++p;
            }
            if (mx != 0.0) {
                N.col_indices.push_back(j);
                N.values.push_back(mx);
            }
        }
        N.row_offsets[bi + 1] = static_cast<index_t>(N.col_indices.size());
    }
    return N;
}

}  // namespace amg
