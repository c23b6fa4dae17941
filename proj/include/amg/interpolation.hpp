// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amg/aggregation.hpp"
#include "amg/core/dense.hpp"
#include "amg/core/sparse.hpp"
#include "amg/relaxation.hpp"

namespace amg {

enum class KrylovKind { cg, gmres };

struct FilterRule {
    std::optional<double> theta;  // relative row threshold in [0, 1]
    std::optional<index_t> k;     // keep-k rule, applied before theta
};

struct InterpConfig {
    int degree = 2;  // sparsity pattern grows as S^degree * C
    std::optional<FilterRule> prefilter;
    std::optional<FilterRule> postfilter;
    int energy_iters = 0;  // 0 selects ceil(1.5 * degree), at least 1
    KrylovKind krylov = KrylovKind::cg;
};

inline int effective_energy_iters(const InterpConfig& cfg) {
    if (cfg.energy_iters > 0) return cfg.energy_iters;
    return std::max(1, static_cast<int>(std::ceil(1.5 * cfg.degree)));
}

/// Candidate interpolation pattern N = S^d * C. Values accumulate products of
/// strength entries, so filtering on N keeps the strongest coarse couplings.
inline SparseMatrix sparsity_pattern(const SparseMatrix& S, const SparseMatrix& C, int degree,
                                     OpCounter* c = nullptr) {
    if (S.n_rows != S.n_cols || S.n_cols != C.n_rows)
        throw std::invalid_argument("sparsity_pattern: dimension mismatch");
    if (degree < 0) throw std::invalid_argument("sparsity_pattern: degree must be >= 0");
    SparseMatrix N = C;
    for (int t = 0; t < degree; ++t) N = matmul(S, N, c);
    return N;
}

/// Overwrite row roots[j] with the single entry (j, 1), turning the pattern
/// into the [W; I] form with identity rows at the root DOFs.
inline SparseMatrix root_node_pattern(const SparseMatrix& N, const std::vector<index_t>& roots) {
    if (static_cast<index_t>(roots.size()) != N.n_cols)
        throw std::invalid_argument("root_node_pattern: need one root per coarse column");
    std::vector<index_t> owner(N.n_rows, -1);
    for (std::size_t j = 0; j < roots.size(); ++j) {
        if (roots[j] < 0 || roots[j] >= N.n_rows)
            throw std::invalid_argument("root_node_pattern: root out of range");
        if (owner[roots[j]] >= 0) throw std::invalid_argument("root_node_pattern: duplicate root row");
        owner[roots[j]] = static_cast<index_t>(j);
    }
    SparseMatrix R(N.n_rows, N.n_cols);
    for (index_t i = 0; i < N.n_rows; ++i) {
        if (owner[i] >= 0) {
            R.col_indices.push_back(owner[i]);
            R.values.push_back(1.0);
        } else {
            for (index_t p = N.row_offsets[i]; p < N.row_offsets[i + 1]; ++p) {
                R.col_indices.push_back(N.col_indices[p]);
                R.values.push_back(N.values[p]);
            }
        }
        R.row_offsets[i + 1] = static_cast<index_t>(R.col_indices.size());
    }
    return R;
}

/// Relax each candidate column toward the near-null space of A (A b = 0),
/// then rescale all columns to unit 2-norm.
inline CandidateSet improve_candidates(const SparseMatrix& A, const CandidateSet& B, int sweeps,
                                       RelaxConfig cfg = {RelaxScheme::gauss_seidel, 0.0, 1},
                                       OpCounter* c = nullptr) {
    if (A.n_rows != A.n_cols || A.n_rows != B.n)
        throw std::invalid_argument("improve_candidates: dimension mismatch");
    if (sweeps < 0) throw std::invalid_argument("improve_candidates: sweeps must be >= 0");
    CandidateSet out = B;
    if (sweeps > 0) {
        cfg.sweeps = sweeps;
        RelaxWorkspace ws = make_relax_workspace(A, cfg, c);
        const std::vector<double> zero(A.n_rows, 0.0);
        for (index_t j = 0; j < out.k; ++j) relax(cfg, A, out.col(j), zero, ws, c);
    }
    normalize_columns(out);
    return out;
}

struct ConstraintDiagnostics {
    std::vector<index_t> inconsistent_rows;  // least-squares fit left a residual
    std::vector<index_t> degenerate_blocks;  // singular root block in the tentative fit
};

namespace detail {

/// Per-row pseudo-inverted Gram matrices of B_c restricted to the allowed
/// columns; shared by the Tproj-style row solves and the null-space projector
/// inside energy minimization.
struct ConstraintWorkspace {
    index_t k = 0;
    std::vector<double> gram_pinv;  // k*k per row, row-major
    std::vector<char> is_root;

    void build(const SparseMatrix& N, const CandidateSet& Bc, const std::vector<index_t>& roots,
               OpCounter* c = nullptr) {
        k = Bc.k;
        is_root.assign(N.n_rows, 0);
        for (index_t r : roots) is_root[r] = 1;
        gram_pinv.assign(static_cast<std::size_t>(N.n_rows) * k * k, 0.0);
        Eigen::MatrixXd G(k, k);
        double ops = 0.0;
        for (index_t i = 0; i < N.n_rows; ++i) {
            if (is_root[i]) continue;
            G.setZero();
            for (index_t j : N.row_cols(i))
                for (index_t a = 0; a < k; ++a)
                    for (index_t b = a; b < k; ++b) G(a, b) += Bc.at(j, a) * Bc.at(j, b);
            for (index_t a = 0; a < k; ++a)
                for (index_t b = 0; b < a; ++b) G(a, b) = G(b, a);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
            const double cutoff = 1e-12 * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
            Eigen::VectorXd inv_ev = es.eigenvalues();
            for (index_t a = 0; a < k; ++a) inv_ev[a] = inv_ev[a] > cutoff ? 1.0 / inv_ev[a] : 0.0;
            Eigen::MatrixXd Gp =
                es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
            for (index_t a = 0; a < k; ++a)
                for (index_t b = 0; b < k; ++b)
                    gram_pinv[(static_cast<std::size_t>(i) * k + a) * k + b] = Gp(a, b);
            ops += static_cast<double>(N.row_nnz(i)) * k * k + static_cast<double>(k) * k * k;
        }
        count(c, ops);
    }

    const double* pinv_row(index_t i) const {
        return gram_pinv.data() + static_cast<std::size_t>(i) * k * k;
    }
};

/// Row-wise null-space projection: subtract from each non-root row of U the
/// component that violates U * B_c = 0; root rows are zeroed outright.
inline void project_to_constraints(const SparseMatrix& N, const CandidateSet& Bc,
                                   const ConstraintWorkspace& ws, std::vector<double>& vals,
                                   OpCounter* c = nullptr) {
    const index_t k = ws.k;
    std::vector<double> y(k), lam(k);
    double ops = 0.0;
    for (index_t i = 0; i < N.n_rows; ++i) {
        const index_t lo = N.row_offsets[i], hi = N.row_offsets[i + 1];
        if (ws.is_root[i]) {
            for (index_t p = lo; p < hi; ++p) vals[p] = 0.0;
            continue;
        }
        std::fill(y.begin(), y.end(), 0.0);
        for (index_t p = lo; p < hi; ++p) {
            const index_t j = N.col_indices[p];
            for (index_t a = 0; a < k; ++a) y[a] += Bc.at(j, a) * vals[p];
        }
        const double* Gp = ws.pinv_row(i);
        for (index_t a = 0; a < k; ++a) {
            double s = 0.0;
            for (index_t b = 0; b < k; ++b) s += Gp[a * k + b] * y[b];
            lam[a] = s;
        }
        for (index_t p = lo; p < hi; ++p) {
            const index_t j = N.col_indices[p];
            double s = 0.0;
            for (index_t a = 0; a < k; ++a) s += Bc.at(j, a) * lam[a];
            vals[p] -= s;
        }
        ops += 2.0 * static_cast<double>(hi - lo) * k + static_cast<double>(k) * k;
    }
    count(c, ops);
}

/// Y = (A * X) restricted to the pattern of N, where X shares N's pattern and
/// is given by its value array. Only in-pattern multiplies are charged.
inline void masked_product(const SparseMatrix& A, const SparseMatrix& N,
                           const std::vector<double>& xvals, std::vector<double>& yvals,
                           std::vector<index_t>& slot, OpCounter* c = nullptr) {
    yvals.assign(N.nnz(), 0.0);
    slot.assign(N.n_cols, -1);
    double ops = 0.0;
    for (index_t i = 0; i < A.n_rows; ++i) {
        const index_t lo = N.row_offsets[i], hi = N.row_offsets[i + 1];
        if (lo == hi) continue;
        for (index_t p = lo; p < hi; ++p) slot[N.col_indices[p]] = p;
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t t = A.col_indices[p];
            const double av = A.values[p];
            for (index_t q = N.row_offsets[t]; q < N.row_offsets[t + 1]; ++q) {
                const index_t s = slot[N.col_indices[q]];
                if (s >= 0) {
                    yvals[s] += av * xvals[q];
                    ops += 1.0;
                }
            }
        }
        for (index_t p = lo; p < hi; ++p) slot[N.col_indices[p]] = -1;
    }
    count(c, ops);
}

/// Scatter T's values into N's pattern; throws if T has an entry outside N.
inline std::vector<double> scatter_into_pattern(const SparseMatrix& T, const SparseMatrix& N) {
    if (T.n_rows != N.n_rows || T.n_cols != N.n_cols)
        throw std::invalid_argument("energy_minimize: T and pattern dimensions differ");
    std::vector<double> vals(N.nnz(), 0.0);
    for (index_t i = 0; i < T.n_rows; ++i) {
        auto ncols = N.row_cols(i);
        for (index_t p = T.row_offsets[i]; p < T.row_offsets[i + 1]; ++p) {
            auto it = std::lower_bound(ncols.begin(), ncols.end(), T.col_indices[p]);
            if (it == ncols.end() || *it != T.col_indices[p])
                throw std::invalid_argument("energy_minimize: T has an entry outside the pattern");
            vals[N.row_offsets[i] + static_cast<index_t>(it - ncols.begin())] = T.values[p];
        }
    }
    return vals;
}

inline SparseMatrix from_pattern_values(const SparseMatrix& N, const std::vector<double>& vals,
                                        index_t block_size) {
    SparseMatrix P(N.n_rows, N.n_cols);
    P.block_size = block_size;
    for (index_t i = 0; i < N.n_rows; ++i) {
        for (index_t p = N.row_offsets[i]; p < N.row_offsets[i + 1]; ++p) {
            if (vals[p] != 0.0) {
                P.col_indices.push_back(N.col_indices[p]);
                P.values.push_back(vals[p]);
            }
        }
        P.row_offsets[i + 1] = static_cast<index_t>(P.col_indices.size());
    }
    return P;
}

/// Largest step length tau so that every column's energy obeys
/// f_j(tau) <= f_j(0) + budget, where f_j(t) = e_j + 2 t g_j + t^2 h_j.
inline double column_safe_step(const std::vector<double>& e, const std::vector<double>& g,
                               const std::vector<double>& h, double cap) {
    double step = cap;
    for (std::size_t j = 0; j < e.size(); ++j) {
        if (h[j] <= 0.0) continue;
        const double norm_j = std::sqrt(std::max(e[j], 0.0));
        const double tol = 2.5e-13 * std::max(norm_j, 1.0e-30);
        const double budget = tol * (2.0 * norm_j + tol);
        const double disc = g[j] * g[j] + h[j] * budget;
        const double beta = (-g[j] + std::sqrt(std::max(disc, 0.0))) / h[j];
        step = std::min(step, beta);
    }
    return step;
}

}  // namespace detail

struct EnergyMinStats {
    int iterations = 0;
    bool breakdown = false;  // stopped on a zero safe step
};

/// Energy-minimizing interpolation. Starting from a tentative operator T that
/// satisfies T * B_c = B exactly, iterate a Krylov process over the space of
/// updates confined to pattern(N), vanishing on root rows, and satisfying
/// U * B_c = 0 row-wise. cg minimizes the column A-energies (SPD A); gmres
/// minimizes the column residuals of A * P in the 2-norm. Constraints and the
/// root-row identity are preserved exactly; with cg every column's energy is
/// non-increasing per iteration (the global step is clipped to the largest
/// per-column safe value, and a zero safe step stops the iteration early).
inline SparseMatrix energy_minimize(const SparseMatrix& A, const SparseMatrix& T,
                                    const CandidateSet& B, const CandidateSet& Bc,
                                    const SparseMatrix& N, const InterpConfig& cfg,
                                    const std::vector<index_t>& roots, OpCounter* c = nullptr,
                                    EnergyMinStats* stats = nullptr) {
    if (A.n_rows != A.n_cols || A.n_rows != N.n_rows || B.n != A.n_rows || Bc.n != N.n_cols ||
        B.k != Bc.k)
        throw std::invalid_argument("energy_minimize: dimension mismatch");
    if (cfg.krylov == KrylovKind::cg && !is_symmetric(A))
        throw std::invalid_argument("energy_minimize: cg requires a symmetric matrix");
    const int iters = effective_energy_iters(cfg);
    const index_t nc = N.n_cols;

    detail::ConstraintWorkspace ws;
    ws.build(N, Bc, roots, c);

    std::vector<double> P = detail::scatter_into_pattern(T, N);
    std::vector<index_t> slot;
    EnergyMinStats local_stats;
    EnergyMinStats& st = stats ? *stats : local_stats;

    if (cfg.krylov == KrylovKind::cg) {
        std::vector<double> dinv = diagonal(A);
        for (std::size_t i = 0; i < dinv.size(); ++i) {
            if (dinv[i] == 0.0)
                throw std::runtime_error("energy_minimize: zero diagonal at row " + std::to_string(i));
            dinv[i] = 1.0 / dinv[i];
        }
        std::vector<double> APm;  // masked A * P, kept current
        detail::masked_product(A, N, P, APm, slot, c);
        std::vector<double> R(APm);
        for (double& v : R) v = -v;
        detail::project_to_constraints(N, Bc, ws, R, c);

        std::vector<double> Z(N.nnz()), Dir(N.nnz(), 0.0), ADm, ADp;
        std::vector<double> e(nc), g(nc), h(nc);
        double oldsum = 0.0, first = -1.0;
        bool restart = true;
        for (int s = 0; s < iters; ++s) {
            for (index_t i = 0; i < N.n_rows; ++i)
                for (index_t p = N.row_offsets[i]; p < N.row_offsets[i + 1]; ++p)
                    Z[p] = dinv[i] * R[p];
            count(c, static_cast<double>(N.nnz()));
            const double newsum = dot(R, Z);
            if (first < 0.0) first = newsum;
            if (!(newsum > 1e-28 * std::max(first, 1.0))) break;
            if (restart) {
                Dir = Z;
            } else {
                const double beta = newsum / oldsum;
                for (std::size_t p = 0; p < Dir.size(); ++p) Dir[p] = Z[p] + beta * Dir[p];
            }
            detail::masked_product(A, N, Dir, ADm, slot, c);
            ADp = ADm;
            detail::project_to_constraints(N, Bc, ws, ADp, c);
            double denom = dot(Dir, ADm);
            count(c, 3.0 * static_cast<double>(N.nnz()));
            if (!(denom > 0.0)) break;
            const double alpha_cg = newsum / denom;
            std::fill(e.begin(), e.end(), 0.0);
            std::fill(g.begin(), g.end(), 0.0);
            std::fill(h.begin(), h.end(), 0.0);
            for (index_t p = 0; p < N.nnz(); ++p) {
                const index_t j = N.col_indices[p];
                e[j] += P[p] * APm[p];
                g[j] += Dir[p] * APm[p];
                h[j] += Dir[p] * ADm[p];
            }
            const double alpha = detail::column_safe_step(e, g, h, alpha_cg);
            if (!(alpha > 1e-14 * alpha_cg)) {
                st.breakdown = true;
                break;
            }
            for (std::size_t p = 0; p < P.size(); ++p) {
                P[p] += alpha * Dir[p];
                APm[p] += alpha * ADm[p];
                R[p] -= alpha * ADp[p];
            }
            count(c, 3.0 * static_cast<double>(N.nnz()));
            restart = alpha < alpha_cg * (1.0 - 1e-12);
            oldsum = newsum;
            st.iterations = s + 1;
        }
        return detail::from_pattern_values(N, P, T.block_size);
    }

    // gmres: Krylov subspace for the A^T A energy. The basis comes from
    // Arnoldi on the projected masked normal operator
    // U -> proj((A^T A U)|_N), which is self-adjoint PSD on the feasible
    // space, so the energy-optimal combination reduces to a small symmetric
    // solve with the Hessenberg matrix.
    const SparseMatrix AtA = matmul(transpose(A), A, c);
    std::vector<double> R0;
    detail::masked_product(AtA, N, P, R0, slot, c);
    for (double& v : R0) v = -v;
    detail::project_to_constraints(N, Bc, ws, R0, c);
    const double beta = norm2(R0);
    count(c, static_cast<double>(N.nnz()));
    if (beta < 1e-300) return detail::from_pattern_values(N, P, T.block_size);

    const int m = iters;
    std::vector<std::vector<double>> V;
    scale(1.0 / beta, R0);
    V.push_back(std::move(R0));
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    int built = 0;
    for (int s = 0; s < m; ++s) {
        std::vector<double> W;
        detail::masked_product(AtA, N, V[s], W, slot, c);
        detail::project_to_constraints(N, Bc, ws, W, c);
        for (int t = 0; t <= s; ++t) {
            const double hts = dot(W, V[t]);
            H(t, s) = hts;
            axpy(-hts, V[t], W);
        }
        count(c, 2.0 * (s + 1) * static_cast<double>(N.nnz()));
        const double hn = norm2(W);
        H(s + 1, s) = hn;
        built = s + 1;
        st.iterations = s + 1;
        if (hn < 1e-14 * beta) break;
        scale(1.0 / hn, W);
        V.push_back(std::move(W));
    }
    // minimize ||A (T + V y)||^2 = const - 2 beta y_1 + y^T H_built y
    Eigen::MatrixXd Hs = H.topLeftCorner(built, built);
    Hs = 0.5 * (Hs + Hs.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hes(Hs);
    Eigen::VectorXd ev = hes.eigenvalues();
    const double cutoff = 1e-14 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(built);
    rhs[0] = beta;
    Eigen::VectorXd z = hes.eigenvectors().transpose() * rhs;
    for (index_t t = 0; t < ev.size(); ++t) z[t] = ev[t] > cutoff ? z[t] / ev[t] : 0.0;
    Eigen::VectorXd y = hes.eigenvectors() * z;
    std::vector<double> U(N.nnz(), 0.0);
    for (int t = 0; t < built && t < static_cast<int>(V.size()); ++t) axpy(y[t], V[t], U);

    // Clip the whole update so no column's ||A p_j|| grows; preserves the
    // row constraints because tau scales rows uniformly.
    SparseMatrix Tcsr = detail::from_pattern_values(N, P, T.block_size);
    SparseMatrix Ucsr = detail::from_pattern_values(N, U, T.block_size);
    SparseMatrix AT = matmul(A, Tcsr, c);
    SparseMatrix AU = matmul(A, Ucsr, c);
    std::vector<double> e(nc, 0.0), g(nc, 0.0), h(nc, 0.0);
    for (index_t i = 0; i < AT.n_rows; ++i)
        for (index_t p = AT.row_offsets[i]; p < AT.row_offsets[i + 1]; ++p)
            e[AT.col_indices[p]] += AT.values[p] * AT.values[p];
    for (index_t i = 0; i < AU.n_rows; ++i) {
        auto tcols = AT.row_cols(i);
        for (index_t p = AU.row_offsets[i]; p < AU.row_offsets[i + 1]; ++p) {
            const index_t j = AU.col_indices[p];
            h[j] += AU.values[p] * AU.values[p];
            auto it = std::lower_bound(tcols.begin(), tcols.end(), j);
            if (it != tcols.end() && *it == j)
                g[j] += AU.values[p] * AT.values[AT.row_offsets[i] + (it - tcols.begin())];
        }
    }
    const double tau = detail::column_safe_step(e, g, h, 1.0);
    if (!(tau > 0.0)) {
        st.breakdown = true;
        return Tcsr;
    }
    for (std::size_t p = 0; p < P.size(); ++p) P[p] += tau * U[p];
    return detail::from_pattern_values(N, P, T.block_size);
}

/// Tentative operator from aggregates: inside each aggregate the first m
/// candidates are reproduced exactly with the columns scaled so the root DOFs
/// carry an m x m identity; coarse candidates are injected values at roots.
/// Extra candidates beyond m are fitted with minimal-norm row updates over
/// the allowed pattern N.
inline std::pair<SparseMatrix, CandidateSet> inject_tentative(const Aggregation& agg,
                                                              const SparseMatrix& N,
                                                              const CandidateSet& B, index_t m,
                                                              ConstraintDiagnostics* diag = nullptr,
                                                              OpCounter* c = nullptr);

/// Minimal 2-norm row updates making P * B_c = B exact where possible; rows
/// whose restricted system is overdetermined get the least-squares fit and are
/// reported. When `allowed` is given the update may use that full pattern.
inline SparseMatrix enforce_constraints(const SparseMatrix& P, const CandidateSet& B,
                                        const CandidateSet& Bc,
                                        const SparseMatrix* allowed = nullptr,
                                        ConstraintDiagnostics* diag = nullptr,
                                        OpCounter* c = nullptr) {
    const SparseMatrix& N = allowed ? *allowed : P;
    if (P.n_rows != N.n_rows || P.n_cols != N.n_cols || B.n != P.n_rows || Bc.n != P.n_cols ||
        B.k != Bc.k)
        throw std::invalid_argument("enforce_constraints: dimension mismatch");
    const index_t k = B.k;
    std::vector<double> vals = detail::scatter_into_pattern(P, N);
    Eigen::MatrixXd G(k, k);
    std::vector<double> y(k), lam(k);
    double ops = 0.0;
    for (index_t i = 0; i < N.n_rows; ++i) {
        const index_t lo = N.row_offsets[i], hi = N.row_offsets[i + 1];
        if (lo == hi) {
            bool want = false;
            for (index_t a = 0; a < k; ++a) want = want || B.at(i, a) != 0.0;
            if (want && diag) diag->inconsistent_rows.push_back(i);
            continue;
        }
        G.setZero();
        std::fill(y.begin(), y.end(), 0.0);
        for (index_t p = lo; p < hi; ++p) {
            const index_t j = N.col_indices[p];
            for (index_t a = 0; a < k; ++a) {
                y[a] += Bc.at(j, a) * vals[p];
                for (index_t b = a; b < k; ++b) G(a, b) += Bc.at(j, a) * Bc.at(j, b);
            }
        }
        for (index_t a = 0; a < k; ++a)
            for (index_t b = 0; b < a; ++b) G(a, b) = G(b, a);
        for (index_t a = 0; a < k; ++a) y[a] = B.at(i, a) - y[a];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        const double cutoff = 1e-12 * std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
        Eigen::VectorXd yv = Eigen::Map<Eigen::VectorXd>(y.data(), k);
        Eigen::VectorXd proj = es.eigenvectors().transpose() * yv;
        double residual = 0.0;
        for (index_t a = 0; a < k; ++a) {
            if (es.eigenvalues()[a] > cutoff)
                proj[a] /= es.eigenvalues()[a];
            else {
                residual = std::max(residual, std::fabs(proj[a]));
                proj[a] = 0.0;
            }
        }
        Eigen::VectorXd lv = es.eigenvectors() * proj;
        for (index_t p = lo; p < hi; ++p) {
            const index_t j = N.col_indices[p];
            double s = 0.0;
            for (index_t a = 0; a < k; ++a) s += Bc.at(j, a) * lv[a];
            vals[p] += s;
        }
        ops += 2.0 * static_cast<double>(hi - lo) * k + static_cast<double>(k) * k * k;
        if (diag) {
            double bscale = 1.0;
            for (index_t a = 0; a < k; ++a) bscale = std::max(bscale, std::fabs(B.at(i, a)));
            if (residual > 1e-10 * bscale) diag->inconsistent_rows.push_back(i);
        }
    }
    count(c, ops);
    return detail::from_pattern_values(N, vals, P.block_size);
}

inline std::pair<SparseMatrix, CandidateSet> inject_tentative(const Aggregation& agg,
                                                              const SparseMatrix& N,
                                                              const CandidateSet& B, index_t m,
                                                              ConstraintDiagnostics* diag,
                                                              OpCounter* c) {
    if (m < 1) throw std::invalid_argument("inject_tentative: block size must be >= 1");
    if (B.n != agg.n_nodes * m) throw std::invalid_argument("inject_tentative: candidate size mismatch");
    if (B.k < m) throw std::invalid_argument("inject_tentative: need at least m candidates");
    const index_t nc = agg.n_agg * m;
    if (N.n_rows != B.n || N.n_cols != nc)
        throw std::invalid_argument("inject_tentative: pattern dimensions mismatch");

    CandidateSet Bc(nc, B.k);
    std::vector<std::vector<std::pair<index_t, double>>> rows(B.n);
    Eigen::MatrixXd Broot(m, m);
    double ops = 0.0;
    for (index_t g = 0; g < agg.n_agg; ++g) {
        const index_t root = agg.roots[g];
        for (index_t r = 0; r < m; ++r)
            for (index_t cc = 0; cc < m; ++cc) Broot(r, cc) = B.at(root * m + r, cc);
        Eigen::MatrixXd Binv;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Broot);
        const double scale_cut = 1e-10 * std::max(Broot.cwiseAbs().maxCoeff(), 1e-300);
        if (lu.rank() == m && Broot.cwiseAbs().maxCoeff() > 0 &&
            std::fabs(lu.determinant()) > std::pow(scale_cut, m)) {
            Binv = lu.inverse();
        } else {
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Broot);
            cod.setThreshold(1e-10);
            Binv = cod.pseudoInverse();
            if (diag) diag->degenerate_blocks.push_back(g);
        }
        for (index_t cc = 0; cc < m; ++cc)
            for (index_t a = 0; a < B.k; ++a) Bc.at(g * m + cc, a) = B.at(root * m + cc, a);
        ops += static_cast<double>(m) * m * m;
        // skip formula on root DOFs: they carry the identity block exactly
        for (index_t i = 0; i < agg.n_nodes; ++i) {
            if (agg.node_to_agg[i] != g) continue;
            for (index_t r = 0; r < m; ++r) {
                const index_t dof = i * m + r;
                if (i == root) {
                    rows[dof].push_back({g * m + r, 1.0});
                    continue;
                }
                for (index_t cc = 0; cc < m; ++cc) {
                    double v = 0.0;
                    for (index_t s = 0; s < m; ++s) v += B.at(dof, s) * Binv(s, cc);
                    if (v != 0.0) rows[dof].push_back({g * m + cc, v});
                }
                ops += static_cast<double>(m) * m;
            }
        }
    }
    count(c, ops);
    SparseMatrix T = from_rows(nc, std::move(rows));
    T.block_size = m;
    if (B.k > m) T = enforce_constraints(T, B, Bc, &N, diag, c);
    return {std::move(T), std::move(Bc)};
}

namespace detail {

inline index_t span_rank(const std::vector<std::pair<index_t, double>>& row,
                         const CandidateSet& Bc) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(row.size()), Bc.k);
    for (std::size_t r = 0; r < row.size(); ++r)
        for (index_t a = 0; a < Bc.k; ++a) M(static_cast<Eigen::Index>(r), a) = Bc.at(row[r].first, a);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    // Count only well-conditioned directions: a barely independent column
    // would pass a rank test yet leave the Gram solve ill-conditioned.
    qr.setThreshold(1e-3);
    return static_cast<index_t>(qr.rank());
}

}  // namespace detail

/// Re-add the largest-magnitude dropped entries per row until every row of
/// `filtered` holds min_cols entries again (or the whole original row, if it
/// was smaller). A row below this floor cannot satisfy its k constraints, so
/// filtering must not push support under it; this also keeps root-node
/// identity rows intact since those never exceed the floor. When Bc is given
/// the floor is on the rank of the coarse-candidate rows spanned by the
/// support, not just the count: duplicate Bc rows (mirror-symmetric roots)
/// would otherwise leave the row constraints unsatisfiable.
inline SparseMatrix ensure_min_support(const SparseMatrix& filtered, const SparseMatrix& full,
                                       index_t min_cols, const CandidateSet* Bc = nullptr) {
    if (filtered.n_rows != full.n_rows || filtered.n_cols != full.n_cols)
        throw std::invalid_argument("ensure_min_support: shape mismatch");
    std::vector<std::vector<std::pair<index_t, double>>> rows(
        static_cast<std::size_t>(filtered.n_rows));
    std::vector<std::pair<double, std::pair<index_t, double>>> cand;
    for (index_t i = 0; i < filtered.n_rows; ++i) {
        auto& out = rows[static_cast<std::size_t>(i)];
        for (index_t p = filtered.row_offsets[i]; p < filtered.row_offsets[i + 1]; ++p)
            out.push_back({filtered.col_indices[p], filtered.values[p]});
        const index_t have = filtered.row_nnz(i);
        const index_t target = std::min<index_t>(min_cols, full.row_nnz(i));
        const bool short_rank =
            Bc && have >= target && full.row_nnz(i) > have && detail::span_rank(out, *Bc) < min_cols;
        if (have >= target && !short_rank) continue;
        cand.clear();
        for (index_t p = full.row_offsets[i]; p < full.row_offsets[i + 1]; ++p) {
            const index_t j = full.col_indices[p];
            bool present = false;
            for (const auto& e : out) present = present || e.first == j;
            if (!present && full.values[p] != 0.0)
                cand.push_back({std::fabs(full.values[p]), {j, full.values[p]}});
        }
        std::sort(cand.begin(), cand.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        std::size_t t = 0;
        for (; t < cand.size() && static_cast<index_t>(out.size()) < target; ++t)
            out.push_back(cand[t].second);
        if (Bc)
            for (; t < cand.size() && detail::span_rank(out, *Bc) < min_cols; ++t)
                out.push_back(cand[t].second);
    }
    SparseMatrix R = from_rows(filtered.n_cols, std::move(rows));
    R.block_size = filtered.block_size;
    return R;
}

/// Post-filter pipeline: drop small interpolation entries, restore the
/// constraints with minimal-norm row updates, then apply exactly one energy
/// minimization iteration on the reduced pattern.
inline SparseMatrix postfilter_pipeline(const SparseMatrix& A, const SparseMatrix& P,
                                        const CandidateSet& B, const CandidateSet& Bc,
                                        const FilterRule& rule, const InterpConfig& cfg,
                                        const std::vector<index_t>& roots, OpCounter* c = nullptr,
                                        ConstraintDiagnostics* diag = nullptr) {
    SparseMatrix Pf = filter_matrix(P, rule.theta, rule.k);
    Pf = ensure_min_support(Pf, P, B.k, &Bc);
    Pf = enforce_constraints(Pf, B, Bc, nullptr, diag, c);
    InterpConfig one = cfg;
    one.energy_iters = 1;
    return energy_minimize(A, Pf, B, Bc, Pf, one, roots, c);
}

}  // namespace amg
