// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "amg/aggregation.hpp"
#include "amg/core/dense.hpp"
#include "amg/core/sparse.hpp"
#include "amg/core/spectral.hpp"
#include "amg/core/work.hpp"
#include "amg/interpolation.hpp"
#include "amg/relaxation.hpp"
#include "amg/strength.hpp"

namespace amg {

enum class SetupMethod { rn, sa, cf };

struct SetupOptions {
    SetupMethod method = SetupMethod::rn;
    StrengthConfig strength;
    InterpConfig interp;
    RelaxConfig pre_relax{RelaxScheme::sym_gauss_seidel, 0.0, 1};
    RelaxConfig post_relax{RelaxScheme::sym_gauss_seidel, 0.0, 1};
    index_t max_size = 20;  // coarsest-level size threshold
    int max_levels = 25;
    int candidate_sweeps = 4;  // candidate improvement sweeps per level
    RelaxConfig candidate_relax{RelaxScheme::gauss_seidel, 0.0, 1};
};

struct Level {
    SparseMatrix A;
    SparseMatrix P;  // to the next coarser level; empty on the coarsest
    SparseMatrix R;
    CandidateSet B{0, 1};   // candidates this level's P reproduces
    CandidateSet Bc{0, 1};  // coarse-side targets of P: P * Bc = B exactly.
                            // The next level improves its own copy in place,
                            // so Bc here keeps the injected values P was
                            // built against. Empty on the coarsest level.
    bool symmetric = true;
};

namespace detail {

/// Dense rank-revealing factorization of the coarsest operator. Handles
/// singular matrices (pure Neumann problems) by the minimal-norm solution.
struct CoarseSolver {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    index_t n = 0;
    bool ready = false;

    void factor(const SparseMatrix& A, OpCounter* c = nullptr) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.n_rows, A.n_cols);
        for (index_t i = 0; i < A.n_rows; ++i)
            for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
                D(i, A.col_indices[p]) = A.values[p];
        cod.compute(D);
        n = A.n_rows;
        ready = true;
        count(c, static_cast<double>(n) * n * n);
    }

    void solve(std::span<const double> b, std::span<double> x) const {
        if (!ready) throw std::logic_error("CoarseSolver: factor() not called");
        Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
        Eigen::VectorXd xv = cod.solve(bv);
        std::copy(xv.data(), xv.data() + n, x.begin());
    }
};

}  // namespace detail

struct Hierarchy {
    std::vector<Level> levels;
    SetupOptions options;
    WorkLedger ledger;
    detail::CoarseSolver coarse;
    std::vector<RelaxWorkspace> pre_ws, post_ws;  // one per non-coarsest level
    bool stagnated = false;  // coarsening stopped above max_size

    int n_levels() const { return static_cast<int>(levels.size()); }
    const SparseMatrix& finest() const { return levels.front().A; }
    const SparseMatrix& coarsest() const { return levels.back().A; }
};

namespace detail {

/// Make sure every node keeps the column of its own aggregate: prefiltering
/// on accumulated strengths may drop it, which would put tentative entries
/// outside the allowed pattern.
inline SparseMatrix add_aggregate_entries(const SparseMatrix& N, const Aggregation& agg) {
    std::vector<Triplet> extra;
    for (index_t i = 0; i < N.n_rows; ++i) {
        const index_t g = agg.node_to_agg[i];
        auto cols = N.row_cols(i);
        if (!std::binary_search(cols.begin(), cols.end(), g)) extra.push_back({i, g, 1.0});
    }
    if (extra.empty()) return N;
    for (index_t i = 0; i < N.n_rows; ++i)
        for (index_t p = N.row_offsets[i]; p < N.row_offsets[i + 1]; ++p)
            extra.push_back({i, N.col_indices[p], N.values[p]});
    return from_triplets(N.n_rows, N.n_cols, std::move(extra));
}

/// A non-root node whose pattern row spans fewer than min_aggs aggregates
/// cannot satisfy all k row constraints after unamalgamation (each aggregate
/// contributes m columns). Grow such rows breadth-first through the strength
/// graph until enough distinct aggregates are reachable; corner nodes whose
/// whole S^d neighbourhood sits inside one aggregate need this even without
/// prefiltering.
inline SparseMatrix widen_deficient_rows(const SparseMatrix& N, const SparseMatrix& S,
                                         const Aggregation& agg, index_t min_aggs) {
    if (min_aggs <= 1) return N;
    const SparseMatrix St = transpose(S);
    std::vector<Triplet> extra;
    std::vector<index_t> frontier, next;
    std::vector<char> seen(static_cast<std::size_t>(agg.n_nodes));
    for (index_t i = 0; i < N.n_rows; ++i) {
        std::set<index_t> aggs(N.row_cols(i).begin(), N.row_cols(i).end());
        if (static_cast<index_t>(aggs.size()) >= min_aggs) continue;
        std::fill(seen.begin(), seen.end(), 0);
        seen[static_cast<std::size_t>(i)] = 1;
        frontier.assign(1, i);
        while (!frontier.empty() && static_cast<index_t>(aggs.size()) < min_aggs) {
            next.clear();
            for (index_t u : frontier) {
                for (const SparseMatrix* M : {&S, &St})
                    for (index_t j : M->row_cols(u)) {
                        if (seen[static_cast<std::size_t>(j)]) continue;
                        seen[static_cast<std::size_t>(j)] = 1;
                        next.push_back(j);
                        aggs.insert(agg.node_to_agg[j]);
                    }
            }
            frontier.swap(next);
        }
        for (index_t g : aggs) {
            auto cols = N.row_cols(i);
            if (!std::binary_search(cols.begin(), cols.end(), g)) extra.push_back({i, g, 1.0});
        }
    }
    if (extra.empty()) return N;
    for (index_t i = 0; i < N.n_rows; ++i)
        for (index_t p = N.row_offsets[i]; p < N.row_offsets[i + 1]; ++p)
            extra.push_back({i, N.col_indices[p], N.values[p]});
    return from_triplets(N.n_rows, N.n_cols, std::move(extra));
}

inline void charge_buckets(WorkLedger& ledger, const OpCounter& agg, const OpCounter& cand,
                           const OpCounter& interp, const OpCounter& rap) {
    ledger.charge(WorkBucket::aggregation, agg.ops);
    ledger.charge(WorkBucket::candidates, cand.ops);
    ledger.charge(WorkBucket::interp, interp.ops);
    ledger.charge(WorkBucket::rap, rap.ops);
}

inline void finalize_hierarchy(Hierarchy& h) {
    OpCounter c;
    for (int l = 0; l + 1 < h.n_levels(); ++l) {
        h.pre_ws.push_back(make_relax_workspace(h.levels[l].A, h.options.pre_relax, &c));
        h.post_ws.push_back(make_relax_workspace(h.levels[l].A, h.options.post_relax, &c));
    }
    h.coarse.factor(h.levels.back().A, &c);
    h.ledger.charge(WorkBucket::solve_other, c.ops);
}

struct CoarsenResult {
    SparseMatrix P, R, A_coarse;
    CandidateSet B_fine{0, 1}, B_coarse{0, 1};
    CandidateSet Bhat_fine{0, 1}, Bhat_coarse{0, 1};
};

/// One root-node coarsening pass (strength, aggregation, pattern, tentative,
/// energy minimization, Galerkin product). Returns nothing when aggregation
/// makes no progress, which terminates the hierarchy early.
inline std::optional<CoarsenResult> rn_coarsen_once(const SparseMatrix& A, const CandidateSet& B,
                                                    const CandidateSet& Bhat, bool symmetric,
                                                    const SetupOptions& opts, WorkLedger& ledger) {
    OpCounter cagg, ccand, cinterp, crap;
    const index_t m = std::max<index_t>(1, A.block_size);

    SparseMatrix Snorm = normalize_strength(amalgamate(strength(A, opts.strength, &cagg), m), &cagg);
    Aggregation agg = greedy_aggregate(Snorm);
    count(&cagg, static_cast<double>(Snorm.nnz()));
    if (agg.n_agg >= agg.n_nodes) return std::nullopt;

    SparseMatrix N = sparsity_pattern(Snorm, agg.pattern, opts.interp.degree, &cinterp);
    // Each node row must span enough aggregates to satisfy all k row
    // constraints once unamalgamated (m pattern columns per aggregate).
    const index_t min_aggs = (B.k + m - 1) / m;
    if (opts.interp.prefilter) {
        SparseMatrix N0 = N;
        N = filter_matrix(N, opts.interp.prefilter->theta, opts.interp.prefilter->k);
        N = add_aggregate_entries(N, agg);
        N = ensure_min_support(N, N0, min_aggs);
    }
    N = widen_deficient_rows(N, Snorm, agg, min_aggs);
    auto [Ndof, roots_dof] = unamalgamate(N, agg.roots, m);
    Ndof = root_node_pattern(Ndof, roots_dof);

    CandidateSet Bimp = improve_candidates(A, B, opts.candidate_sweeps, opts.candidate_relax, &ccand);
    auto [T, Bc] = inject_tentative(agg, Ndof, Bimp, m, nullptr, &cinterp);

    InterpConfig icfg = opts.interp;
    if (!symmetric && icfg.krylov == KrylovKind::cg) icfg.krylov = KrylovKind::gmres;
    SparseMatrix P = energy_minimize(A, T, Bimp, Bc, Ndof, icfg, roots_dof, &cinterp);
    if (opts.interp.postfilter)
        P = postfilter_pipeline(A, P, Bimp, Bc, *opts.interp.postfilter, icfg, roots_dof, &cinterp);

    CoarsenResult out;
    if (symmetric) {
        out.R = transpose(P);
        out.Bhat_fine = Bimp;
        out.Bhat_coarse = Bc;
    } else {
        // Nonsymmetric operators get a separate restriction built from the
        // left candidates on the transposed matrix, over the same pattern.
        SparseMatrix At = transpose(A);
        CandidateSet Bhimp =
            improve_candidates(At, Bhat, opts.candidate_sweeps, opts.candidate_relax, &ccand);
        auto [That, Bhc] = inject_tentative(agg, Ndof, Bhimp, m, nullptr, &cinterp);
        InterpConfig rcfg = icfg;
        rcfg.krylov = KrylovKind::gmres;
        SparseMatrix Rt = energy_minimize(At, That, Bhimp, Bhc, Ndof, rcfg, roots_dof, &cinterp);
        if (opts.interp.postfilter)
            Rt = postfilter_pipeline(At, Rt, Bhimp, Bhc, *opts.interp.postfilter, rcfg, roots_dof,
                                     &cinterp);
        out.R = transpose(Rt);
        out.Bhat_fine = Bhimp;
        out.Bhat_coarse = Bhc;
    }
    out.A_coarse = galerkin_product(out.R, A, P, &crap);
    out.P = std::move(P);
    out.B_fine = std::move(Bimp);
    out.B_coarse = std::move(Bc);
    charge_buckets(ledger, cagg, ccand, cinterp, crap);
    return out;
}

}  // namespace detail

/// Root-node setup. Candidates are improved per level, reproduced exactly by
/// each energy-minimized P, and injected at roots to form the coarse set.
/// Optional left candidates drive the restriction on nonsymmetric levels.
inline Hierarchy rn_setup(const SparseMatrix& A, const CandidateSet& B, const SetupOptions& opts,
                          const CandidateSet* left_candidates = nullptr) {
    if (A.n_rows != A.n_cols || A.n_rows == 0) throw std::invalid_argument("rn_setup: square nonempty matrix required");
    if (B.n != A.n_rows) throw std::invalid_argument("rn_setup: candidate size mismatch");
    const index_t m = std::max<index_t>(1, A.block_size);
    if (A.n_rows % m != 0) throw std::invalid_argument("rn_setup: block size must divide the dimension");
    if (B.k < m) throw std::invalid_argument("rn_setup: need at least block_size candidates");
    if (left_candidates && (left_candidates->n != B.n || left_candidates->k != B.k))
        throw std::invalid_argument("rn_setup: left candidate shape mismatch");

    Hierarchy h;
    h.options = opts;
    h.ledger.register_base(A.nnz());
    h.levels.push_back({.A = A, .B = B, .symmetric = is_symmetric(A)});
    CandidateSet Bhat = left_candidates ? *left_candidates : B;

    while (h.n_levels() < opts.max_levels &&
           h.levels.back().A.n_rows > opts.max_size) {
        Level& fine = h.levels.back();
        auto step = detail::rn_coarsen_once(fine.A, fine.B, Bhat, fine.symmetric, opts, h.ledger);
        if (!step) {
            h.stagnated = true;
            break;
        }
        fine.P = std::move(step->P);
        fine.R = std::move(step->R);
        fine.B = std::move(step->B_fine);
        fine.Bc = step->B_coarse;
        Bhat = std::move(step->Bhat_coarse);
        const bool sym = is_symmetric(step->A_coarse);
        h.levels.push_back(
            {.A = std::move(step->A_coarse), .B = std::move(step->B_coarse), .symmetric = sym});
    }
    detail::finalize_hierarchy(h);
    return h;
}

namespace detail {

/// Tentative prolongator by per-aggregate QR of the candidate block. Coarse
/// DOFs come k per aggregate; R factors (diagonal signs made non-negative)
/// become the coarse candidates.
inline std::pair<SparseMatrix, CandidateSet> qr_tentative(const Aggregation& agg,
                                                          const CandidateSet& B, index_t m,
                                                          OpCounter* c = nullptr) {
    const index_t k = B.k;
    const index_t nc = agg.n_agg * k;
    std::vector<std::vector<index_t>> members(agg.n_agg);
    for (index_t i = 0; i < agg.n_nodes; ++i) members[agg.node_to_agg[i]].push_back(i);

    std::vector<std::vector<std::pair<index_t, double>>> rows(B.n);
    CandidateSet Bc(nc, k);
    double ops = 0.0;
    for (index_t g = 0; g < agg.n_agg; ++g) {
        const index_t nd = static_cast<index_t>(members[g].size()) * m;
        Eigen::MatrixXd M(nd, k);
        for (index_t t = 0; t < static_cast<index_t>(members[g].size()); ++t)
            for (index_t r = 0; r < m; ++r)
                for (index_t a = 0; a < k; ++a) M(t * m + r, a) = B.at(members[g][t] * m + r, a);
        const index_t rk = std::min(nd, k);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
        Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(nd, rk);
        Eigen::MatrixXd Rf = qr.matrixQR().topLeftCorner(rk, k).triangularView<Eigen::Upper>();
        for (index_t cix = 0; cix < rk; ++cix) {
            if (Rf(cix, cix) < 0.0) {
                Q.col(cix) = -Q.col(cix);
                Rf.row(cix) = -Rf.row(cix);
            }
        }
        for (index_t t = 0; t < static_cast<index_t>(members[g].size()); ++t)
            for (index_t r = 0; r < m; ++r)
                for (index_t cix = 0; cix < rk; ++cix) {
                    const double v = Q(t * m + r, cix);
                    if (v != 0.0) rows[members[g][t] * m + r].push_back({g * k + cix, v});
                }
        for (index_t cix = 0; cix < rk; ++cix)
            for (index_t a = 0; a < k; ++a) Bc.at(g * k + cix, a) = Rf(cix, a);
        ops += static_cast<double>(nd) * k * k;
    }
    count(c, ops);
    SparseMatrix T = from_rows(nc, std::move(rows));
    T.block_size = k;
    return {std::move(T), std::move(Bc)};
}

}  // namespace detail

/// Smoothed-aggregation setup: per-aggregate QR tentative, then s steps of
/// weighted-Jacobi smoothing P <- (I - omega D^-1 A) P with omega = 4/(3 rho).
/// s comes from interp.energy_iters (default 1). Included as the comparison
/// baseline; restriction is always the transpose.
inline Hierarchy sa_setup(const SparseMatrix& A, const CandidateSet& B, const SetupOptions& opts) {
    if (A.n_rows != A.n_cols || A.n_rows == 0) throw std::invalid_argument("sa_setup: square nonempty matrix required");
    if (B.n != A.n_rows) throw std::invalid_argument("sa_setup: candidate size mismatch");

    Hierarchy h;
    h.options = opts;
    h.ledger.register_base(A.nnz());
    h.levels.push_back({.A = A, .B = B, .symmetric = is_symmetric(A)});

    const int smooth_steps = opts.interp.energy_iters > 0 ? opts.interp.energy_iters : 1;
    while (h.n_levels() < opts.max_levels && h.levels.back().A.n_rows > opts.max_size) {
        Level& fine = h.levels.back();
        const SparseMatrix& Af = fine.A;
        const index_t m = std::max<index_t>(1, Af.block_size);
        OpCounter cagg, ccand, cinterp, crap;

        SparseMatrix Snorm =
            normalize_strength(amalgamate(strength(Af, opts.strength, &cagg), m), &cagg);
        Aggregation agg = greedy_aggregate(Snorm);
        count(&cagg, static_cast<double>(Snorm.nnz()));
        if (agg.n_agg >= agg.n_nodes || agg.n_agg * fine.B.k >= Af.n_rows) {
            h.stagnated = true;
            break;
        }

        CandidateSet Bimp = improve_candidates(Af, fine.B, opts.candidate_sweeps, opts.candidate_relax, &ccand);
        auto [T, Bc] = detail::qr_tentative(agg, Bimp, m, &cinterp);

        std::vector<double> dinv = diagonal(Af);
        for (std::size_t i = 0; i < dinv.size(); ++i) {
            if (dinv[i] == 0.0) throw std::runtime_error("sa_setup: zero diagonal");
            dinv[i] = 1.0 / dinv[i];
        }
        const double omega = 4.0 / (3.0 * spectral_radius_estimate(Af, 15, &cinterp));
        SparseMatrix P = std::move(T);
        for (int s = 0; s < smooth_steps; ++s) {
            SparseMatrix AP = matmul(Af, P, &cinterp);
            for (index_t i = 0; i < AP.n_rows; ++i)
                for (index_t p = AP.row_offsets[i]; p < AP.row_offsets[i + 1]; ++p)
                    AP.values[p] *= omega * dinv[i];
            count(&cinterp, static_cast<double>(AP.nnz()));
            std::vector<Triplet> trips;
            trips.reserve(P.nnz() + AP.nnz());
            for (index_t i = 0; i < P.n_rows; ++i)
                for (index_t p = P.row_offsets[i]; p < P.row_offsets[i + 1]; ++p)
                    trips.push_back({i, P.col_indices[p], P.values[p]});
            for (index_t i = 0; i < AP.n_rows; ++i)
                for (index_t p = AP.row_offsets[i]; p < AP.row_offsets[i + 1]; ++p)
                    trips.push_back({i, AP.col_indices[p], -AP.values[p]});
            index_t bs = P.block_size;
            P = from_triplets(P.n_rows, P.n_cols, std::move(trips));
            P.block_size = bs;
        }

        fine.P = P;
        fine.R = transpose(P);
        fine.B = std::move(Bimp);
        fine.Bc = Bc;
        SparseMatrix Ac = galerkin_product(fine.R, Af, fine.P, &crap);
        detail::charge_buckets(h.ledger, cagg, ccand, cinterp, crap);
        const bool sym = is_symmetric(Ac);
        h.levels.push_back({.A = std::move(Ac), .B = std::move(Bc), .symmetric = sym});
    }
    detail::finalize_hierarchy(h);
    return h;
}

/// Ruge-Stueben first-pass C/F splitting on a classical strength matrix,
/// followed by a repair pass that promotes F points with no strong C
/// neighbour. Returns 1 for C points and 0 for F points.
inline std::vector<int> rs_split(const SparseMatrix& S) {
    if (S.n_rows != S.n_cols) throw std::invalid_argument("rs_split: square matrix required");
    const index_t n = S.n_rows;
    SparseMatrix St = transpose(S);  // row i of St: points strongly depending on i
    std::vector<double> lambda(n, 0.0);
    for (index_t i = 0; i < n; ++i)
        for (index_t j : St.row_cols(i))
            if (j != i) lambda[i] += 1.0;

    constexpr int kUnset = -1, kF = 0, kC = 1;
    std::vector<int> state(n, kUnset);
    index_t remaining = n;
    while (remaining > 0) {
        index_t best = -1;
        double best_lambda = -1.0;
        for (index_t i = 0; i < n; ++i)
            if (state[i] == kUnset && lambda[i] > best_lambda) {
                best_lambda = lambda[i];
                best = i;
            }
        state[best] = kC;
        --remaining;
        for (index_t j : St.row_cols(best)) {
            if (j == best || state[j] != kUnset) continue;
            state[j] = kF;
            --remaining;
            for (index_t k : S.row_cols(j))
                if (k != j && state[k] == kUnset) lambda[k] += 1.0;
        }
        for (index_t j : S.row_cols(best))
            if (j != best && state[j] == kUnset) lambda[j] -= 1.0;
    }
    for (index_t i = 0; i < n; ++i) {
        if (state[i] != kF) continue;
        bool has_c = false;
        for (index_t j : S.row_cols(i)) has_c = has_c || (j != i && state[j] == kC);
        if (!has_c) state[i] = kC;
    }
    return state;
}

/// Classical direct interpolation. F rows distribute the full negative and
/// positive row sums over the strong C neighbours of matching sign; C rows
/// are identity. Returns P and the fine-to-coarse index map (-1 on F points).
inline std::pair<SparseMatrix, std::vector<index_t>> direct_interpolation(
    const SparseMatrix& A, const SparseMatrix& S, const std::vector<int>& splitting,
    OpCounter* c = nullptr) {
    if (A.n_rows != A.n_cols || S.n_rows != A.n_rows || splitting.size() != static_cast<std::size_t>(A.n_rows))
        throw std::invalid_argument("direct_interpolation: dimension mismatch");
    const index_t n = A.n_rows;
    std::vector<index_t> cmap(n, -1);
    index_t nc = 0;
    for (index_t i = 0; i < n; ++i)
        if (splitting[i] == 1) cmap[i] = nc++;
    if (nc == 0) throw std::invalid_argument("direct_interpolation: empty coarse set");

    std::vector<std::vector<std::pair<index_t, double>>> rows(n);
    double ops = 0.0;
    for (index_t i = 0; i < n; ++i) {
        if (splitting[i] == 1) {
            rows[i].push_back({cmap[i], 1.0});
            continue;
        }
        double sum_neg = 0.0, sum_pos = 0.0, strong_neg = 0.0, strong_pos = 0.0, diag = 0.0;
        auto scols = S.row_cols(i);
        auto is_strong_c = [&](index_t j) {
            return j != i && splitting[j] == 1 && std::binary_search(scols.begin(), scols.end(), j);
        };
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t j = A.col_indices[p];
            const double v = A.values[p];
            if (j == i) {
                diag = v;
                continue;
            }
            (v < 0.0 ? sum_neg : sum_pos) += v;
            if (is_strong_c(j)) (v < 0.0 ? strong_neg : strong_pos) += v;
        }
        if (diag == 0.0) throw std::runtime_error("direct_interpolation: zero diagonal");
        const double alpha = strong_neg != 0.0 ? sum_neg / strong_neg : 0.0;
        const double beta = strong_pos != 0.0 ? sum_pos / strong_pos : 0.0;
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t j = A.col_indices[p];
            const double v = A.values[p];
            if (j == i || !is_strong_c(j)) continue;
            const double w = -(v < 0.0 ? alpha : beta) * v / diag;
            if (w != 0.0) rows[i].push_back({cmap[j], w});
            ops += 2.0;
        }
    }
    count(c, ops);
    return {from_rows(nc, std::move(rows)), std::move(cmap)};
}

/// Classical Ruge-Stueben setup with direct interpolation and R = P^T.
/// Scalar problems only. Coarse candidates are injected at C points.
inline Hierarchy cf_setup(const SparseMatrix& A, const CandidateSet& B, const SetupOptions& opts) {
    if (A.n_rows != A.n_cols || A.n_rows == 0) throw std::invalid_argument("cf_setup: square nonempty matrix required");
    if (std::max<index_t>(1, A.block_size) != 1)
        throw std::invalid_argument("cf_setup: scalar problems only");
    if (B.n != A.n_rows) throw std::invalid_argument("cf_setup: candidate size mismatch");

    Hierarchy h;
    h.options = opts;
    h.ledger.register_base(A.nnz());
    h.levels.push_back({.A = A, .B = B, .symmetric = is_symmetric(A)});
    while (h.n_levels() < opts.max_levels && h.levels.back().A.n_rows > opts.max_size) {
        Level& fine = h.levels.back();
        OpCounter cagg, ccand, cinterp, crap;
        const double theta = opts.strength.measure == StrengthMeasure::classical
                                 ? opts.strength.drop_tol
                                 : 0.25;
        SparseMatrix S = classical_strength(fine.A, theta, &cagg);
        std::vector<int> split = rs_split(S);
        count(&cagg, static_cast<double>(S.nnz()));
        auto [P, cmap] = direct_interpolation(fine.A, S, split, &cinterp);
        if (P.n_cols >= fine.A.n_rows) {
            h.stagnated = true;
            break;
        }

        CandidateSet Bc(P.n_cols, fine.B.k);
        for (index_t i = 0; i < fine.A.n_rows; ++i)
            if (cmap[i] >= 0)
                for (index_t a = 0; a < fine.B.k; ++a) Bc.at(cmap[i], a) = fine.B.at(i, a);
        fine.P = std::move(P);
        fine.R = transpose(fine.P);
        fine.Bc = Bc;
        SparseMatrix Ac = galerkin_product(fine.R, fine.A, fine.P, &crap);
        detail::charge_buckets(h.ledger, cagg, ccand, cinterp, crap);
        const bool sym = is_symmetric(Ac);
        h.levels.push_back({.A = std::move(Ac), .B = std::move(Bc), .symmetric = sym});
    }
    detail::finalize_hierarchy(h);
    return h;
}

/// Dispatch on opts.method.
inline Hierarchy setup(const SparseMatrix& A, const CandidateSet& B, const SetupOptions& opts,
                       const CandidateSet* left_candidates = nullptr) {
    switch (opts.method) {
        case SetupMethod::rn: return rn_setup(A, B, opts, left_candidates);
        case SetupMethod::sa: return sa_setup(A, B, opts);
        case SetupMethod::cf: return cf_setup(A, B, opts);
    }
    throw std::invalid_argument("setup: unknown method");
}

}  // namespace amg
