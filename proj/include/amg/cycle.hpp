// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "amg/complexity.hpp"
#include "amg/hierarchy.hpp"

namespace amg {

enum class CycleKind { V, W };
enum class SolveMethod { stationary, pcg, fgmres };

struct SolveOptions {
    SolveMethod method = SolveMethod::stationary;
    CycleKind cycle = CycleKind::V;
    double tol = 1e-8;  // on ||r|| / ||b|| (or ||r0|| when b = 0)
    int max_iters = 100;
};

struct SolveReport {
    std::vector<double> residual_history;  // starts with the initial residual
    int iterations = 0;
    bool converged = false;
    bool diverged = false;
    double rho = 0.0;  // geometric-mean residual reduction near the end
    double chi_oc = 0.0;
    double chi_cc = 0.0;
    double work_units_solve = 0.0;  // modelled cycle + Krylov matvec work / |A_0|
    double work_units_setup = 0.0;
};

/// Geometric mean of the last min(window, n-1) residual ratios.
inline double convergence_factor(const std::vector<double>& hist, int window = 5) {
    if (hist.size() < 2) return 0.0;
    const int w = std::min<int>(window, static_cast<int>(hist.size()) - 1);
    const double head = hist[hist.size() - 1 - w];
    const double tail = hist.back();
    if (head <= 0.0) return 0.0;
    return std::pow(tail / head, 1.0 / w);
}

namespace detail {

struct CycleScratch {
    std::vector<std::vector<double>> r, bc, xc;

    explicit CycleScratch(const Hierarchy& h) {
        const int L = h.n_levels();
        r.resize(L);
        bc.resize(L);
        xc.resize(L);
        for (int l = 0; l < L; ++l) {
            r[l].resize(h.levels[l].A.n_rows);
            bc[l].resize(h.levels[l].A.n_rows);
            xc[l].resize(h.levels[l].A.n_rows);
        }
    }
};

/// One multigrid cycle at `level`. Work is charged by the cost model: one
/// sweep or residual on A_l costs |A_l| (gsne sweeps 2|A_l|), transfers cost
/// |P_l| and |R_l|, the coarsest direct solve and all vector updates are
/// free. Matches cycle_complexity() exactly for V(pre, post).
inline void cycle_apply(Hierarchy& h, int level, std::span<double> x, std::span<const double> b,
                        CycleKind kind, CycleScratch& s, OpCounter* c) {
    if (level == h.n_levels() - 1) {
        h.coarse.solve(b, x);
        return;
    }
    Level& lev = h.levels[level];
    relax(h.options.pre_relax, lev.A, x, b, h.pre_ws[level], c);

    std::vector<double>& r = s.r[level];
    spmv(lev.A, x, r, c);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];

    const index_t nc = lev.P.n_cols;
    std::span<double> bc(s.bc[level + 1].data(), nc);
    std::span<double> xc(s.xc[level + 1].data(), nc);
    spmv(lev.R, r, bc, c);
    std::fill(xc.begin(), xc.end(), 0.0);
    cycle_apply(h, level + 1, xc, bc, kind, s, c);
    if (kind == CycleKind::W && level + 1 < h.n_levels() - 1)
        cycle_apply(h, level + 1, xc, bc, kind, s, c);

    spmv(lev.P, xc, std::span<double>(r), c);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += r[i];
    relax(h.options.post_relax, lev.A, x, b, h.post_ws[level], c);
}

}  // namespace detail

/// Apply one cycle to A x = b starting from the given x (in place).
inline void cycle(Hierarchy& h, std::span<double> x, std::span<const double> b,
                  CycleKind kind = CycleKind::V, OpCounter* c = nullptr) {
    if (static_cast<index_t>(x.size()) != h.finest().n_rows ||
        static_cast<index_t>(b.size()) != h.finest().n_rows)
        throw std::invalid_argument("cycle: size mismatch");
    detail::CycleScratch s(h);
    detail::cycle_apply(h, 0, x, b, kind, s, c);
}

/// Multigrid solve: stationary cycling, PCG with one cycle as the
/// preconditioner, or flexible GMRES (restart length = max_iters).
/// Stops when ||r|| <= tol * ||b||, aborts when the residual exceeds 1e6
/// times the initial one. Convergence-monitoring residuals are not charged
/// as work; Krylov matvecs and the initial residual are.
inline SolveReport solve(Hierarchy& h, std::span<const double> b, std::vector<double>& x,
                         const SolveOptions& opts = {}) {
    const SparseMatrix& A = h.finest();
    const index_t n = A.n_rows;
    if (static_cast<index_t>(b.size()) != n) throw std::invalid_argument("solve: rhs size mismatch");
    if (x.empty()) x.assign(n, 0.0);
    if (static_cast<index_t>(x.size()) != n) throw std::invalid_argument("solve: guess size mismatch");
    if (opts.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");

    SolveReport rep;
    rep.chi_oc = operator_complexity(h);
    rep.chi_cc = cycle_complexity(h);
    rep.work_units_setup = h.ledger.setup_total();

    OpCounter sc;
    detail::CycleScratch scratch(h);
    auto precond = [&](std::span<const double> rhs, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        detail::cycle_apply(h, 0, out, rhs, opts.cycle, scratch, &sc);
    };
    auto finish = [&]() {
        rep.rho = convergence_factor(rep.residual_history);
        rep.work_units_solve = sc.ops / static_cast<double>(h.ledger.base_nnz);
        h.ledger.charge(WorkBucket::solve_other, sc.ops);
        return rep;
    };

    std::vector<double> r(n);
    spmv(A, x, r, &sc);
    for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const double r0 = norm2(r);
    const double bnorm = norm2(b);
    const double target = opts.tol * (bnorm > 0.0 ? bnorm : r0);
    rep.residual_history.push_back(r0);
    if (r0 <= target) {
        rep.converged = true;
        return finish();
    }
    const double blowup = 1e6 * r0;

    if (opts.method == SolveMethod::stationary) {
        for (int it = 1; it <= opts.max_iters; ++it) {
            detail::cycle_apply(h, 0, x, b, opts.cycle, scratch, &sc);
            spmv(A, x, r, nullptr);
            for (index_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
            const double rn = norm2(r);
            rep.residual_history.push_back(rn);
            rep.iterations = it;
            if (rn <= target) {
                rep.converged = true;
                break;
            }
            if (rn > blowup || !std::isfinite(rn)) {
                rep.diverged = true;
                break;
            }
        }
        return finish();
    }

    if (opts.method == SolveMethod::pcg) {
        if (!h.levels.front().symmetric)
            throw std::invalid_argument("solve: pcg requires a symmetric operator");
        std::vector<double> z(n), p(n), q(n);
        precond(r, z);
        p = z;
        double rz = dot(r, z);
        for (int it = 1; it <= opts.max_iters; ++it) {
            spmv(A, p, q, &sc);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) {
                rep.diverged = true;
                break;
            }
            const double alpha = rz / pq;
            axpy(alpha, p, x);
            axpy(-alpha, q, r);
            const double rn = norm2(r);
            rep.residual_history.push_back(rn);
            rep.iterations = it;
            if (rn <= target) {
                rep.converged = true;
                break;
            }
            if (rn > blowup || !std::isfinite(rn)) {
                rep.diverged = true;
                break;
            }
            precond(r, z);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            for (index_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
            rz = rz_new;
        }
        return finish();
    }

    // fgmres, single restart cycle of length max_iters
    const int m = opts.max_iters;
    std::vector<std::vector<double>> V, Z;
    V.reserve(m + 1);
    Z.reserve(m);
    std::vector<double> v0(r);
    scale(1.0 / r0, v0);
    V.push_back(std::move(v0));
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = r0;
    int built = 0;
    for (int j = 0; j < m; ++j) {
        std::vector<double> z(n), w(n);
        precond(V[j], z);
        spmv(A, z, w, &sc);
        Z.push_back(std::move(z));
        for (int t = 0; t <= j; ++t) {
            H(t, j) = dot(w, V[t]);
            axpy(-H(t, j), V[t], w);
        }
        H(j + 1, j) = norm2(w);
        for (int t = 0; t < j; ++t) {
            const double tmp = cs[t] * H(t, j) + sn[t] * H(t + 1, j);
            H(t + 1, j) = -sn[t] * H(t, j) + cs[t] * H(t + 1, j);
            H(t, j) = tmp;
        }
        const double denom = std::hypot(H(j, j), H(j + 1, j));
        cs[j] = denom > 0.0 ? H(j, j) / denom : 1.0;
        sn[j] = denom > 0.0 ? H(j + 1, j) / denom : 0.0;
        H(j, j) = denom;
        const double hlast = H(j + 1, j);
        H(j + 1, j) = 0.0;
        g[j + 1] = -sn[j] * g[j];
        g[j] = cs[j] * g[j];
        const double res = std::fabs(g[j + 1]);
        rep.residual_history.push_back(res);
        rep.iterations = j + 1;
        built = j + 1;
        if (res <= target) {
            rep.converged = true;
            break;
        }
        if (res > blowup || !std::isfinite(res)) {
            rep.diverged = true;
            break;
        }
        if (hlast < 1e-300) break;  // exact breakdown, solution is in the span
        std::vector<double> vn(w);
        scale(1.0 / hlast, vn);
        V.push_back(std::move(vn));
    }
    std::vector<double> y(built, 0.0);
    for (int t = built - 1; t >= 0; --t) {
        double s = g[t];
        for (int u = t + 1; u < built; ++u) s -= H(t, u) * y[u];
        y[t] = H(t, t) != 0.0 ? s / H(t, t) : 0.0;
    }
    for (int t = 0; t < built; ++t) axpy(y[t], Z[t], x);
    return finish();
}

}  // namespace amg
