// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "amg/core/dense.hpp"
#include "amg/core/sparse.hpp"

namespace amg {

struct CFPartition {
    std::vector<index_t> c_points;  // coarse column j lives at row c_points[j]
    std::vector<index_t> f_points;  // ascending complement
};

inline CFPartition make_partition(index_t n, std::vector<index_t> c_points) {
    std::vector<char> is_c(n, 0);
    for (index_t c : c_points) {
        if (c < 0 || c >= n) throw std::invalid_argument("make_partition: C point out of range");
        if (is_c[c]) throw std::invalid_argument("make_partition: duplicate C point");
        is_c[c] = 1;
    }
    CFPartition part;
    part.c_points = std::move(c_points);
    for (index_t i = 0; i < n; ++i)
        if (!is_c[i]) part.f_points.push_back(i);
    return part;
}

inline Eigen::MatrixXd to_dense(const SparseMatrix& A) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.n_rows, A.n_cols);
    for (index_t i = 0; i < A.n_rows; ++i)
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
            D(i, A.col_indices[p]) = A.values[p];
    return D;
}

inline SparseMatrix from_dense(const Eigen::MatrixXd& D, double drop_below = 0.0) {
    std::vector<Triplet> trips;
    for (index_t i = 0; i < static_cast<index_t>(D.rows()); ++i)
        for (index_t j = 0; j < static_cast<index_t>(D.cols()); ++j)
            if (std::fabs(D(i, j)) > drop_below) trips.push_back({i, j, D(i, j)});
    return from_triplets(static_cast<index_t>(D.rows()), static_cast<index_t>(D.cols()),
                         std::move(trips));
}

namespace detail {

constexpr index_t kDenseOracleCap = 2000;

inline void check_oracle_size(index_t n) {
    if (n > kDenseOracleCap) throw std::invalid_argument("theory: dense oracle capped at n = 2000");
}

inline void check_spd(const Eigen::MatrixXd& A, const char* who) {
    if (A.rows() != A.cols()) throw std::invalid_argument(std::string(who) + ": square matrix required");
    if (!A.isApprox(A.transpose(), 1e-12)) throw std::invalid_argument(std::string(who) + ": symmetric matrix required");
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument(std::string(who) + ": SPD matrix required");
}

inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::VectorXd ev = es.eigenvalues();
    for (index_t i = 0; i < ev.size(); ++i) ev[i] = std::sqrt(std::max(ev[i], 0.0));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

struct IdealInterpolation {
    Eigen::MatrixXd W;          // F x C block, P = [W; I] in C/F ordering
    Eigen::MatrixXd P_cf;       // (F+C) x C in the permuted ordering
    Eigen::MatrixXd P_natural;  // n x C in the original row ordering
    Eigen::MatrixXd schur;      // A_cc - A_cf A_ff^{-1} A_fc
};

/// P_ideal = [-A_ff^{-1} A_fc; I]; A P_ideal vanishes on F rows and equals
/// the Schur complement on C rows.
inline IdealInterpolation ideal_interpolation(const Eigen::MatrixXd& A, const CFPartition& part) {
    const index_t n = static_cast<index_t>(A.rows());
    detail::check_oracle_size(n);
    if (A.cols() != n) throw std::invalid_argument("ideal_interpolation: square matrix required");
    const index_t nf = static_cast<index_t>(part.f_points.size());
    const index_t nc = static_cast<index_t>(part.c_points.size());
    if (nf + nc != n) throw std::invalid_argument("ideal_interpolation: partition does not cover the matrix");

    Eigen::MatrixXd Aff(nf, nf), Afc(nf, nc), Acf(nc, nf), Acc(nc, nc);
    for (index_t i = 0; i < nf; ++i)
        for (index_t j = 0; j < nf; ++j) Aff(i, j) = A(part.f_points[i], part.f_points[j]);
    for (index_t i = 0; i < nf; ++i)
        for (index_t j = 0; j < nc; ++j) Afc(i, j) = A(part.f_points[i], part.c_points[j]);
    for (index_t i = 0; i < nc; ++i)
        for (index_t j = 0; j < nf; ++j) Acf(i, j) = A(part.c_points[i], part.f_points[j]);
    for (index_t i = 0; i < nc; ++i)
        for (index_t j = 0; j < nc; ++j) Acc(i, j) = A(part.c_points[i], part.c_points[j]);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(Aff);
    if (nf > 0 && !lu.isInvertible())
        throw std::runtime_error("ideal_interpolation: singular A_ff block");
    IdealInterpolation out;
    out.W = nf > 0 ? Eigen::MatrixXd(-lu.solve(Afc)) : Eigen::MatrixXd::Zero(0, nc);
    out.schur = Acc + Acf * out.W;
    out.P_cf = Eigen::MatrixXd::Zero(n, nc);
    out.P_cf.topRows(nf) = out.W;
    out.P_cf.bottomRows(nc) = Eigen::MatrixXd::Identity(nc, nc);
    out.P_natural = Eigen::MatrixXd::Zero(n, nc);
    for (index_t i = 0; i < nf; ++i) out.P_natural.row(part.f_points[i]) = out.W.row(i);
    for (index_t j = 0; j < nc; ++j) out.P_natural(part.c_points[j], j) = 1.0;
    return out;
}

/// mu(P) = max_u ||u - P u_c||^2 / ||u||_A^2 with u_c the C-point restriction
/// of u; the largest generalized eigenvalue of (I-P Pi_c)^T (I-P Pi_c) x =
/// mu A x.
inline double wap_measure(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P,
                          const CFPartition& part) {
    detail::check_oracle_size(static_cast<index_t>(A.rows()));
    detail::check_spd(A, "wap_measure");
    const index_t n = static_cast<index_t>(A.rows());
    const index_t nc = static_cast<index_t>(part.c_points.size());
    if (P.rows() != n || P.cols() != nc) throw std::invalid_argument("wap_measure: P shape mismatch");
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n);
    for (index_t j = 0; j < nc; ++j) E.col(part.c_points[j]) -= P.col(j);
    Eigen::MatrixXd M = E.transpose() * E;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(M, A);
    return ges.eigenvalues().maxCoeff();
}

/// muhat(P) = max_u ||u - P u_c||_A^2 / ||A u||^2, the SAP quotient.
inline double sap_measure(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P,
                          const CFPartition& part) {
    detail::check_oracle_size(static_cast<index_t>(A.rows()));
    detail::check_spd(A, "sap_measure");
    const index_t n = static_cast<index_t>(A.rows());
    const index_t nc = static_cast<index_t>(part.c_points.size());
    if (P.rows() != n || P.cols() != nc) throw std::invalid_argument("sap_measure: P shape mismatch");
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n);
    for (index_t j = 0; j < nc; ++j) E.col(part.c_points[j]) -= P.col(j);
    Eigen::MatrixXd M = E.transpose() * A * E;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(M, A * A);
    return ges.eigenvalues().maxCoeff();
}

/// W minimizing the SAP quotient, by an independent numerical route: with
/// u = A^{-1} x the quotient numerator is A^{1/2}(X - W Y) x, X and Y the
/// F and C row blocks of A^{-1}. The least-squares fit X ~ W Y (QR on the
/// inverse's rows, no A^2 assembly) shares its stationary point with the
/// spectral argmin claimed by the lemma.
inline Eigen::MatrixXd sap_argmin_numeric(const Eigen::MatrixXd& A, const CFPartition& part) {
    detail::check_oracle_size(static_cast<index_t>(A.rows()));
    detail::check_spd(A, "sap_argmin_numeric");
    Eigen::MatrixXd Ainv = A.inverse();
    const index_t nf = static_cast<index_t>(part.f_points.size());
    const index_t nc = static_cast<index_t>(part.c_points.size());
    Eigen::MatrixXd X(nf, A.cols()), Y(nc, A.cols());
    for (index_t i = 0; i < nf; ++i) X.row(i) = Ainv.row(part.f_points[i]);
    for (index_t j = 0; j < nc; ++j) Y.row(j) = Ainv.row(part.c_points[j]);
    // W^T solves Y^T W^T = X^T in the least-squares sense
    return Eigen::MatrixXd(
        Y.transpose().colPivHouseholderQr().solve(X.transpose()).transpose());
}

/// Closed form of the SAP-optimal W, assembled from the blocks of A:
/// -(A_ff^2 + A_fc A_cf)^{-1} (A_ff A_fc + A_fc A_cc). Coincides with
/// ideal interpolation for A^2.
inline Eigen::MatrixXd ideal_sap_closed_form(const Eigen::MatrixXd& A, const CFPartition& part) {
    const index_t n = static_cast<index_t>(A.rows());
    detail::check_oracle_size(n);
    const index_t nf = static_cast<index_t>(part.f_points.size());
    const index_t nc = static_cast<index_t>(part.c_points.size());
    if (nf + nc != n) throw std::invalid_argument("ideal_sap_closed_form: partition does not cover the matrix");
    Eigen::MatrixXd Aff(nf, nf), Afc(nf, nc), Acf(nc, nf), Acc(nc, nc);
    for (index_t i = 0; i < nf; ++i)
        for (index_t j = 0; j < nf; ++j) Aff(i, j) = A(part.f_points[i], part.f_points[j]);
    for (index_t i = 0; i < nf; ++i)
        for (index_t j = 0; j < nc; ++j) Afc(i, j) = A(part.f_points[i], part.c_points[j]);
    for (index_t i = 0; i < nc; ++i)
        for (index_t j = 0; j < nf; ++j) Acf(i, j) = A(part.c_points[i], part.f_points[j]);
    for (index_t i = 0; i < nc; ++i)
        for (index_t j = 0; j < nc; ++j) Acc(i, j) = A(part.c_points[i], part.c_points[j]);
    Eigen::MatrixXd lhs = Aff * Aff + Afc * Acf;
    Eigen::MatrixXd rhs = Aff * Afc + Afc * Acc;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
    if (nf > 0 && !lu.isInvertible())
        throw std::runtime_error("ideal_sap_closed_form: singular F block of A^2");
    return nf > 0 ? Eigen::MatrixXd(-lu.solve(rhs)) : Eigen::MatrixXd::Zero(0, nc);
}

/// ||E_TG||_A for E_TG = G^{nu2} (I - P (P^T A P)^{-1} P^T A) G^{nu1},
/// computed through the similarity transform A^{1/2} E A^{-1/2}.
inline double two_grid_error_norm(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P,
                                  const Eigen::MatrixXd& G, int nu_pre, int nu_post) {
    detail::check_oracle_size(static_cast<index_t>(A.rows()));
    detail::check_spd(A, "two_grid_error_norm");
    if (nu_pre < 0 || nu_post < 0) throw std::invalid_argument("two_grid_error_norm: negative sweep count");
    Eigen::MatrixXd RAP = P.transpose() * A * P;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(RAP);
    if (!lu.isInvertible()) throw std::runtime_error("two_grid_error_norm: singular coarse operator");
    const index_t n = static_cast<index_t>(A.rows());
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(n, n) - P * lu.solve(P.transpose() * A);
    for (int s = 0; s < nu_pre; ++s) E = E * G;
    for (int s = 0; s < nu_post; ++s) E = G * E;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::VectorXd ev = es.eigenvalues();
    Eigen::VectorXd rt(ev.size()), rti(ev.size());
    for (index_t i = 0; i < ev.size(); ++i) {
        rt[i] = std::sqrt(std::max(ev[i], 0.0));
        rti[i] = rt[i] > 0.0 ? 1.0 / rt[i] : 0.0;
    }
    Eigen::MatrixXd Ah = es.eigenvectors() * rt.asDiagonal() * es.eigenvectors().transpose();
    Eigen::MatrixXd Ahi = es.eigenvectors() * rti.asDiagonal() * es.eigenvectors().transpose();
    return (Ah * E * Ahi).jacobiSvd().singularValues()(0);
}

/// Residual of projecting B onto range(P): (I - P P^+) B columnwise.
inline Eigen::MatrixXd constraint_error(const Eigen::MatrixXd& P, const Eigen::MatrixXd& B) {
    if (P.rows() != B.rows()) throw std::invalid_argument("constraint_error: row mismatch");
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(P);
    cod.setThreshold(1e-12);
    return B - P * cod.solve(B);
}

struct EnergyMinEquivalence {
    double max_discrepancy = 0.0;
    std::vector<double> per_column;
    std::vector<index_t> degenerate_columns;  // empty pattern with a nonzero target
    bool pass = false;
};

/// Lemma check: for each coarse column, the pattern-restricted energy minimum
/// (restricted normal system on A_ff) must match the pattern-restricted
/// distance minimum to P_ideal's column in the A-norm (Cholesky + QR least
/// squares). The two dense routes are algorithmically independent.
inline EnergyMinEquivalence verify_energymin_equivalence(
    const Eigen::MatrixXd& A, const CFPartition& part,
    const std::vector<std::vector<index_t>>& pattern, double tol = 1e-8) {
    const index_t n = static_cast<index_t>(A.rows());
    if (n > 200) throw std::invalid_argument("verify_energymin_equivalence: capped at n = 200");
    detail::check_spd(A, "verify_energymin_equivalence");
    const index_t nf = static_cast<index_t>(part.f_points.size());
    const index_t nc = static_cast<index_t>(part.c_points.size());
    if (pattern.size() != static_cast<std::size_t>(nc))
        throw std::invalid_argument("verify_energymin_equivalence: one pattern per coarse column required");

    std::vector<index_t> f_local(n, -1);
    for (index_t i = 0; i < nf; ++i) f_local[part.f_points[i]] = i;
    Eigen::MatrixXd Aff(nf, nf);
    for (index_t i = 0; i < nf; ++i)
        for (index_t j = 0; j < nf; ++j) Aff(i, j) = A(part.f_points[i], part.f_points[j]);
    Eigen::LLT<Eigen::MatrixXd> llt(Aff);
    if (nf > 0 && llt.info() != Eigen::Success)
        throw std::runtime_error("verify_energymin_equivalence: A_ff not SPD");
    Eigen::MatrixXd Lt = nf > 0 ? Eigen::MatrixXd(llt.matrixU()) : Eigen::MatrixXd(0, 0);

    EnergyMinEquivalence rep;
    rep.per_column.resize(nc, 0.0);
    for (index_t l = 0; l < nc; ++l) {
        std::vector<index_t> J;
        for (index_t gi : pattern[l]) {
            if (gi < 0 || gi >= n || f_local[gi] < 0)
                throw std::invalid_argument("verify_energymin_equivalence: pattern entry is not an F row");
            J.push_back(f_local[gi]);
        }
        std::sort(J.begin(), J.end());
        J.erase(std::unique(J.begin(), J.end()), J.end());
        const index_t nj = static_cast<index_t>(J.size());

        Eigen::VectorXd afc(nf);
        for (index_t i = 0; i < nf; ++i) afc[i] = A(part.f_points[i], part.c_points[l]);
        if (nj == 0) {
            if (afc.size() > 0 && afc.cwiseAbs().maxCoeff() > 0 && nf > 0)
                rep.degenerate_columns.push_back(l);
            continue;
        }

        // route 1: restricted normal system  (A_ff)_JJ w = -(A_fc e_l)_J
        Eigen::MatrixXd AJJ(nj, nj);
        Eigen::VectorXd bJ(nj);
        for (index_t a = 0; a < nj; ++a) {
            bJ[a] = -afc[J[a]];
            for (index_t b = 0; b < nj; ++b) AJJ(a, b) = Aff(J[a], J[b]);
        }
        Eigen::VectorXd w1 = AJJ.ldlt().solve(bJ);

        // route 2: distance to the ideal column in the A_ff energy, via the
        // Cholesky factor and a QR least-squares solve
        Eigen::VectorXd wid = llt.solve(-afc);
        Eigen::MatrixXd M(nf, nj);
        for (index_t a = 0; a < nj; ++a) M.col(a) = Lt.col(J[a]);
        Eigen::VectorXd w2 = M.householderQr().solve(Lt * wid);

        const double scale = std::max(1.0, wid.cwiseAbs().maxCoeff());
        rep.per_column[l] = (w1 - w2).cwiseAbs().maxCoeff() / scale;
        rep.max_discrepancy = std::max(rep.max_discrepancy, rep.per_column[l]);
    }
    rep.pass = rep.max_discrepancy <= tol;
    return rep;
}

struct AsymptoticFit {
    double rho_bar = 0.0;
    double a = 0.0;
    double residual = 0.0;  // relative 2-norm misfit of -log(rho) vs h^q
};

/// Least-squares fit of -log(rho) = -log(rho_bar) + a h^q.
inline AsymptoticFit asymptotic_fit(const std::vector<double>& h, const std::vector<double>& rho,
                                    int q) {
    if (h.size() != rho.size() || h.size() < 2)
        throw std::invalid_argument("asymptotic_fit: need matching h/rho lists with >= 2 samples");
    if (q < 1) throw std::invalid_argument("asymptotic_fit: q must be >= 1");
    const index_t m = static_cast<index_t>(h.size());
    Eigen::MatrixXd X(m, 2);
    Eigen::VectorXd y(m);
    for (index_t i = 0; i < m; ++i) {
        if (h[i] <= 0.0) throw std::invalid_argument("asymptotic_fit: h must be positive");
        if (rho[i] <= 0.0 || rho[i] >= 1.0)
            throw std::invalid_argument("asymptotic_fit: rho must lie in (0, 1)");
        X(i, 0) = 1.0;
        X(i, 1) = std::pow(h[i], q);
        y[i] = -std::log(rho[i]);
    }
    Eigen::Vector2d cf = X.householderQr().solve(y);
    AsymptoticFit fit;
    fit.rho_bar = std::exp(-cf[0]);
    fit.a = cf[1];
    const double yn = y.norm();
    fit.residual = yn > 0.0 ? (y - X * cf).norm() / yn : 0.0;
    return fit;
}

/// Measured (not asserted) stability constant ||P (RAP)^{-1} R A|| in the
/// sqrt(A^T A) norm, the norm taken through the SVD of A.
inline double stability_constant(const Eigen::MatrixXd& A, const Eigen::MatrixXd& P,
                                 const Eigen::MatrixXd& R) {
    detail::check_oracle_size(static_cast<index_t>(A.rows()));
    Eigen::MatrixXd RAP = R * A * P;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(RAP);
    if (!lu.isInvertible()) throw std::runtime_error("stability_constant: singular coarse operator");
    Eigen::MatrixXd T = P * lu.solve(R * A);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    Eigen::VectorXd sv = svd.singularValues();
    Eigen::VectorXd rt(sv.size()), rti(sv.size());
    for (index_t i = 0; i < sv.size(); ++i) {
        rt[i] = std::sqrt(sv[i]);
        rti[i] = sv[i] > 0.0 ? 1.0 / rt[i] : 0.0;
    }
    const Eigen::MatrixXd& V = svd.matrixV();
    Eigen::MatrixXd Mh = V * rt.asDiagonal() * V.transpose();
    Eigen::MatrixXd Mhi = V * rti.asDiagonal() * V.transpose();
    return (Mh * T * Mhi).jacobiSvd().singularValues()(0);
}

}  // namespace amg
