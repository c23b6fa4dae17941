// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "amg/core/work.hpp"

namespace amg {

using index_t = std::int32_t;

/// Compressed sparse row matrix. Canonical form: within each row the column
/// indices are strictly ascending, there are no duplicates and no stored
/// zeros. block_size > 1 tags matrices whose unknowns come in nodal blocks
/// (DOFs of one node are contiguous); it does not change the storage.
struct SparseMatrix {
    index_t n_rows = 0;
    index_t n_cols = 0;
    index_t block_size = 1;
    std::vector<index_t> row_offsets;  // size n_rows + 1
    std::vector<index_t> col_indices;
    std::vector<double> values;

    SparseMatrix() : row_offsets(1, 0) {}
    SparseMatrix(index_t rows, index_t cols)
        : n_rows(rows), n_cols(cols), row_offsets(static_cast<std::size_t>(rows) + 1, 0) {}

    index_t nnz() const { return static_cast<index_t>(col_indices.size()); }
    index_t row_nnz(index_t i) const { return row_offsets[i + 1] - row_offsets[i]; }

    std::span<const index_t> row_cols(index_t i) const {
        return {col_indices.data() + row_offsets[i], static_cast<std::size_t>(row_nnz(i))};
    }
    std::span<const double> row_vals(index_t i) const {
        return {values.data() + row_offsets[i], static_cast<std::size_t>(row_nnz(i))};
    }
    std::span<double> row_vals(index_t i) {
        return {values.data() + row_offsets[i], static_cast<std::size_t>(row_nnz(i))};
    }

    /// Value at (i, j), zero if not stored.
    double coeff(index_t i, index_t j) const {
        auto cols = row_cols(i);
        auto it = std::lower_bound(cols.begin(), cols.end(), j);
        if (it == cols.end() || *it != j) return 0.0;
        return values[row_offsets[i] + static_cast<index_t>(it - cols.begin())];
    }

    bool operator==(const SparseMatrix& o) const {
        return n_rows == o.n_rows && n_cols == o.n_cols && row_offsets == o.row_offsets &&
               col_indices == o.col_indices && values == o.values;
    }
};

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Build a canonical CSR matrix from unordered (row, col, value) entries.
/// Duplicates are summed; entries that are exactly zero after summing are dropped.
inline SparseMatrix from_triplets(index_t n_rows, index_t n_cols, std::vector<Triplet> entries) {
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
            throw std::invalid_argument("from_triplets: entry out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    SparseMatrix m(n_rows, n_cols);
    m.col_indices.reserve(entries.size());
    m.values.reserve(entries.size());
    std::size_t p = 0;
    for (index_t i = 0; i < n_rows; ++i) {
        while (p < entries.size() && entries[p].row == i) {
            index_t j = entries[p].col;
            double v = 0.0;
            while (p < entries.size() && entries[p].row == i && entries[p].col == j) {
                v += entries[p].value;
                ++p;
            }
            if (v != 0.0) {
                m.col_indices.push_back(j);
                m.values.push_back(v);
            }
        }
        m.row_offsets[i + 1] = static_cast<index_t>(m.col_indices.size());
    }
    return m;
}

/// Build from per-row (col, value) lists that may be unsorted or contain
/// duplicates; rows are canonicalized and zeros dropped.
inline SparseMatrix from_rows(index_t n_cols,
                              std::vector<std::vector<std::pair<index_t, double>>> rows) {
    const index_t n_rows = static_cast<index_t>(rows.size());
    SparseMatrix m(n_rows, n_cols);
    for (index_t i = 0; i < n_rows; ++i) {
        auto& r = rows[i];
        std::sort(r.begin(), r.end());
        for (std::size_t p = 0; p < r.size();) {
            index_t j = r[p].first;
            if (j < 0 || j >= n_cols) throw std::invalid_argument("from_rows: column out of range");
            double v = 0.0;
            while (p < r.size() && r[p].first == j) {
                v += r[p].second;
                ++p;
            }
            if (v != 0.0) {
                m.col_indices.push_back(j);
                m.values.push_back(v);
            }
        }
        m.row_offsets[i + 1] = static_cast<index_t>(m.col_indices.size());
    }
    return m;
}

inline SparseMatrix identity(index_t n) {
    SparseMatrix m(n, n);
    m.col_indices.resize(n);
    m.values.assign(n, 1.0);
    for (index_t i = 0; i < n; ++i) {
        m.col_indices[i] = i;
        m.row_offsets[i + 1] = i + 1;
    }
    return m;
}

/// y = A * x. Charges |A| multiplies to the counter.
inline void spmv(const SparseMatrix& A, std::span<const double> x, std::span<double> y,
                 OpCounter* c = nullptr) {
    if (static_cast<index_t>(x.size()) != A.n_cols || static_cast<index_t>(y.size()) != A.n_rows)
        throw std::invalid_argument("spmv: dimension mismatch");
    for (index_t i = 0; i < A.n_rows; ++i) {
        double s = 0.0;
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
            s += A.values[p] * x[A.col_indices[p]];
        y[i] = s;
    }
    count(c, static_cast<double>(A.nnz()));
}

inline std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x,
                                OpCounter* c = nullptr) {
    std::vector<double> y(A.n_rows);
    spmv(A, x, y, c);
    return y;
}

inline SparseMatrix transpose(const SparseMatrix& A) {
    SparseMatrix T(A.n_cols, A.n_rows);
    T.block_size = A.block_size;
    std::vector<index_t> cnt(A.n_cols, 0);
    for (index_t j : A.col_indices) ++cnt[j];
    for (index_t j = 0; j < A.n_cols; ++j) T.row_offsets[j + 1] = T.row_offsets[j] + cnt[j];
    T.col_indices.resize(A.nnz());
    T.values.resize(A.nnz());
    std::vector<index_t> next(T.row_offsets.begin(), T.row_offsets.end() - 1);
    for (index_t i = 0; i < A.n_rows; ++i) {
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            index_t j = A.col_indices[p];
            T.col_indices[next[j]] = i;
            T.values[next[j]] = A.values[p];
            ++next[j];
        }
    }
    return T;
}

/// C = A * B by row-wise accumulation. Work charged per the multiply model:
/// sum over rows i of A of sum_{k in row i} nnz(row k of B).
inline SparseMatrix matmul(const SparseMatrix& A, const SparseMatrix& B, OpCounter* c = nullptr) {
    if (A.n_cols != B.n_rows) throw std::invalid_argument("matmul: dimension mismatch");
    SparseMatrix C(A.n_rows, B.n_cols);
    std::vector<double> acc(B.n_cols, 0.0);
    std::vector<index_t> mark(B.n_cols, -1);
    std::vector<index_t> touched;
    double ops = 0.0;
    for (index_t i = 0; i < A.n_rows; ++i) {
        touched.clear();
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t k = A.col_indices[p];
            const double av = A.values[p];
            ops += static_cast<double>(B.row_nnz(k));
            for (index_t q = B.row_offsets[k]; q < B.row_offsets[k + 1]; ++q) {
                const index_t j = B.col_indices[q];
                if (mark[j] != i) {
                    mark[j] = i;
                    acc[j] = 0.0;
                    touched.push_back(j);
                }
                acc[j] += av * B.values[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (index_t j : touched) {
            if (acc[j] != 0.0) {
                C.col_indices.push_back(j);
                C.values.push_back(acc[j]);
            }
        }
        C.row_offsets[i + 1] = static_cast<index_t>(C.col_indices.size());
    }
    count(c, ops);
    return C;
}

/// Coarse operator R * A * P, evaluated as R * (A * P).
inline SparseMatrix galerkin_product(const SparseMatrix& R, const SparseMatrix& A,
                                     const SparseMatrix& P, OpCounter* c = nullptr) {
    if (R.n_cols != A.n_rows || A.n_cols != P.n_rows)
        throw std::invalid_argument("galerkin_product: dimension mismatch");
    SparseMatrix AP = matmul(A, P, c);
    SparseMatrix C = matmul(R, AP, c);
    C.block_size = P.block_size;
    return C;
}

/// Drop small row entries. With k set, entries strictly below the k-th
/// largest off-diagonal magnitude of their row are removed (ties kept); with
/// theta set, entries strictly below theta times the largest off-diagonal
/// magnitude are removed. k applies before theta when both are given. For
/// square matrices the diagonal is exempt and never removed; a row's largest
/// off-diagonal entry always survives.
inline SparseMatrix filter_matrix(const SparseMatrix& G, std::optional<double> theta,
                                  std::optional<index_t> k) {
    if (theta && (*theta < 0.0 || *theta > 1.0))
        throw std::invalid_argument("filter_matrix: theta must lie in [0, 1]");
    if (k && *k < 1) throw std::invalid_argument("filter_matrix: k must be >= 1");
    const bool square = G.n_rows == G.n_cols;
    SparseMatrix F(G.n_rows, G.n_cols);
    F.block_size = G.block_size;
    std::vector<double> mags;
    for (index_t i = 0; i < G.n_rows; ++i) {
        mags.clear();
        for (index_t p = G.row_offsets[i]; p < G.row_offsets[i + 1]; ++p) {
            if (square && G.col_indices[p] == i) continue;
            mags.push_back(std::fabs(G.values[p]));
        }
        double kth = 0.0;
        if (k && static_cast<std::size_t>(*k) < mags.size()) {
            std::vector<double> s(mags);
            std::nth_element(s.begin(), s.begin() + (*k - 1), s.end(), std::greater<double>());
            kth = s[*k - 1];
        }
        double tmax = 0.0;
        if (theta && !mags.empty()) tmax = *theta * *std::max_element(mags.begin(), mags.end());
        for (index_t p = G.row_offsets[i]; p < G.row_offsets[i + 1]; ++p) {
            const index_t j = G.col_indices[p];
            const double mag = std::fabs(G.values[p]);
            const bool diag = square && j == i;
            bool keep = diag || ((!k || mag >= kth) && (!theta || mag >= tmax));
            if (keep && G.values[p] != 0.0) {
                F.col_indices.push_back(j);
                F.values.push_back(G.values[p]);
            }
        }
        F.row_offsets[i + 1] = static_cast<index_t>(F.col_indices.size());
    }
    return F;
}

inline std::vector<double> diagonal(const SparseMatrix& A) {
    const index_t n = std::min(A.n_rows, A.n_cols);
    std::vector<double> d(n, 0.0);
    for (index_t i = 0; i < n; ++i) d[i] = A.coeff(i, i);
    return d;
}

inline double max_abs(const SparseMatrix& A) {
    double m = 0.0;
    for (double v : A.values) m = std::max(m, std::fabs(v));
    return m;
}

/// max_ij |A - A^T| <= tol * max_ij |A|.
inline bool is_symmetric(const SparseMatrix& A, double tol = 1e-12) {
    if (A.n_rows != A.n_cols) return false;
    const SparseMatrix T = transpose(A);
    const double scale = max_abs(A);
    if (A.col_indices == T.col_indices && A.row_offsets == T.row_offsets) {
        for (index_t p = 0; p < A.nnz(); ++p)
            if (std::fabs(A.values[p] - T.values[p]) > tol * scale) return false;
        return true;
    }
    // Patterns differ: fall back to entry-wise comparison.
    for (index_t i = 0; i < A.n_rows; ++i)
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
            if (std::fabs(A.values[p] - T.coeff(i, A.col_indices[p])) > tol * scale) return false;
    for (index_t i = 0; i < T.n_rows; ++i)
        for (index_t p = T.row_offsets[i]; p < T.row_offsets[i + 1]; ++p)
            if (std::fabs(T.values[p] - A.coeff(i, T.col_indices[p])) > tol * scale) return false;
    return true;
}

// Small vector helpers shared across the library.

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) {
    for (double& v : x) v *= alpha;
}

}  // namespace amg
