// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amg/core/sparse.hpp"

namespace amg {

/// Disjoint cover of the nodes by aggregates, each with a designated root.
struct Aggregation {
    index_t n_nodes = 0;
    index_t n_agg = 0;
    SparseMatrix pattern;              // n_nodes x n_agg indicator (values 1)
    std::vector<index_t> roots;        // root node of each aggregate
    std::vector<index_t> node_to_agg;  // aggregate id per node
};

/// Greedy root-node aggregation on a normalized strength matrix.
/// Pass 1 (ascending node order): a node whose strong neighbors are all
/// unaggregated seeds a new aggregate of itself plus those neighbors and
/// becomes its root. Pass 2: remaining nodes join the pass-1 aggregate behind
/// their strongest edge (ties: lowest aggregate index). Leftover nodes become
/// singleton aggregates rooted at themselves.
inline Aggregation greedy_aggregate(const SparseMatrix& S) {
    if (S.n_rows != S.n_cols) throw std::invalid_argument("greedy_aggregate: square matrix required");
    const index_t n = S.n_rows;
    for (index_t i = 0; i < n; ++i)
        if (S.coeff(i, i) != 1.0)
            throw std::invalid_argument("greedy_aggregate: strength matrix must be normalized (unit diagonal)");

    std::vector<index_t> agg(n, -1);
    std::vector<index_t> roots;

    for (index_t i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        bool free = true;
        for (index_t j : S.row_cols(i))
            if (j != i && agg[j] >= 0) {
                free = false;
                break;
            }
        if (!free) continue;
        const index_t id = static_cast<index_t>(roots.size());
        agg[i] = id;
        for (index_t j : S.row_cols(i))
            if (j != i) agg[j] = id;
        roots.push_back(i);
    }

    const index_t n_pass1 = static_cast<index_t>(roots.size());
    std::vector<index_t> join(n, -1);
    for (index_t i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        double best = 0.0;
        index_t best_agg = -1;
        auto cols = S.row_cols(i);
        auto vals = S.row_vals(i);
        for (std::size_t p = 0; p < cols.size(); ++p) {
            const index_t j = cols[p];
            if (j == i) continue;
            const index_t a = agg[j];
            if (a < 0 || a >= n_pass1) continue;  // join pass-1 aggregates only
            if (vals[p] > best || (vals[p] == best && best_agg >= 0 && a < best_agg)) {
                best = vals[p];
                best_agg = a;
            }
        }
        join[i] = best_agg;
    }
    for (index_t i = 0; i < n; ++i)
        if (join[i] >= 0) agg[i] = join[i];

    for (index_t i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        agg[i] = static_cast<index_t>(roots.size());
        roots.push_back(i);
    }

    Aggregation result;
    result.n_nodes = n;
    result.n_agg = static_cast<index_t>(roots.size());
    result.roots = std::move(roots);
    result.node_to_agg = agg;
    SparseMatrix C(n, result.n_agg);
    C.col_indices.resize(n);
    C.values.assign(n, 1.0);
    for (index_t i = 0; i < n; ++i) {
        C.col_indices[i] = agg[i];
        C.row_offsets[i + 1] = i + 1;
    }
    result.pattern = std::move(C);
    return result;
}

/// Expand a nodal pattern and nodal root list to the DOF level: each nodal
/// entry becomes a full m x m block and nodal root r becomes DOFs
/// m*r .. m*r+m-1. With m = 1 the inputs are returned unchanged.
inline std::pair<SparseMatrix, std::vector<index_t>> unamalgamate(
    const SparseMatrix& N, const std::vector<index_t>& roots, index_t m) {
    if (m < 1) throw std::invalid_argument("unamalgamate: block size must be >= 1");
    if (m == 1) return {N, roots};
    SparseMatrix D(N.n_rows * m, N.n_cols * m);
    D.row_offsets.assign(static_cast<std::size_t>(D.n_rows) + 1, 0);
    D.col_indices.reserve(static_cast<std::size_t>(N.nnz()) * m * m);
    D.values.reserve(static_cast<std::size_t>(N.nnz()) * m * m);
    for (index_t i = 0; i < N.n_rows; ++i) {
        for (index_t r = 0; r < m; ++r) {
            for (index_t p = N.row_offsets[i]; p < N.row_offsets[i + 1]; ++p) {
                const index_t jb = N.col_indices[p] * m;
                for (index_t c = 0; c < m; ++c) {
                    D.col_indices.push_back(jb + c);
                    D.values.push_back(N.values[p]);
                }
            }
            D.row_offsets[i * m + r + 1] = static_cast<index_t>(D.col_indices.size());
        }
    }
    std::vector<index_t> droots(roots.size() * m);
    for (std::size_t g = 0; g < roots.size(); ++g)
        for (index_t c = 0; c < m; ++c) droots[g * m + c] = roots[g] * m + c;
    return {std::move(D), std::move(droots)};
}

}  // namespace amg
