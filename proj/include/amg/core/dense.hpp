// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "amg/core/sparse.hpp"

namespace amg {

/// Dense n x k block of near-null-space candidate vectors, column-major.
struct CandidateSet {
    index_t n = 0;
    index_t k = 0;
    std::vector<double> data;  // column-major, size n * k

    CandidateSet() = default;
    CandidateSet(index_t n_, index_t k_) : n(n_), k(k_), data(static_cast<std::size_t>(n_) * k_, 0.0) {
        if (n_ < 0 || k_ < 1) throw std::invalid_argument("CandidateSet: need n >= 0, k >= 1");
    }

    double& at(index_t i, index_t j) { return data[static_cast<std::size_t>(j) * n + i]; }
    double at(index_t i, index_t j) const { return data[static_cast<std::size_t>(j) * n + i]; }

    std::span<double> col(index_t j) { return {data.data() + static_cast<std::size_t>(j) * n, static_cast<std::size_t>(n)}; }
    std::span<const double> col(index_t j) const {
        return {data.data() + static_cast<std::size_t>(j) * n, static_cast<std::size_t>(n)};
    }
};

/// Candidates set to the constant vector, the usual scalar-PDE default.
inline CandidateSet constant_candidates(index_t n) {
    CandidateSet b(n, 1);
    for (index_t i = 0; i < n; ++i) b.at(i, 0) = 1.0;
    return b;
}

inline void normalize_columns(CandidateSet& b) {
    for (index_t j = 0; j < b.k; ++j) {
        double s = norm2(b.col(j));
        if (s > 0.0) scale(1.0 / s, b.col(j));
    }
}

}  // namespace amg
