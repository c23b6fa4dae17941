// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>

namespace amg {

/// Raw floating-point-multiply counter. Kernels accumulate into one of these
/// when a non-null pointer is passed; a multiply-add counts as one operation.
struct OpCounter {
    double ops = 0.0;

    void add(double n) { ops += n; }
    void reset() { ops = 0.0; }
};

inline void count(OpCounter* c, double n) {
    if (c) c->add(n);
}

/// Setup/solve cost buckets. The first four decompose the setup cost
/// (strength + aggregation, candidate handling, interpolation construction,
/// Galerkin products); solve_other holds work outside the cycle model.
enum class WorkBucket : int {
    aggregation = 0,
    candidates = 1,
    interp = 2,
    rap = 3,
    solve_other = 4,
};

/// Cumulative cost ledger in work units (WU). One WU is the cost of a
/// finest-level SpMV, so raw multiply counts are divided by the finest
/// nonzero count registered at hierarchy construction.
struct WorkLedger {
    double base_nnz = 0.0;
    std::array<double, 5> wu{};

    void register_base(double nnz) {
        if (nnz <= 0.0) throw std::invalid_argument("WorkLedger: base nnz must be positive");
        base_nnz = nnz;
    }

    bool active() const { return base_nnz > 0.0; }

    void charge(WorkBucket b, double raw_ops) {
        if (!active()) throw std::logic_error("WorkLedger: base nnz not registered");
        wu[static_cast<int>(b)] += raw_ops / base_nnz;
    }

    void charge(WorkBucket b, const OpCounter& c) { charge(b, c.ops); }

    double operator[](WorkBucket b) const { return wu[static_cast<int>(b)]; }

    /// Total setup cost (SC): aggregation + candidates + interp + rap.
    double setup_total() const { return wu[0] + wu[1] + wu[2] + wu[3]; }

    /// Sum over all buckets including solve-side extras.
    double total() const {
        double t = 0.0;
        for (double v : wu) t += v;
        return t;
    }
};

}  // namespace amg
