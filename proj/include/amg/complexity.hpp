// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "amg/hierarchy.hpp"

namespace amg {

/// Total stored nonzeros across all levels over the finest ones.
inline double operator_complexity(const Hierarchy& h) {
    const double base = static_cast<double>(h.finest().nnz());
    double sum = 0.0;
    for (const Level& l : h.levels) sum += static_cast<double>(l.A.nnz());
    return sum / base;
}

/// Predicted work of one V(pre, post) cycle in units of |A_0|: every
/// non-coarsest level does pre+post relaxation sweeps plus one residual on
/// A_l and one pass each over P_l and R_l; the coarsest solve is free.
inline double cycle_complexity(const Hierarchy& h, int pre_sweeps = -1, int post_sweeps = -1) {
    if (pre_sweeps < 0) pre_sweeps = h.options.pre_relax.sweeps;
    if (post_sweeps < 0) post_sweeps = h.options.post_relax.sweeps;
    const double base = static_cast<double>(h.finest().nnz());
    double sum = 0.0;
    for (int l = 0; l + 1 < h.n_levels(); ++l) {
        const Level& lev = h.levels[l];
        sum += static_cast<double>(pre_sweeps + post_sweeps + 1) * lev.A.nnz();
        sum += static_cast<double>(lev.P.nnz()) + static_cast<double>(lev.R.nnz());
    }
    return sum / base;
}

/// Per-level sizes plus complexity measures and setup work split by phase.
inline nlohmann::json setup_report(const Hierarchy& h) {
    nlohmann::json j;
    j["levels"] = nlohmann::json::array();
    for (int l = 0; l < h.n_levels(); ++l) {
        const Level& lev = h.levels[l];
        nlohmann::json row;
        row["level"] = l;
        row["rows"] = lev.A.n_rows;
        row["nnz"] = lev.A.nnz();
        row["nnz_per_row"] = lev.A.n_rows > 0
                                 ? static_cast<double>(lev.A.nnz()) / lev.A.n_rows
                                 : 0.0;
        row["symmetric"] = lev.symmetric;
        if (l + 1 < h.n_levels()) {
            row["nnz_P"] = lev.P.nnz();
            row["nnz_R"] = lev.R.nnz();
        }
        j["levels"].push_back(row);
    }
    j["operator_complexity"] = operator_complexity(h);
    j["cycle_complexity"] = cycle_complexity(h);
    j["work_units"] = {
        {"aggregation", h.ledger[WorkBucket::aggregation]},
        {"candidates", h.ledger[WorkBucket::candidates]},
        {"interp", h.ledger[WorkBucket::interp]},
        {"rap", h.ledger[WorkBucket::rap]},
        {"solve_other", h.ledger[WorkBucket::solve_other]},
        {"setup_total", h.ledger.setup_total()},
    };
    return j;
}

inline std::string setup_report_csv(const Hierarchy& h) {
    std::ostringstream os;
    os << "level,rows,nnz,nnz_per_row,nnz_P,nnz_R\n";
    for (int l = 0; l < h.n_levels(); ++l) {
        const Level& lev = h.levels[l];
        os << l << ',' << lev.A.n_rows << ',' << lev.A.nnz() << ','
           << (lev.A.n_rows > 0 ? static_cast<double>(lev.A.nnz()) / lev.A.n_rows : 0.0);
        if (l + 1 < h.n_levels())
            os << ',' << lev.P.nnz() << ',' << lev.R.nnz();
        else
            os << ",,";
        os << '\n';
    }
    os << "operator_complexity," << operator_complexity(h) << ",,,,\n";
    os << "cycle_complexity," << cycle_complexity(h) << ",,,,\n";
    os << "setup_work_units," << h.ledger.setup_total() << ",,,,\n";
    return os.str();
}

}  // namespace amg
