// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amg/core/sparse.hpp"

namespace amg {

/// Matrix Market coordinate-format reader (real, general or symmetric).
/// Symmetric files are expanded to full storage.
inline SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix market: empty stream");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix")
        throw std::runtime_error("matrix market: bad banner");
    if (format != "coordinate") throw std::runtime_error("matrix market: expected coordinate format");
    if (field != "real" && field != "integer")
        throw std::runtime_error("matrix market: only real matrices supported");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw std::runtime_error("matrix market: unsupported symmetry '" + symmetry + "'");

    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream sizes(line);
    long rows = 0, cols = 0, entries = 0;
    if (!(sizes >> rows >> cols >> entries)) throw std::runtime_error("matrix market: bad size line");

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(symmetric ? 2 * entries : entries));
    long seen = 0;
    while (seen < entries && std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        long i = 0, j = 0;
        double v = 0.0;
        if (!(ls >> i >> j >> v)) throw std::runtime_error("matrix market: bad entry line");
        trips.push_back({static_cast<index_t>(i - 1), static_cast<index_t>(j - 1), v});
        if (symmetric && i != j)
            trips.push_back({static_cast<index_t>(j - 1), static_cast<index_t>(i - 1), v});
        ++seen;
    }
    if (seen != entries) throw std::runtime_error("matrix market: truncated entry list");
    return from_triplets(static_cast<index_t>(rows), static_cast<index_t>(cols), std::move(trips));
}

inline SparseMatrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix market: cannot open '" + path + "'");
    return read_matrix_market(in);
}

inline void write_matrix_market(std::ostream& out, const SparseMatrix& A) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.n_rows << " " << A.n_cols << " " << A.nnz() << "\n";
    out << std::setprecision(17);
    for (index_t i = 0; i < A.n_rows; ++i)
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p)
            out << i + 1 << " " << A.col_indices[p] + 1 << " " << A.values[p] << "\n";
}

inline void write_matrix_market(const std::string& path, const SparseMatrix& A) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("matrix market: cannot open '" + path + "' for writing");
    write_matrix_market(out, A);
}

/// Dense vectors / candidate blocks in Matrix Market array format.
inline void write_matrix_market_array(std::ostream& out, const std::vector<double>& data,
                                      long rows, long cols) {
    if (rows * cols != static_cast<long>(data.size()))
        throw std::invalid_argument("matrix market array: shape mismatch");
    out << "%%MatrixMarket matrix array real general\n";
    out << rows << " " << cols << "\n";
    out << std::setprecision(17);
    for (double v : data) out << v << "\n";  // column-major per MM convention
}

inline std::vector<double> read_matrix_market_array(std::istream& in, long& rows, long& cols) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("matrix market array: empty stream");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || format != "array")
        throw std::runtime_error("matrix market array: bad banner");
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream sizes(line);
    if (!(sizes >> rows >> cols)) throw std::runtime_error("matrix market array: bad size line");
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(rows * cols));
    double v = 0.0;
    while (static_cast<long>(data.size()) < rows * cols && (in >> v)) data.push_back(v);
    if (static_cast<long>(data.size()) != rows * cols)
        throw std::runtime_error("matrix market array: truncated data");
    return data;
}

}  // namespace amg
