// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "amg/core/dense.hpp"
#include "amg/core/sparse.hpp"

namespace amg {

enum class ProblemKind {
    poisson1d,
    poisson2d,
    poisson3d,
    aniso3d,
    rotated_aniso2d,
    recirc_flow,
    upwind_transport,
    elasticity2d
};

enum class FlowFieldId { constant_angle, shear, curved };
enum class MaterialId { constant, sns, split };

struct ProblemSpec {
    ProblemKind kind = ProblemKind::poisson2d;
    index_t n = 8;   // unknowns per dimension (cells for upwind_transport)
    index_t ny = 0;  // second dimension for elasticity2d elements; 0 means n
    double eps = 1.0;
    double psi = 0.0;     // rotation angle in [0, pi)
    double nu = 0.3;      // Poisson ratio
    double young = 1.0;   // Young's modulus
    FlowFieldId flow = FlowFieldId::constant_angle;
    MaterialId material = MaterialId::sns;
};

struct Problem {
    SparseMatrix A;
    CandidateSet B{1, 1};
    std::optional<CandidateSet> B_hat;  // left candidates for non-symmetric kinds
    std::vector<double> rhs;            // boundary-consistent right-hand side
    double h = 0.0;                     // grid spacing
};

inline double half_grid_reynolds(double b_magnitude, double h, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("half_grid_reynolds: eps must be positive");
    return std::fabs(b_magnitude) * h / (2.0 * eps);
}

inline std::array<double, 2> flow_value(FlowFieldId id, double x, double y) {
    switch (id) {
        case FlowFieldId::constant_angle: {
            const double a = 2.0 * std::numbers::pi / 7.0;
            return {std::cos(a), std::sin(a)};
        }
        case FlowFieldId::shear: return {y, x};
        case FlowFieldId::curved: return {y, std::cos(std::numbers::pi * x / 2.0)};
    }
    throw std::invalid_argument("flow_value: unknown flow field");
}

inline double material_value(MaterialId id, double x, double y) {
    switch (id) {
        case MaterialId::constant: return 1.0;
        case MaterialId::sns:
            return (x >= 0.25 && x <= 0.75 && y >= 0.25 && y <= 0.75) ? 1e4 : 1e-4;
        case MaterialId::split: return x < 0.5 ? 1e-4 : 1e4;
    }
    throw std::invalid_argument("material_value: unknown material");
}

inline std::function<std::array<double, 2>(double, double)> flow_field(FlowFieldId id) {
    flow_value(id, 0.0, 0.0);
    return [id](double x, double y) { return flow_value(id, x, y); };
}

inline std::function<double(double, double)> material_field(MaterialId id) {
    material_value(id, 0.0, 0.0);
    return [id](double x, double y) { return material_value(id, x, y); };
}

namespace detail {

struct EliminationResult {
    SparseMatrix A;
    std::vector<double> rhs;
    std::vector<index_t> kept;  // old index of each kept row
};

/// Remove Dirichlet DOFs from a fully assembled operator, moving their
/// prescribed values into the right-hand side.
inline EliminationResult eliminate_dirichlet(const SparseMatrix& A, const std::vector<char>& drop,
                                             const std::vector<double>& bvals) {
    if (static_cast<index_t>(drop.size()) != A.n_rows ||
        static_cast<index_t>(bvals.size()) != A.n_rows)
        throw std::invalid_argument("eliminate_dirichlet: size mismatch");
    std::vector<index_t> newid(A.n_rows, -1);
    EliminationResult out;
    for (index_t i = 0; i < A.n_rows; ++i)
        if (!drop[i]) {
            newid[i] = static_cast<index_t>(out.kept.size());
            out.kept.push_back(i);
        }
    const index_t nk = static_cast<index_t>(out.kept.size());
    out.rhs.assign(nk, 0.0);
    std::vector<Triplet> trips;
    for (index_t i = 0; i < A.n_rows; ++i) {
        if (drop[i]) continue;
        for (index_t p = A.row_offsets[i]; p < A.row_offsets[i + 1]; ++p) {
            const index_t j = A.col_indices[p];
            if (drop[j])
                out.rhs[newid[i]] -= A.values[p] * bvals[j];
            else
                trips.push_back({newid[i], newid[j], A.values[p]});
        }
    }
    out.A = from_triplets(nk, nk, std::move(trips));
    out.A.block_size = A.block_size;
    return out;
}

inline Problem poisson_fd(index_t n, int dim, double eps_z) {
    if (n < 2) throw std::invalid_argument("generate: n must be >= 2");
    const double h = 1.0 / (n + 1);
    const double s = 1.0 / (h * h);
    const index_t total = dim == 1 ? n : (dim == 2 ? n * n : n * n * n);
    std::vector<Triplet> trips;
    const double diag = dim == 1 ? 2.0 : (dim == 2 ? 4.0 : 4.0 + 2.0 * eps_z);
    for (index_t k = 0; k < (dim == 3 ? n : 1); ++k)
        for (index_t j = 0; j < (dim >= 2 ? n : 1); ++j)
            for (index_t i = 0; i < n; ++i) {
                const index_t row = (k * (dim >= 2 ? n : 1) + j) * n + i;
                trips.push_back({row, row, diag * s});
                if (i > 0) trips.push_back({row, row - 1, -s});
                if (i + 1 < n) trips.push_back({row, row + 1, -s});
                if (dim >= 2 && j > 0) trips.push_back({row, row - n, -s});
                if (dim >= 2 && j + 1 < n) trips.push_back({row, row + n, -s});
                if (dim == 3 && k > 0) trips.push_back({row, row - n * n, -eps_z * s});
                if (dim == 3 && k + 1 < n) trips.push_back({row, row + n * n, -eps_z * s});
            }
    Problem p;
    p.A = from_triplets(total, total, std::move(trips));
    p.B = constant_candidates(total);
    p.rhs.assign(total, 0.0);
    p.h = h;
    return p;
}

/// Exact element stiffness of the bilinear quadrilateral for the constant
/// coefficient matrix M (2x2 Gauss integrates the bilinear gradients exactly;
/// the element is h-independent in 2D). Corner order SW, SE, NE, NW.
inline std::array<std::array<double, 4>, 4> bilinear_element(const Eigen::Matrix2d& M) {
    static constexpr double xi[4] = {-1.0, 1.0, 1.0, -1.0};
    static constexpr double eta[4] = {-1.0, -1.0, 1.0, 1.0};
    const double g = 1.0 / std::sqrt(3.0);
    std::array<std::array<double, 4>, 4> K{};
    for (int gx = 0; gx < 2; ++gx)
        for (int gy = 0; gy < 2; ++gy) {
            const double px = gx == 0 ? -g : g;
            const double py = gy == 0 ? -g : g;
            Eigen::Matrix<double, 2, 4> G;
            for (int a = 0; a < 4; ++a) {
                G(0, a) = 0.25 * xi[a] * (1.0 + eta[a] * py);
                G(1, a) = 0.25 * eta[a] * (1.0 + xi[a] * px);
            }
            Eigen::Matrix4d Kg = G.transpose() * M * G;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) K[a][b] += Kg(a, b);
        }
    return K;
}

inline Problem rotated_aniso_fem(index_t n, double eps, double psi) {
    if (n < 2) throw std::invalid_argument("generate: n must be >= 2");
    if (eps < 0.0) throw std::invalid_argument("generate: eps must be >= 0");
    if (psi < 0.0 || psi >= std::numbers::pi)
        throw std::invalid_argument("generate: psi must lie in [0, pi)");
    const double c = std::cos(psi), s = std::sin(psi);
    Eigen::Matrix2d M;
    M << c * c + eps * s * s, (1.0 - eps) * c * s, (1.0 - eps) * c * s, s * s + eps * c * c;
    const auto K = bilinear_element(M);

    // nodes 0..n+1 per side; interior nodes are the unknowns
    const index_t cells = n + 1;
    auto interior = [&](index_t i, index_t j) -> index_t {
        if (i < 1 || i > n || j < 1 || j > n) return -1;
        return (j - 1) * n + (i - 1);
    };
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(cells) * cells * 16);
    for (index_t cj = 0; cj < cells; ++cj)
        for (index_t ci = 0; ci < cells; ++ci) {
            const index_t ni[4] = {interior(ci, cj), interior(ci + 1, cj),
                                   interior(ci + 1, cj + 1), interior(ci, cj + 1)};
            for (int a = 0; a < 4; ++a) {
                if (ni[a] < 0) continue;
                for (int b = 0; b < 4; ++b)
                    if (ni[b] >= 0 && K[a][b] != 0.0) trips.push_back({ni[a], ni[b], K[a][b]});
            }
        }
    Problem p;
    p.A = from_triplets(n * n, n * n, std::move(trips));
    p.B = constant_candidates(n * n);
    p.rhs.assign(static_cast<std::size_t>(n) * n, 0.0);
    p.h = 1.0 / (n + 1);
    return p;
}

struct TriangleGeometry {
    double area;
    std::array<std::array<double, 2>, 3> grad;  // constant gradient of each hat function
    std::array<double, 2> centroid;
};

inline TriangleGeometry triangle_geometry(const std::array<std::array<double, 2>, 3>& v) {
    TriangleGeometry g;
    const double a2 = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) -
                      (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    g.area = 0.5 * a2;
    for (int i = 0; i < 3; ++i) {
        const auto& pn = v[(i + 1) % 3];
        const auto& pp = v[(i + 2) % 3];
        g.grad[i] = {(pn[1] - pp[1]) / a2, (pp[0] - pn[0]) / a2};
    }
    g.centroid = {(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0};
    return g;
}

/// Double-glazing convection-diffusion on [-1,1]^2: linear triangles for
/// eps grad u . grad v + (b . grad u) v, wind at centroids, u = 1 on the east
/// wall and 0 elsewhere.
inline Problem recirc_fem(index_t n, double eps) {
    if (n < 2) throw std::invalid_argument("generate: n must be >= 2");
    if (eps <= 0.0) throw std::invalid_argument("generate: eps must be positive for recirc_flow");
    const index_t nodes1d = n + 2;
    const double h = 2.0 / (n + 1);
    auto coord = [&](index_t i) { return -1.0 + h * i; };
    auto node = [&](index_t i, index_t j) { return j * nodes1d + i; };
    const index_t n_nodes = nodes1d * nodes1d;

    std::vector<Triplet> trips;
    auto add_triangle = [&](const std::array<index_t, 3>& ids) {
        std::array<std::array<double, 2>, 3> v;
        for (int a = 0; a < 3; ++a)
            v[a] = {coord(ids[a] % nodes1d), coord(ids[a] / nodes1d)};
        const TriangleGeometry g = triangle_geometry(v);
        const double bx = 2.0 * g.centroid[1] * (1.0 - g.centroid[0] * g.centroid[0]);
        const double by = -2.0 * g.centroid[0] * (1.0 - g.centroid[1] * g.centroid[1]);
        for (int a = 0; a < 3; ++a)
            for (int bb = 0; bb < 3; ++bb) {
                const double diff = eps * g.area *
                                    (g.grad[a][0] * g.grad[bb][0] + g.grad[a][1] * g.grad[bb][1]);
                const double conv = (bx * g.grad[bb][0] + by * g.grad[bb][1]) * g.area / 3.0;
                trips.push_back({ids[a], ids[bb], diff + conv});
            }
    };
    for (index_t cj = 0; cj + 1 < nodes1d; ++cj)
        for (index_t ci = 0; ci + 1 < nodes1d; ++ci) {
            add_triangle({node(ci, cj), node(ci + 1, cj), node(ci + 1, cj + 1)});
            add_triangle({node(ci, cj), node(ci + 1, cj + 1), node(ci, cj + 1)});
        }
    SparseMatrix Afull = from_triplets(n_nodes, n_nodes, std::move(trips));

    std::vector<char> drop(n_nodes, 0);
    std::vector<double> bvals(n_nodes, 0.0);
    for (index_t j = 0; j < nodes1d; ++j)
        for (index_t i = 0; i < nodes1d; ++i) {
            if (i == 0 || i == nodes1d - 1 || j == 0 || j == nodes1d - 1) {
                drop[node(i, j)] = 1;
                if (i == nodes1d - 1) bvals[node(i, j)] = 1.0;  // east wall
            }
        }
    EliminationResult red = eliminate_dirichlet(Afull, drop, bvals);
    Problem p;
    p.A = std::move(red.A);
    p.rhs = std::move(red.rhs);
    p.B = constant_candidates(p.A.n_rows);
    p.B_hat = constant_candidates(p.A.n_rows);
    p.h = h;
    return p;
}

/// First-order upwind FD of b . grad u + c u = f on n x n cells of the unit
/// square, f = 1, zero inflow eliminated. Positive wind gives dependence on
/// west/south neighbours only.
inline Problem upwind_fd(index_t n, FlowFieldId flow, MaterialId material) {
    if (n < 2) throw std::invalid_argument("generate: n must be >= 2");
    const double h = 1.0 / n;
    std::vector<Triplet> trips;
    const index_t total = n * n;
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < n; ++i) {
            const index_t row = j * n + i;
            const double x = (i + 0.5) * h, y = (j + 0.5) * h;
            const auto b = flow_value(flow, x, y);
            const double c = material_value(material, x, y);
            double diag = c;
            if (b[0] >= 0.0) {
                diag += b[0] / h;
                if (i > 0) trips.push_back({row, row - 1, -b[0] / h});
            } else {
                diag += -b[0] / h;
                if (i + 1 < n) trips.push_back({row, row + 1, b[0] / h});
            }
            if (b[1] >= 0.0) {
                diag += b[1] / h;
                if (j > 0) trips.push_back({row, row - n, -b[1] / h});
            } else {
                diag += -b[1] / h;
                if (j + 1 < n) trips.push_back({row, row + n, b[1] / h});
            }
            trips.push_back({row, row, diag});
        }
    Problem p;
    p.A = from_triplets(total, total, std::move(trips));
    p.B = constant_candidates(total);
    p.B_hat = constant_candidates(total);
    p.rhs.assign(total, 1.0);
    p.h = h;
    return p;
}

inline Eigen::Matrix3d plane_strain_matrix(double young, double nu) {
    if (nu < 0.0 || nu >= 0.5) throw std::invalid_argument("generate: nu must lie in [0, 0.5)");
    if (young <= 0.0) throw std::invalid_argument("generate: Young's modulus must be positive");
    const double f = young / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Eigen::Matrix3d D;
    D << f * (1.0 - nu), f * nu, 0.0, f * nu, f * (1.0 - nu), 0.0, 0.0, 0.0,
        f * (1.0 - 2.0 * nu) / 2.0;
    return D;
}

inline Eigen::Matrix<double, 6, 6> triangle_elastic_stiffness(
    const std::array<std::array<double, 2>, 3>& v, const Eigen::Matrix3d& D) {
    const TriangleGeometry g = triangle_geometry(v);
    Eigen::Matrix<double, 3, 6> Bm = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a) {
        Bm(0, 2 * a) = g.grad[a][0];
        Bm(1, 2 * a + 1) = g.grad[a][1];
        Bm(2, 2 * a) = g.grad[a][1];
        Bm(2, 2 * a + 1) = g.grad[a][0];
    }
    return g.area * Bm.transpose() * D * Bm;
}

}  // namespace detail

/// Plane-strain linear-triangle assembly on an nx x ny element beam (unit
/// elements) with no boundary conditions, plus the rigid body modes. The
/// operator annihilates the modes up to round-off.
inline std::pair<SparseMatrix, CandidateSet> elasticity2d_neumann(index_t nx, index_t ny,
                                                                  double young, double nu) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("elasticity2d_neumann: need >= 1 element per side");
    const Eigen::Matrix3d D = detail::plane_strain_matrix(young, nu);
    // two congruent right triangles per cell; their stiffness is position
    // independent on a uniform grid
    const auto K1 = detail::triangle_elastic_stiffness({{{0, 0}, {1, 0}, {1, 1}}}, D);
    const auto K2 = detail::triangle_elastic_stiffness({{{0, 0}, {1, 1}, {0, 1}}}, D);

    const index_t nodes_x = nx + 1, nodes_y = ny + 1;
    const index_t n_nodes = nodes_x * nodes_y;
    auto node = [&](index_t i, index_t j) { return j * nodes_x + i; };
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(nx) * ny * 72);
    auto scatter = [&](const Eigen::Matrix<double, 6, 6>& K, const std::array<index_t, 3>& ids) {
        for (int a = 0; a < 3; ++a)
            for (int ca = 0; ca < 2; ++ca)
                for (int b = 0; b < 3; ++b)
                    for (int cb = 0; cb < 2; ++cb) {
                        const double v = K(2 * a + ca, 2 * b + cb);
                        if (v != 0.0)
                            trips.push_back({2 * ids[a] + ca, 2 * ids[b] + cb, v});
                    }
    };
    for (index_t j = 0; j < ny; ++j)
        for (index_t i = 0; i < nx; ++i) {
            scatter(K1, {node(i, j), node(i + 1, j), node(i + 1, j + 1)});
            scatter(K2, {node(i, j), node(i + 1, j + 1), node(i, j + 1)});
        }
    SparseMatrix A = from_triplets(2 * n_nodes, 2 * n_nodes, std::move(trips));
    A.block_size = 2;

    CandidateSet B(2 * n_nodes, 3);
    for (index_t j = 0; j < nodes_y; ++j)
        for (index_t i = 0; i < nodes_x; ++i) {
            const index_t nd = node(i, j);
            const double x = static_cast<double>(i), y = static_cast<double>(j);
            B.at(2 * nd, 0) = 1.0;
            B.at(2 * nd + 1, 1) = 1.0;
            B.at(2 * nd, 2) = -y;
            B.at(2 * nd + 1, 2) = x;
        }
    return {std::move(A), std::move(B)};
}

inline Problem generate(const ProblemSpec& spec) {
    switch (spec.kind) {
        case ProblemKind::poisson1d: return detail::poisson_fd(spec.n, 1, 0.0);
        case ProblemKind::poisson2d: return detail::poisson_fd(spec.n, 2, 0.0);
        case ProblemKind::poisson3d: return detail::poisson_fd(spec.n, 3, 1.0);
        case ProblemKind::aniso3d: {
            if (spec.eps < 0.0) throw std::invalid_argument("generate: eps must be >= 0");
            return detail::poisson_fd(spec.n, 3, spec.eps);
        }
        case ProblemKind::rotated_aniso2d: return detail::rotated_aniso_fem(spec.n, spec.eps, spec.psi);
        case ProblemKind::recirc_flow: return detail::recirc_fem(spec.n, spec.eps);
        case ProblemKind::upwind_transport: return detail::upwind_fd(spec.n, spec.flow, spec.material);
        case ProblemKind::elasticity2d: {
            const index_t nx = spec.n, ny = spec.ny > 0 ? spec.ny : spec.n;
            auto [Afull, Bfull] = elasticity2d_neumann(nx, ny, spec.young, spec.nu);
            const index_t nodes_x = nx + 1;
            std::vector<char> drop(Afull.n_rows, 0);
            std::vector<double> bvals(Afull.n_rows, 0.0);
            for (index_t d = 0; d < Afull.n_rows; ++d)
                if ((d / 2) % nodes_x == nodes_x - 1) drop[d] = 1;  // clamp the east face
            detail::EliminationResult red = detail::eliminate_dirichlet(Afull, drop, bvals);
            Problem p;
            p.A = std::move(red.A);
            p.A.block_size = 2;
            p.rhs = std::move(red.rhs);
            p.B = CandidateSet(p.A.n_rows, 3);
            for (index_t r = 0; r < p.A.n_rows; ++r)
                for (index_t a = 0; a < 3; ++a) p.B.at(r, a) = Bfull.at(red.kept[r], a);
            p.h = 1.0;
            return p;
        }
    }
    throw std::invalid_argument("generate: unknown problem kind");
}

}  // namespace amg
