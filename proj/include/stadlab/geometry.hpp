#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "stadlab/common.hpp"

namespace stadlab {

/// Domain shapes. A Stadium is the concrete partially rectangular instance:
/// the rectangle [0,1] x [0,2*beta] with two half-discs of radius beta glued
/// to the vertical sides. RectangleWithWings is reserved for other wing
/// geometries; the stadium is the only wing instance constructed here.
enum class Shape { Rectangle, Stadium, RectangleWithWings };

struct DomainSpec {
    Shape shape = Shape::Rectangle;
    double Lx = 1.0;    ///< rectangle x-extent
    double Ly = kPi;    ///< rectangle y-extent (2*beta for the stadium)
    double beta = 0.0;  ///< wing radius / half-height (Stadium only)
};

/// Uniform-lattice discretization with an interior mask.
///
/// Nodes sit at (x0 + i*hx, y0 + j*hy) for i in [0,nx], j in [0,ny]. The
/// requested spacing h is adjusted downward per axis to the nearest exact
/// divisor of that axis extent (Nx*hx = Lx, Ny*hy = Ly), so domain edges
/// land exactly on grid lines; hx and hy then differ by O(h^2/L) and all
/// quadrature uses the hx*hy cell weight. Interior nodes are the unknowns;
/// any 5-point neighbor outside the mask is a homogeneous Dirichlet ghost.
struct GridMesh {
    DomainSpec spec;
    double h = 0.0;   ///< nominal requested spacing
    double hx = 0.0;  ///< actual x spacing
    double hy = 0.0;  ///< actual y spacing
    int nx = 0;       ///< lattice cells along x (nodes: nx+1)
    int ny = 0;       ///< lattice cells along y (nodes: ny+1)
    double x0 = 0.0;  ///< x coordinate of lattice node i=0
    double y0 = 0.0;  ///< y coordinate of lattice node j=0
    std::vector<std::int32_t> index_map;        ///< lattice -> interior index or -1
    std::vector<std::pair<int, int>> nodes;     ///< interior index -> (i, j)
    Eigen::Index n_interior = 0;

    double node_x(int i) const { return x0 + i * hx; }
    double node_y(int j) const { return y0 + j * hy; }

    /// Interior index of lattice node (i,j), or -1 for boundary/exterior/ghost.
    int interior_index(int i, int j) const {
        if (i < 0 || j < 0 || i > nx || j > ny) return -1;
        return index_map[static_cast<std::size_t>(i) * (ny + 1) + j];
    }

    /// Monte-Carlo-free area proxy: one cell per interior node.
    double area_estimate() const {
        return static_cast<double>(n_interior) * hx * hy;
    }
};

namespace detail {

/// Cells needed so that length/cells <= h, with a 1e-9 relative allowance so
/// spacings that already divide the length exactly are not split further.
inline int axis_cells(double length, double h) {
    return static_cast<int>(std::ceil(length / h * (1.0 - 1e-9)));
}

inline void finalize_mask(GridMesh& mesh, const std::vector<bool>& inside) {
    const std::size_t n_lattice =
        static_cast<std::size_t>(mesh.nx + 1) * (mesh.ny + 1);
    mesh.index_map.assign(n_lattice, -1);
    mesh.nodes.clear();
    std::int32_t next = 0;
    for (int i = 0; i <= mesh.nx; ++i) {
        for (int j = 0; j <= mesh.ny; ++j) {
            const std::size_t l = static_cast<std::size_t>(i) * (mesh.ny + 1) + j;
            if (inside[l]) {
                mesh.index_map[l] = next++;
                mesh.nodes.emplace_back(i, j);
            }
        }
    }
    mesh.n_interior = next;
}

}  // namespace detail

/// Open rectangle (0,Lx) x (0,Ly) with Dirichlet boundary on all four sides.
inline GridMesh build_rectangle(double Lx, double Ly, double h) {
    if (!(Lx > 0.0) || !(Ly > 0.0))
        throw Error("build_rectangle: domain extents must be positive");
    if (!(h > 0.0) || h >= std::min(Lx, Ly) / 2.0)
        throw Error("build_rectangle: spacing too coarse (need h < min(Lx,Ly)/2)");

    GridMesh mesh;
    mesh.spec = DomainSpec{Shape::Rectangle, Lx, Ly, 0.0};
    mesh.h = h;
    mesh.nx = detail::axis_cells(Lx, h);
    mesh.ny = detail::axis_cells(Ly, h);
    mesh.hx = Lx / mesh.nx;
    mesh.hy = Ly / mesh.ny;
    mesh.x0 = 0.0;
    mesh.y0 = 0.0;

    std::vector<bool> inside(static_cast<std::size_t>(mesh.nx + 1) * (mesh.ny + 1), false);
    for (int i = 1; i < mesh.nx; ++i)
        for (int j = 1; j < mesh.ny; ++j)
            inside[static_cast<std::size_t>(i) * (mesh.ny + 1) + j] = true;
    detail::finalize_mask(mesh, inside);
    return mesh;
}

/// Bunimovich stadium: rectangle [0,1] x [0,2*beta] plus half-discs of radius
/// beta centered at (0,beta) and (1,beta). The curved boundary is realized by
/// a node-center inclusion test (staircase); the straight top and bottom edges
/// are Dirichlet-exact grid lines. The lattice is anchored so x=0 and x=1 are
/// grid lines: the wing strips carry ceil(beta/hx) extra cells on each side.
inline GridMesh build_stadium(double beta, double h) {
    if (!(beta > 0.0)) throw Error("build_stadium: beta must be positive");
    if (!(h > 0.0) || h >= beta / 4.0)
        throw Error("build_stadium: spacing too coarse (need h < beta/4)");

    GridMesh mesh;
    mesh.spec = DomainSpec{Shape::Stadium, 1.0, 2.0 * beta, beta};
    mesh.h = h;
    const int nx_rect = detail::axis_cells(1.0, h);
    mesh.hx = 1.0 / nx_rect;
    const int ext = static_cast<int>(std::ceil(beta / mesh.hx));
    mesh.nx = nx_rect + 2 * ext;
    mesh.ny = detail::axis_cells(2.0 * beta, h);
    mesh.hy = 2.0 * beta / mesh.ny;
    mesh.x0 = -ext * mesh.hx;
    mesh.y0 = 0.0;

    std::vector<bool> inside(static_cast<std::size_t>(mesh.nx + 1) * (mesh.ny + 1), false);
    for (int i = 0; i <= mesh.nx; ++i) {
        const int i_rect = i - ext;  // integer offset from the x=0 grid line
        const double x = mesh.node_x(i);
        for (int j = 1; j < mesh.ny; ++j) {
            bool in;
            if (i_rect >= 0 && i_rect <= nx_rect) {
                in = true;  // closed rectangle strip, y strictly interior
            } else {
                const double cx = (i_rect < 0) ? 0.0 : 1.0;
                const double dx = x - cx;
                const double dy = mesh.node_y(j) - beta;
                in = dx * dx + dy * dy < beta * beta;
            }
            if (in) inside[static_cast<std::size_t>(i) * (mesh.ny + 1) + j] = true;
        }
    }
    detail::finalize_mask(mesh, inside);
    return mesh;
}

/// Apply the (positive-definite) 5-point Dirichlet Laplacian: out-of-mask
/// neighbors contribute ghost value 0. Sign convention: this is the operator
/// whose quadratic form is the discrete H1 seminorm, eigenvalues > 0.
inline Field apply_laplacian(const GridMesh& mesh, const Field& u) {
    if (u.size() != mesh.n_interior)
        throw Error("apply_laplacian: field/mesh size mismatch");
    Field out(mesh.n_interior);
    const double wx = 1.0 / (mesh.hx * mesh.hx);
    const double wy = 1.0 / (mesh.hy * mesh.hy);
    for (Eigen::Index p = 0; p < mesh.n_interior; ++p) {
        const auto [i, j] = mesh.nodes[static_cast<std::size_t>(p)];
        Complex acc = (2.0 * wx + 2.0 * wy) * u[p];
        int q;
        if ((q = mesh.interior_index(i - 1, j)) >= 0) acc -= wx * u[q];
        if ((q = mesh.interior_index(i + 1, j)) >= 0) acc -= wx * u[q];
        if ((q = mesh.interior_index(i, j - 1)) >= 0) acc -= wy * u[q];
        if ((q = mesh.interior_index(i, j + 1)) >= 0) acc -= wy * u[q];
        out[p] = acc;
    }
    return out;
}

/// Sparse matrix of the same operator, for direct factorizations and oracles.
inline Eigen::SparseMatrix<double> assemble_laplacian(const GridMesh& mesh) {
    const double wx = 1.0 / (mesh.hx * mesh.hx);
    const double wy = 1.0 / (mesh.hy * mesh.hy);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(5 * mesh.n_interior));
    for (Eigen::Index p = 0; p < mesh.n_interior; ++p) {
        const auto [i, j] = mesh.nodes[static_cast<std::size_t>(p)];
        trips.emplace_back(p, p, 2.0 * wx + 2.0 * wy);
        int q;
        if ((q = mesh.interior_index(i - 1, j)) >= 0) trips.emplace_back(p, q, -wx);
        if ((q = mesh.interior_index(i + 1, j)) >= 0) trips.emplace_back(p, q, -wx);
        if ((q = mesh.interior_index(i, j - 1)) >= 0) trips.emplace_back(p, q, -wy);
        if ((q = mesh.interior_index(i, j + 1)) >= 0) trips.emplace_back(p, q, -wy);
    }
    Eigen::SparseMatrix<double> L(mesh.n_interior, mesh.n_interior);
    L.setFromTriplets(trips.begin(), trips.end());
    return L;
}

/// L2 norm with the hx*hy quadrature weight.
inline double grid_norm(const GridMesh& mesh, const Field& u) {
    return u.norm() * std::sqrt(mesh.hx * mesh.hy);
}

/// L2 inner product <u,v> = sum u_i conj(v_i) * hx*hy.
inline Complex grid_dot(const GridMesh& mesh, const Field& u, const Field& v) {
    return (v.dot(u)) * (mesh.hx * mesh.hy);  // Eigen dot conjugates its callee
}

}  // namespace stadlab
