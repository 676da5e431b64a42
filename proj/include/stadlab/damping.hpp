#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "stadlab/common.hpp"
#include "stadlab/geometry.hpp"

namespace stadlab {

enum class DampingKind { WingContinuous, SmoothOrderM };

/// Nonnegative damping coefficient sampled at interior nodes, with the
/// construction metadata needed to evaluate derivative bounds analytically.
struct DampingProfile {
    RealField values;          ///< a >= 0 per interior node
    DampingKind kind = DampingKind::WingContinuous;
    int m = 0;                 ///< vanishing order (SmoothOrderM only)
    double delta = 0.0;        ///< boundary-layer width (SmoothOrderM only)
    double amplitude = 0.0;    ///< layer amplitude (SmoothOrderM only)
    double a_max = 0.0;        ///< max of values
    double wing_floor = 0.0;   ///< min of a over the wing closure (metadata)
    double rect_length = 1.0;  ///< x-extent of the rectangle the layers live on
    std::vector<double> rect_x;  ///< x-coordinates of rectangle-interior columns
};

namespace detail {

/// Unique x-coordinates of interior nodes with 0 < x < Lx (rectangle part).
inline std::vector<double> rectangle_column_xs(const GridMesh& mesh) {
    std::vector<double> xs;
    int last_i = -1;
    for (const auto& [i, j] : mesh.nodes) {
        if (i == last_i) continue;
        const double x = mesh.node_x(i);
        if (x > 0.0 && x < mesh.spec.Lx) {
            xs.push_back(x);
            last_i = i;
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

inline void finalize_extremes(DampingProfile& p, const GridMesh& mesh) {
    p.a_max = p.values.size() ? p.values.maxCoeff() : 0.0;
    // Wing closure = nodes outside the open rectangle x-range. Meshes without
    // wing nodes keep the constructor's metadata value.
    double wing_min = -1.0;
    for (Eigen::Index q = 0; q < mesh.n_interior; ++q) {
        const double x = mesh.node_x(mesh.nodes[static_cast<std::size_t>(q)].first);
        if (x <= 0.0 || x >= mesh.spec.Lx) {
            const double v = p.values[q];
            wing_min = (wing_min < 0.0) ? v : std::min(wing_min, v);
        }
    }
    if (wing_min >= 0.0) p.wing_floor = wing_min;
}

}  // namespace detail

/// Damping that vanishes on the vertical strip [x_lo, x_hi] (the uncontrolled
/// bouncing-ball region), rises linearly to `floor` at the rectangle edges
/// x=0 and x=1, and equals `floor` on the wings. Depends only on x inside the
/// rectangle; continuous across the wing interface.
inline DampingProfile build_wing_damping(const GridMesh& mesh, double x_lo,
                                         double x_hi, double floor) {
    if (!(0.0 < x_lo && x_lo < x_hi && x_hi < mesh.spec.Lx))
        throw Error("build_wing_damping: empty or out-of-range strip");
    if (!(floor > 0.0)) throw Error("build_wing_damping: floor must be positive");

    DampingProfile p;
    p.kind = DampingKind::WingContinuous;
    p.wing_floor = floor;
    p.values.resize(mesh.n_interior);
    const double Lx = mesh.spec.Lx;
    for (Eigen::Index q = 0; q < mesh.n_interior; ++q) {
        const double x = mesh.node_x(mesh.nodes[static_cast<std::size_t>(q)].first);
        double a;
        if (x <= 0.0 || x >= Lx) {
            a = floor;
        } else if (x < x_lo) {
            a = floor * (x_lo - x) / x_lo;
        } else if (x > x_hi) {
            a = floor * (x - x_hi) / (Lx - x_hi);
        } else {
            a = 0.0;
        }
        p.values[q] = a;
    }
    p.rect_length = mesh.spec.Lx;
    p.rect_x = detail::rectangle_column_xs(mesh);
    detail::finalize_extremes(p, mesh);
    return p;
}

/// Damping vanishing to order m at the edges of [delta, 1-delta]:
///
///   a(x) = amplitude * ( ((delta-x)+/delta)^m + ((x-(1-delta))+/delta)^m )
///
/// inside the rectangle (independent of y), continued into the wings with the
/// constant rectangle-edge value `amplitude`. The monomial layers are C^{m-1}
/// across x = delta, 1-delta and satisfy the one-sided sign condition on the
/// m-th derivative exactly.
inline DampingProfile build_smooth_m_damping(const GridMesh& mesh, int m,
                                             double delta, double amplitude) {
    if (m < 4) throw Error("build_smooth_m_damping: vanishing order must be >= 4");
    if (!(delta > 0.0 && delta < 0.5))
        throw Error("build_smooth_m_damping: delta must lie in (0, 1/2)");
    if (!(amplitude > 0.0))
        throw Error("build_smooth_m_damping: amplitude must be positive");

    DampingProfile p;
    p.kind = DampingKind::SmoothOrderM;
    p.m = m;
    p.delta = delta;
    p.amplitude = amplitude;
    p.wing_floor = amplitude;
    p.values.resize(mesh.n_interior);
    const double Lx = mesh.spec.Lx;
    for (Eigen::Index q = 0; q < mesh.n_interior; ++q) {
        const double x = mesh.node_x(mesh.nodes[static_cast<std::size_t>(q)].first);
        double a;
        if (x <= 0.0 || x >= Lx) {
            a = amplitude;
        } else {
            const double sl = std::max(0.0, (delta - x) / delta);
            const double sr = std::max(0.0, (x - (Lx - delta)) / delta);
            a = amplitude * (std::pow(sl, m) + std::pow(sr, m));
        }
        p.values[q] = a;
    }
    p.rect_length = mesh.spec.Lx;
    p.rect_x = detail::rectangle_column_xs(mesh);
    detail::finalize_extremes(p, mesh);
    return p;
}

/// Spatially constant coefficient a == value. Degenerate continuous profile
/// used by oracle tests and uniform-damping baselines (geometric control
/// holds trivially); also the carrier for the a == 0 undamped runs.
inline DampingProfile uniform_damping(const GridMesh& mesh, double value) {
    if (value < 0.0) throw Error("uniform_damping: value must be nonnegative");
    DampingProfile p;
    p.kind = DampingKind::WingContinuous;
    p.wing_floor = value;
    p.values = RealField::Constant(mesh.n_interior, value);
    p.rect_length = mesh.spec.Lx;
    p.rect_x = detail::rectangle_column_xs(mesh);
    p.a_max = value;
    return p;
}

/// Derivative-bound constant for order-m layers:
///
///   sup_x |a^(n)(x)| / a(x)^((m-n)/m)   over the damped part of the rectangle.
///
/// Derivatives come from the closed monomial formula, never finite
/// differences (high-order differences of a function this flat are noise).
/// On one layer, a = A s^m with s the scaled distance into the layer, so
/// |a^(n)| / a^((m-n)/m) = (m!/(m-n)!) * A^(n/m) / delta^n at every x: the
/// node maximum equals the analytic constant and is grid-independent.
inline double derivative_bound_constant(const DampingProfile& profile, int n) {
    if (profile.kind != DampingKind::SmoothOrderM)
        throw Error(
            "derivative_bound_constant: profile must be a smooth order-m layer");
    if (n < 1 || n >= profile.m)
        throw Error(
            "derivative_bound_constant: derivative order must satisfy 1 <= n < m");

    const int m = profile.m;
    const double delta = profile.delta;
    const double amp = profile.amplitude;
    double falling = 1.0;  // m * (m-1) * ... * (m-n+1)
    for (int i = 0; i < n; ++i) falling *= static_cast<double>(m - i);

    double worst = 0.0;
    bool any = false;
    for (double x : profile.rect_x) {
        const double sl = std::max(0.0, (delta - x) / delta);
        const double sr =
            std::max(0.0, (x - (profile.rect_length - delta)) / delta);
        const double s = std::max(sl, sr);  // layers do not overlap (delta < 1/2)
        if (s <= 0.0) continue;             // a(x) = 0: outside the damped part
        const double a = amp * std::pow(s, m);
        const double dn = falling * amp * std::pow(s, m - n) / std::pow(delta, n);
        worst = std::max(worst, dn / std::pow(a, static_cast<double>(m - n) / m));
        any = true;
    }
    if (!any)
        throw Error(
            "derivative_bound_constant: no damped rectangle nodes on this mesh");
    return worst;
}

}  // namespace stadlab
