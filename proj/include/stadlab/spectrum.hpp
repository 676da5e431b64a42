#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

// The reference LAPACKE headers default lapack_complex_double to the C99
// complex type; override it with the layout-compatible std::complex before
// the first include so Eigen buffers pass straight through.
#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#define lapack_complex_float_real(z) ((z).real())
#define lapack_complex_float_imag(z) ((z).imag())
#define lapack_complex_double_real(z) ((z).real())
#define lapack_complex_double_imag(z) ((z).imag())
#include <lapacke.h>

#include "stadlab/common.hpp"
#include "stadlab/damping.hpp"
#include "stadlab/geometry.hpp"
#include "stadlab/resolvent2d.hpp"

namespace stadlab {

/// Generator action on a stacked pair x = (u, v):
/// A(u, v) = (v, L u + 2 i a v). Eigenvalues come in pairs (lambda,
/// -conj(lambda)) and fill the horizontal band 0 <= Im lambda <= 2 max a.
inline Field generator_apply(const GridMesh& mesh, const RealField& a,
                             const Field& x) {
    const Eigen::Index n = mesh.n_interior;
    if (a.size() != n || x.size() != 2 * n)
        throw Error("generator_apply: size mismatch");
    const Field u = x.head(n);
    const Field v = x.tail(n);
    Field out(2 * n);
    out.head(n) = v;
    Field lu = apply_laplacian(mesh, u);
    for (Eigen::Index i = 0; i < n; ++i)
        lu[i] += Complex(0.0, 2.0 * a[i]) * v[i];
    out.tail(n) = lu;
    return out;
}

/// Dense block matrix [[0, I], [L, 2 i a]] of the generator; the direct
/// route to the full spectrum at small sizes.
inline Eigen::MatrixXcd assemble_generator(const GridMesh& mesh,
                                           const RealField& a) {
    const Eigen::Index n = mesh.n_interior;
    if (a.size() != n) throw Error("assemble_generator: size mismatch");
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    A.topRightCorner(n, n).setIdentity();
    A.bottomLeftCorner(n, n) =
        Eigen::MatrixXd(assemble_laplacian(mesh)).cast<Complex>();
    for (Eigen::Index i = 0; i < n; ++i)
        A(n + i, n + i) = Complex(0.0, 2.0 * a[i]);
    return A;
}

struct SpectrumResult {
    std::vector<Complex> eigenvalues;  ///< deduplicated, sorted by (Re, Im)
    std::vector<double> residuals;     ///< scaled eigenpair residuals
    std::string method;                ///< "dense" or "shift-invert"
};

struct SpectrumOptions {
    Eigen::Index dense_dimension_limit = 4000;  ///< dense route while 2n <= this
    std::vector<Complex> targets;  ///< shift-invert seeds (needed beyond dense)
    double window_re_min = -std::numeric_limits<double>::infinity();
    double window_re_max = std::numeric_limits<double>::infinity();
    double dedup_tol = 1e-6;
    int max_iterations = 50;
};

namespace detail {

/// Scaled eigenpair residual ||A x - lambda x|| / (max(1, |lambda|) ||x||),
/// evaluated against the sparse operator action rather than any dense copy.
inline double eigenpair_residual(const GridMesh& mesh, const RealField& a,
                                 Complex lambda, const Field& x) {
    const double xn = x.norm();
    if (xn == 0.0) return std::numeric_limits<double>::infinity();
    return (generator_apply(mesh, a, x) - lambda * x).norm() /
           (std::max(1.0, std::abs(lambda)) * xn);
}

inline void sort_and_dedup(std::vector<Complex>& vals,
                           std::vector<double>& res, double tol) {
    std::vector<std::size_t> order(vals.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (vals[a].real() != vals[b].real())
            return vals[a].real() < vals[b].real();
        return vals[a].imag() < vals[b].imag();
    });
    std::vector<Complex> v2;
    std::vector<double> r2;
    for (std::size_t idx : order) {
        if (!v2.empty() && std::abs(vals[idx] - v2.back()) <= tol) {
            if (res[idx] < r2.back()) {
                v2.back() = vals[idx];
                r2.back() = res[idx];
            }
            continue;
        }
        v2.push_back(vals[idx]);
        r2.push_back(res[idx]);
    }
    vals.swap(v2);
    res.swap(r2);
}

}  // namespace detail

/// Compute generator eigenvalues inside the real-part window. Small systems
/// (2n within the dense limit) go through the full dense eigensolver; larger
/// ones run shift-invert iteration around each caller-provided target,
/// reusing the one-solve block resolvent. Every reported pair carries its
/// scaled residual against the sparse operator.
inline SpectrumResult compute_spectrum(const GridMesh& mesh,
                                       const DampingProfile& damping,
                                       const SpectrumOptions& opt = {}) {
    const Eigen::Index n = mesh.n_interior;
    SpectrumResult result;
    std::vector<Complex> vals;
    std::vector<double> res;

    if (2 * n <= opt.dense_dimension_limit) {
        result.method = "dense";
        Eigen::MatrixXcd A = assemble_generator(mesh, damping.values);
        const lapack_int dim = static_cast<lapack_int>(2 * n);
        Eigen::VectorXcd w(dim);
        Eigen::MatrixXcd V(dim, dim);
        const lapack_int info = LAPACKE_zgeev(
            LAPACK_COL_MAJOR, 'N', 'V', dim, A.data(), dim, w.data(), nullptr,
            1, V.data(), dim);
        if (info != 0)
            throw Error("compute_spectrum: dense eigenvalue solve failed "
                        "(info = " + std::to_string(info) + ")");
        for (lapack_int j = 0; j < dim; ++j) {
            const Complex lam = w[j];
            if (lam.real() < opt.window_re_min ||
                lam.real() > opt.window_re_max)
                continue;
            vals.push_back(lam);
            res.push_back(detail::eigenpair_residual(mesh, damping.values, lam,
                                                     V.col(j)));
        }
    } else {
        result.method = "shift-invert";
        if (opt.targets.empty())
            throw Error("compute_spectrum: system too large for the dense "
                        "route; provide shift-invert targets");
        for (std::size_t ti = 0; ti < opt.targets.size(); ++ti) {
            const Complex target = opt.targets[ti];
            detail::GeneratorWorkspace ws(mesh, damping, target);
            Field z = random_complex_field(2 * n,
                                           0x5EEDull ^ (0x9E3779B97F4A7C15ull *
                                                        (ti + 1)));
            z /= z.norm();
            Complex lam_prev(std::numeric_limits<double>::infinity(), 0.0);
            Complex lam = target;
            bool ok = false;
            for (int it = 0; it < opt.max_iterations; ++it) {
                z = ws.resolve(z);
                const double zn = z.norm();
                if (!(zn > 0.0) || !std::isfinite(zn))
                    throw Error("compute_spectrum: inverse iteration broke "
                                "down near target (" +
                                format_g12(target.real()) + ", " +
                                format_g12(target.imag()) + ")");
                z /= zn;
                lam = z.dot(generator_apply(mesh, damping.values, z));
                if (std::abs(lam - lam_prev) <=
                    1e-10 * std::max(1.0, std::abs(lam))) {
                    ok = true;
                    break;
                }
                lam_prev = lam;
            }
            if (!ok) continue;  // target between eigenvalues; skip, don't abort
            if (lam.real() < opt.window_re_min ||
                lam.real() > opt.window_re_max)
                continue;
            vals.push_back(lam);
            res.push_back(
                detail::eigenpair_residual(mesh, damping.values, lam, z));
        }
    }

    detail::sort_and_dedup(vals, res, opt.dedup_tol);
    result.eigenvalues = std::move(vals);
    result.residuals = std::move(res);
    return result;
}

/// Exact generator spectrum for a rectangle with constant damping c: each
/// discrete Laplacian mode mu gives the quadratic lambda^2 - 2 i c lambda -
/// mu = 0, i.e. lambda = i c +- sqrt(mu - c^2) (imaginary square root when
/// mu < c^2, putting both roots on the imaginary axis inside the band).
/// Uses the closed-form discrete eigenvalues, so the match to the computed
/// spectrum is limited only by the eigensolver, not by discretization.
inline std::vector<Complex> rectangle_constant_damping_spectrum(
    const GridMesh& mesh, double c) {
    if (mesh.spec.shape != Shape::Rectangle)
        throw Error("rectangle_constant_damping_spectrum: mesh must be a "
                    "rectangle");
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(2 * mesh.n_interior));
    for (int nx_mode = 1; nx_mode < mesh.nx; ++nx_mode)
        for (int ny_mode = 1; ny_mode < mesh.ny; ++ny_mode) {
            const double sx =
                std::sin(0.5 * nx_mode * kPi * mesh.hx / mesh.spec.Lx);
            const double sy =
                std::sin(0.5 * ny_mode * kPi * mesh.hy / mesh.spec.Ly);
            const double mu = 4.0 * sx * sx / (mesh.hx * mesh.hx) +
                              4.0 * sy * sy / (mesh.hy * mesh.hy);
            const double disc = mu - c * c;
            if (disc >= 0.0) {
                const double r = std::sqrt(disc);
                out.emplace_back(r, c);
                out.emplace_back(-r, c);
            } else {
                const double r = std::sqrt(-disc);
                out.emplace_back(0.0, c + r);
                out.emplace_back(0.0, c - r);
            }
        }
    return out;
}

/// Resolvent norm below the real axis, where the generator has no spectrum
/// and the numerical range argument promises ||(lambda - A)^-1|| <=
/// 1 / |Im lambda| in the energy norm. Precondition: Im lambda < 0.
inline NormEstimate lower_halfplane_norm(const GridMesh& mesh,
                                         const DampingProfile& damping,
                                         Complex lambda, double tol = 1e-6) {
    if (!(lambda.imag() < 0.0))
        throw Error("lower_halfplane_norm: Im lambda must be negative");
    return generator_resolvent_norm(mesh, damping, lambda, tol);
}

}  // namespace stadlab
