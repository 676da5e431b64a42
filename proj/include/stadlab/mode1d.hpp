#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "stadlab/common.hpp"
#include "stadlab/geometry.hpp"
#include "stadlab/power_iteration.hpp"

namespace stadlab {

/// One transverse sine mode of the rectangle problem, reduced to a 1D
/// boundary value problem on (0,1) with Dirichlet ends:
///
///   (-d2/dx2 + 2i a(x) lambda + k^2 - lambda^2) u_k = f_k + d/dx g_k
///
/// `mu` optionally overrides k^2 by the discrete transverse eigenvalue
/// 4/hy^2 sin^2(k pi hy / (2 Ly)); with that value the reduction of the
/// discrete 2D problem is exact on the lattice (the decoupling test uses it),
/// while the default k^2 is the continuum normalization of the estimates.
struct Mode1DProblem {
    int k = 1;
    double lambda = 0.0;
    RealField a_x;   ///< damping samples at interior nodes x_i = i*hx
    Field f_k;
    Field g_k;
    double hx = 0.0;
    double mu = -1.0;  ///< transverse eigenvalue; negative means use k*k
};

/// Sine-transform coefficients of a rectangle field: row k-1 holds u_k(x_i).
struct ModeDecomposition {
    Eigen::MatrixXcd coefficients;  ///< (Ny-1) x (Nx-1)
    double Ly = 0.0;
    double hx = 0.0;
    double hy = 0.0;
};

namespace detail {

/// Orthonormal transverse basis e_k(y_j) = sqrt(2/Ly) sin(k pi y_j / Ly)
/// sampled at interior rows; exactly orthonormal under the hy-weighted sum.
inline Eigen::MatrixXd sine_basis(int ny, double Ly) {
    const double hy = Ly / ny;
    Eigen::MatrixXd E(ny - 1, ny - 1);
    const double scale = std::sqrt(2.0 / Ly);
    for (int k = 1; k < ny; ++k)
        for (int j = 1; j < ny; ++j)
            E(k - 1, j - 1) = scale * std::sin(k * kPi * (j * hy) / Ly);
    return E;
}

inline Eigen::MatrixXcd rectangle_matrix(const GridMesh& mesh, const Field& u) {
    Eigen::MatrixXcd U(mesh.ny - 1, mesh.nx - 1);
    for (int i = 1; i < mesh.nx; ++i)
        for (int j = 1; j < mesh.ny; ++j)
            U(j - 1, i - 1) = u[mesh.interior_index(i, j)];
    return U;
}

}  // namespace detail

/// Expand a rectangle field in the transverse sine basis:
/// u(x_i, y_j) = sum_k u_k(x_i) e_k(y_j). Exact and exactly invertible on the
/// grid (the sampled basis is orthonormal), so Parseval holds to roundoff.
inline ModeDecomposition sine_decompose(const GridMesh& mesh, const Field& u) {
    if (mesh.spec.shape != Shape::Rectangle)
        throw Error("sine_decompose: mesh must be a rectangle");
    if (u.size() != mesh.n_interior)
        throw Error("sine_decompose: field/mesh size mismatch");
    ModeDecomposition dec;
    dec.Ly = mesh.spec.Ly;
    dec.hx = mesh.hx;
    dec.hy = mesh.hy;
    const Eigen::MatrixXd E = detail::sine_basis(mesh.ny, mesh.spec.Ly);
    dec.coefficients = (E * detail::rectangle_matrix(mesh, u)) * mesh.hy;
    return dec;
}

/// Inverse of sine_decompose.
inline Field sine_reconstruct(const GridMesh& mesh, const ModeDecomposition& dec) {
    if (mesh.spec.shape != Shape::Rectangle)
        throw Error("sine_reconstruct: mesh must be a rectangle");
    if (dec.coefficients.rows() != mesh.ny - 1 ||
        dec.coefficients.cols() != mesh.nx - 1)
        throw Error("sine_reconstruct: decomposition/mesh size mismatch");
    const Eigen::MatrixXd E = detail::sine_basis(mesh.ny, mesh.spec.Ly);
    const Eigen::MatrixXcd U = E.transpose() * dec.coefficients;
    Field u(mesh.n_interior);
    for (int i = 1; i < mesh.nx; ++i)
        for (int j = 1; j < mesh.ny; ++j)
            u[mesh.interior_index(i, j)] = U(j - 1, i - 1);
    return u;
}

/// Dense matrix of the mode operator; oracle support for the sparse solve.
inline Eigen::MatrixXcd dense_mode_operator(const Mode1DProblem& p) {
    const Eigen::Index n = p.a_x.size();
    const double w = 1.0 / (p.hx * p.hx);
    const double mass = (p.mu >= 0.0 ? p.mu : double(p.k) * p.k) -
                        p.lambda * p.lambda;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        M(i, i) = 2.0 * w + Complex(mass, 2.0 * p.a_x[i] * p.lambda);
        if (i > 0) M(i, i - 1) = -w;
        if (i + 1 < n) M(i, i + 1) = -w;
    }
    return M;
}

namespace detail {

/// RHS f + D0 g with the centered difference and zero ghost closure:
/// (D0 g)_i = (g_{i+1} - g_{i-1}) / (2 hx), g_0 = g_n = 0. This closure
/// preserves the summation-by-parts duality <D0 g, u> = -<g, D0 u> exactly,
/// which is the discrete form of the integration by parts behind the
/// derivative-side estimate.
inline Field mode_rhs(const Mode1DProblem& p) {
    const Eigen::Index n = p.f_k.size();
    Field rhs = p.f_k;
    const double w = 1.0 / (2.0 * p.hx);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex gp = (i + 1 < n) ? p.g_k[i + 1] : Complex(0.0);
        const Complex gm = (i > 0) ? p.g_k[i - 1] : Complex(0.0);
        rhs[i] += (gp - gm) * w;
    }
    return rhs;
}

inline Eigen::SparseMatrix<Complex> sparse_mode_operator(const Mode1DProblem& p) {
    const Eigen::Index n = p.a_x.size();
    const double w = 1.0 / (p.hx * p.hx);
    const double mass = (p.mu >= 0.0 ? p.mu : double(p.k) * p.k) -
                        p.lambda * p.lambda;
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(static_cast<std::size_t>(3 * n));
    for (Eigen::Index i = 0; i < n; ++i) {
        trips.emplace_back(i, i, Complex(2.0 * w + mass, 2.0 * p.a_x[i] * p.lambda));
        if (i > 0) trips.emplace_back(i, i - 1, Complex(-w));
        if (i + 1 < n) trips.emplace_back(i, i + 1, Complex(-w));
    }
    Eigen::SparseMatrix<Complex> M(n, n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

}  // namespace detail

/// Solve the per-mode boundary value problem. Throws on singular systems;
/// for modest sizes the message carries the smallest singular value of the
/// assembled operator (a real λ with a not identically zero cannot be
/// singular at continuum level, but coarse grids can degenerate).
inline Field solve_mode_bvp(const Mode1DProblem& p) {
    const Eigen::Index n = p.a_x.size();
    if (p.f_k.size() != n || p.g_k.size() != n)
        throw Error("solve_mode_bvp: data/profile size mismatch");
    if (!(p.hx > 0.0)) throw Error("solve_mode_bvp: nonpositive spacing");

    const Field rhs = detail::mode_rhs(p);
    if (rhs.norm() == 0.0) return Field::Zero(n);

    Eigen::SparseMatrix<Complex> M = detail::sparse_mode_operator(p);
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(M);
    auto report_singular = [&](const char* stage) {
        std::string msg = std::string("solve_mode_bvp: singular system (") + stage;
        if (n <= 400) {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(dense_mode_operator(p));
            msg += ", smallest singular value " +
                   format_g12(svd.singularValues()(n - 1));
        }
        msg += ")";
        throw Error(msg);
    };
    if (lu.info() != Eigen::Success) report_singular("factorization failed");
    const Field u = lu.solve(rhs);
    const double residual = (M * u - rhs).norm() / rhs.norm();
    if (!(residual < 1e-10)) report_singular("residual above 1e-10");
    return u;
}

/// L2 -> L2 operator norm of the one-dimensional stationary damped resolvent
/// R0(tau) = (-d2/dx2 + 2 i a tau - tau^2)^(-1) on (0,1), Dirichlet ends.
/// Dense route (exact largest singular value of the inverse) up to 400
/// unknowns, power iteration on R0* R0 beyond; 400 keeps the oracle exact
/// where the cubic SVD cost is still cheap.
inline double r0_operator_norm(double tau, const RealField& a_x, double hx) {
    const Eigen::Index n = a_x.size();
    if (n < 2) throw Error("r0_operator_norm: profile too short");
    Mode1DProblem p;
    p.k = 0;
    p.mu = 0.0;  // R0 carries no transverse mass term
    p.lambda = tau;
    p.a_x = a_x;
    p.hx = hx;

    if (n <= 400) {
        const Eigen::MatrixXcd M = dense_mode_operator(p);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
        const Eigen::MatrixXcd Minv = lu.inverse();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Minv);
        return svd.singularValues()(0);
    }

    Eigen::SparseMatrix<Complex> M = detail::sparse_mode_operator(p);
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success)
        throw Error("r0_operator_norm: singular discrete operator");
    // M is complex symmetric (tridiagonal real + imaginary diagonal), so the
    // adjoint solve is conj(M^-1 conj(.)) with the same factorization.
    auto apply = [&](const Field& v) -> Field { return lu.solve(v); };
    auto apply_adj = [&](const Field& v) -> Field {
        return lu.solve(v.conjugate()).conjugate();
    };
    auto nrm = [](const Field& v) { return v.norm(); };
    const auto r = singular_norm_power_iteration(n, apply, apply_adj, nrm,
                                                 0x5EEDull, 1e-6, 200);
    if (!r.converged)
        throw Error("r0_operator_norm: power iteration did not converge "
                    "(last relative change " + format_g12(r.last_change) + ")");
    return r.norm;
}

/// Worst ratio of the high-mode a-priori estimate over random trials.
///
/// For each trial draw complex f_k, g_k, solve the mode problem, and form
///
///   max(||D+ u||, ||u||) / (||f|| + ||g||),
///
/// where D+ is the forward difference including both boundary segments.
/// The derivative term is what the energy estimate bounds (with constant
/// about 2 after Poincare); since the discrete Poincare constant on (0,1)
/// is below 1, this quantity dominates the plain L2 ratio and, unlike it,
/// is k-uniform — the substance of the high-mode estimate.
inline double high_mode_check(int k, double lambda, int trials,
                              const RealField& a_x, double hx,
                              std::uint64_t seed = 0x5EEDull) {
    if (k < std::abs(lambda))
        throw Error("high_mode_check: high-mode regime requires k >= |lambda|");
    if (trials < 1) throw Error("high_mode_check: trials must be >= 1");
    const Eigen::Index n = a_x.size();
    std::mt19937_64 eng(seed);
    auto draw = [&]() -> Field {
        Field v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = Complex(2.0 * unit_double(eng()) - 1.0,
                           2.0 * unit_double(eng()) - 1.0);
        return v;
    };

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Mode1DProblem p;
        p.k = k;
        p.lambda = lambda;
        p.a_x = a_x;
        p.hx = hx;
        p.f_k = draw();
        p.g_k = draw();
        const Field u = solve_mode_bvp(p);

        double dsum = std::norm(u[0]);  // segment from the left boundary
        for (Eigen::Index i = 0; i + 1 < n; ++i) dsum += std::norm(u[i + 1] - u[i]);
        dsum += std::norm(u[n - 1]);    // segment to the right boundary
        const double du_norm = std::sqrt(dsum / hx);  // ||D+ u|| with h-weight
        const double u_norm = u.norm() * std::sqrt(hx);
        const double data_norm =
            (p.f_k.norm() + p.g_k.norm()) * std::sqrt(hx);
        worst = std::max(worst, std::max(du_norm, u_norm) / data_norm);
    }
    return worst;
}

}  // namespace stadlab
