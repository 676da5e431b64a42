#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "stadlab/common.hpp"
#include "stadlab/damping.hpp"
#include "stadlab/fitting.hpp"
#include "stadlab/geometry.hpp"
#include "stadlab/power_iteration.hpp"

namespace stadlab {

namespace detail {

inline std::atomic<double>& identity_residual_slot() {
    static std::atomic<double> slot{0.0};
    return slot;
}

inline void note_identity_residual(double r) {
    auto& slot = identity_residual_slot();
    double cur = slot.load(std::memory_order_relaxed);
    while (r > cur &&
           !slot.compare_exchange_weak(cur, r, std::memory_order_relaxed)) {
    }
}

}  // namespace detail

/// Largest normalized imaginary-part-identity residual seen by any
/// stationary 2D solve since the last reset (thread-safe running maximum).
inline double worst_identity_residual() {
    return detail::identity_residual_slot().load(std::memory_order_relaxed);
}

inline void reset_identity_residual() {
    detail::identity_residual_slot().store(0.0, std::memory_order_relaxed);
}

/// Factorized stationary operator M(lambda) = L + 2i a lambda - lambda^2
/// on the interior nodes of a mesh (L is the positive Dirichlet Laplacian).
/// The system keeps the assembled matrix for residual checks and reuses one
/// factorization for both direct and adjoint solves: M is complex symmetric
/// (real symmetric L plus a complex diagonal), so M^-* z = conj(M^-1 conj z).
struct HelmholtzSystem {
    const GridMesh* mesh = nullptr;
    RealField a;
    Complex lambda{0.0, 0.0};
    Eigen::SparseMatrix<Complex> matrix;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>> lu;
};

/// Assemble and factorize M(lambda). Throws if the factorization fails
/// (lambda at or numerically indistinguishable from a pencil eigenvalue).
/// The mesh must outlive the returned system.
inline HelmholtzSystem make_helmholtz(const GridMesh& mesh,
                                      const DampingProfile& damping,
                                      Complex lambda) {
    if (damping.values.size() != mesh.n_interior)
        throw Error("make_helmholtz: damping/mesh size mismatch");
    HelmholtzSystem sys;
    sys.mesh = &mesh;
    sys.a = damping.values;
    sys.lambda = lambda;
    Eigen::SparseMatrix<double> L = assemble_laplacian(mesh);
    sys.matrix = L.cast<Complex>();
    const Complex lam2 = lambda * lambda;
    for (Eigen::Index i = 0; i < mesh.n_interior; ++i)
        sys.matrix.coeffRef(i, i) += Complex(0.0, 2.0 * sys.a[i]) * lambda - lam2;
    sys.matrix.makeCompressed();
    sys.lu = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<Complex>>>();
    sys.lu->compute(sys.matrix);
    if (sys.lu->info() != Eigen::Success)
        throw Error("make_helmholtz: factorization failed at lambda = (" +
                    format_g12(lambda.real()) + ", " +
                    format_g12(lambda.imag()) + ")");
    return sys;
}

/// Solve M u = f. Checks the algebraic residual, and for real lambda also
/// evaluates the imaginary-part identity
///
///   lambda * sum a |u|^2 w  =  (1/2) Im sum f conj(u) w,
///
/// which every exact solution satisfies identically (take the imaginary part
/// of <M u, u>). Its normalized residual feeds the global running maximum so
/// a whole run can certify all of its stationary solves at once.
inline Field helmholtz_solve(const HelmholtzSystem& sys, const Field& f) {
    if (f.size() != sys.matrix.rows())
        throw Error("helmholtz_solve: data size mismatch");
    const double fn = f.norm();
    if (fn == 0.0) return Field::Zero(f.size());
    Field u = sys.lu->solve(f);
    const double res = (sys.matrix * u - f).norm() / fn;
    if (!(res < 1e-9))
        throw Error("helmholtz_solve: solve residual " + format_g12(res) +
                    " above 1e-9");
    if (sys.lambda.imag() == 0.0 && sys.lambda.real() != 0.0) {
        const double w = sys.mesh->hx * sys.mesh->hy;
        const double absorbed =
            sys.lambda.real() *
            (sys.a.array() * u.array().abs2()).sum() * w;
        const double flux = 0.5 * std::imag(grid_dot(*sys.mesh, f, u));
        const double un = u.norm() * std::sqrt(w);
        const double fnw = fn * std::sqrt(w);
        const double denom = std::max(fnw * un,
                                      std::numeric_limits<double>::min());
        detail::note_identity_residual(std::abs(absorbed - flux) / denom);
    }
    return u;
}

/// Solve M^* w = z using the complex-symmetry trick on the same
/// factorization. Residual-checked like the direct solve.
inline Field helmholtz_solve_adjoint(const HelmholtzSystem& sys, const Field& z) {
    if (z.size() != sys.matrix.rows())
        throw Error("helmholtz_solve_adjoint: data size mismatch");
    const double zn = z.norm();
    if (zn == 0.0) return Field::Zero(z.size());
    Field w = sys.lu->solve(z.conjugate()).conjugate();
    const double res =
        ((sys.matrix * w.conjugate()).conjugate() - z).norm() / zn;
    if (!(res < 1e-9))
        throw Error("helmholtz_solve_adjoint: solve residual " +
                    format_g12(res) + " above 1e-9");
    return w;
}

/// One-shot stationary solve at real lambda.
inline Field solve_helmholtz(const GridMesh& mesh, const DampingProfile& damping,
                             double lambda, const Field& f) {
    return helmholtz_solve(make_helmholtz(mesh, damping, Complex(lambda, 0.0)), f);
}

/// Result of a power-iteration norm estimate.
struct NormEstimate {
    double norm = 0.0;
    int iterations = 0;
    double last_change = 0.0;
};

/// L2 -> L2 operator norm of M(lambda)^-1 by power iteration on the
/// normal operator (one factorization, direct + adjoint solves). Throws on
/// non-convergence, reporting the relative change between the last two
/// iterates so the caller can judge how far the estimate had stabilized.
inline NormEstimate resolvent_norm(const GridMesh& mesh,
                                   const DampingProfile& damping, double lambda,
                                   double tol = 1e-6,
                                   std::uint64_t seed = 0x5EEDull,
                                   int max_iterations = 200) {
    const HelmholtzSystem sys =
        make_helmholtz(mesh, damping, Complex(lambda, 0.0));
    auto apply = [&](const Field& v) { return helmholtz_solve(sys, v); };
    auto apply_adj = [&](const Field& v) {
        return helmholtz_solve_adjoint(sys, v);
    };
    auto nrm = [](const Field& v) { return v.norm(); };
    const auto r = singular_norm_power_iteration(
        mesh.n_interior, apply, apply_adj, nrm, seed, tol, max_iterations);
    if (!r.converged)
        throw Error("resolvent_norm: power iteration did not converge at "
                    "lambda = " + format_g12(lambda) +
                    " (last two iterates' ratio differs by " +
                    format_g12(r.last_change) + ")");
    return NormEstimate{r.norm, r.iterations, r.last_change};
}

/// One frequency of a resolvent sweep. `residual` is the final relative
/// change of the norm iteration; failed entries keep the error text and are
/// skipped by the fit instead of aborting the sweep.
struct SweepEntry {
    double lambda = 0.0;
    double norm = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepEntry> entries;
    FitReport fit;
    bool fitted = false;
};

struct SweepOptions {
    double tol = 1e-6;
    double window_lo = 5.0;  ///< fit only lambda >= this (transient excluded)
    double window_hi = std::numeric_limits<double>::infinity();
    int jobs = 1;
    std::uint64_t seed = 0x5EEDull;
    /// Power-iteration cap per frequency. Damping profiles that cluster the
    /// top singular values (constant damping is the extreme case) converge
    /// slowly and may need several thousand round trips.
    int max_iterations = 200;
};

/// Estimate ||M(lambda)^-1|| across frequencies and fit norm ~ lambda^alpha
/// over the window. Entries run independently (optionally in parallel, one
/// factorization each); the fit uses the surviving entries and is marked
/// absent rather than fatal when fewer than three fall in the window.
inline SweepResult sweep_and_fit(const GridMesh& mesh,
                                 const DampingProfile& damping,
                                 const std::vector<double>& lambdas,
                                 const SweepOptions& opt = {}) {
    SweepResult result;
    result.entries.resize(lambdas.size());
    parallel_for(static_cast<int>(lambdas.size()), opt.jobs, [&](int i) {
        SweepEntry& e = result.entries[static_cast<std::size_t>(i)];
        e.lambda = lambdas[static_cast<std::size_t>(i)];
        try {
            const NormEstimate est =
                resolvent_norm(mesh, damping, e.lambda, opt.tol,
                               opt.seed ^ static_cast<std::uint64_t>(i),
                               opt.max_iterations);
            e.norm = est.norm;
            e.iterations = est.iterations;
            e.residual = est.last_change;
        } catch (const std::exception& ex) {
            e.failed = true;
            e.error = ex.what();
        }
    });
    std::vector<double> xs, ys;
    for (const SweepEntry& e : result.entries)
        if (!e.failed) {
            xs.push_back(e.lambda);
            ys.push_back(e.norm);
        }
    try {
        result.fit = fit_power_law(xs, ys, opt.window_lo, opt.window_hi);
        result.fitted = true;
    } catch (const Error&) {
        result.fitted = false;
    }
    return result;
}

namespace detail {

/// Shared pieces of the first-order (generator) resolvent: the stiffness
/// matrix both as the energy weight and as a factorized SPD solve, plus the
/// factorized stationary operator. The generator acts on pairs x = (u, v)
/// stacked into one vector, with energy inner product
/// <(u,v),(p,q)> = (<L u, p> + <v, q>) hx hy.
struct GeneratorWorkspace {
    const GridMesh* mesh = nullptr;
    RealField a;
    Complex lambda{0.0, 0.0};
    Eigen::SparseMatrix<Complex> Lc;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> stiff;
    HelmholtzSystem helm;
    Eigen::Index n = 0;

    GeneratorWorkspace(const GridMesh& m, const DampingProfile& damping,
                       Complex lam)
        : mesh(&m), a(damping.values), lambda(lam), n(m.n_interior) {
        Eigen::SparseMatrix<double> L = assemble_laplacian(m);
        Lc = L.cast<Complex>();
        stiff.compute(L);
        if (stiff.info() != Eigen::Success)
            throw Error("generator resolvent: stiffness factorization failed");
        helm = make_helmholtz(m, damping, lam);
    }

    double energy_norm(const Field& x) const {
        const Field u = x.head(n);
        const Field v = x.tail(n);
        const double w = mesh->hx * mesh->hy;
        const double stiff_part = u.dot(Lc * u).real();
        return std::sqrt(std::max(0.0, stiff_part) + v.squaredNorm()) *
               std::sqrt(w);
    }

    /// (lambda - A)^-1 (f, g) with A(u,v) = (v, L u + 2 i a v):
    /// eliminate v = lambda u - f, leaving M(lambda) u = (2ia - lambda) f - g.
    Field resolve(const Field& x) const {
        const Field f = x.head(n);
        const Field g = x.tail(n);
        Field rhs(n);
        for (Eigen::Index i = 0; i < n; ++i)
            rhs[i] = (Complex(0.0, 2.0 * a[i]) - lambda) * f[i] - g[i];
        const Field u = helmholtz_solve(helm, rhs);
        Field out(2 * n);
        out.head(n) = u;
        out.tail(n) = lambda * u - f;
        return out;
    }

    /// Energy-space adjoint of resolve: conjugate the block transpose by the
    /// weight diag(L, I). One adjoint stationary solve plus one SPD solve.
    Field resolve_adjoint(const Field& y) const {
        const Field p = y.head(n);
        const Field q = y.tail(n);
        const Field w1 =
            helmholtz_solve_adjoint(helm, Lc * p + std::conj(lambda) * q);
        Field r1(n);
        for (Eigen::Index i = 0; i < n; ++i)
            r1[i] = std::conj(Complex(0.0, 2.0 * a[i]) - lambda) * w1[i] - q[i];
        // L is real, so the complex SPD solve splits into two real solves.
        const RealField re = stiff.solve(r1.real());
        const RealField im = stiff.solve(r1.imag());
        Field out(2 * n);
        out.head(n) = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
        out.tail(n) = -w1;
        return out;
    }

    /// (lambda - A) applied to a stacked pair; oracle for resolve().
    Field forward(const Field& x) const {
        const Field u = x.head(n);
        const Field v = x.tail(n);
        Field out(2 * n);
        out.head(n) = lambda * u - v;
        Field av(n);
        for (Eigen::Index i = 0; i < n; ++i)
            av[i] = Complex(0.0, 2.0 * a[i]) * v[i];
        out.tail(n) = lambda * v - (Lc * u + av);
        return out;
    }
};

}  // namespace detail

/// Energy-norm operator bound ||(lambda - A)^-1|| of the first-order
/// generator A(u,v) = (v, L u + 2 i a v) by power iteration in the energy
/// inner product. All spectrum of A lies in the closed upper half plane, so
/// for Im lambda < 0 the numerical range gives the exact discrete bound
/// 1 / |Im lambda|; real lambda probes the resolvent along the axis itself.
inline NormEstimate generator_resolvent_norm(const GridMesh& mesh,
                                             const DampingProfile& damping,
                                             Complex lambda, double tol = 1e-6,
                                             std::uint64_t seed = 0x5EEDull) {
    const detail::GeneratorWorkspace ws(mesh, damping, lambda);
    auto apply = [&](const Field& x) { return ws.resolve(x); };
    auto apply_adj = [&](const Field& y) { return ws.resolve_adjoint(y); };
    auto nrm = [&](const Field& x) { return ws.energy_norm(x); };
    const auto r = singular_norm_power_iteration(2 * mesh.n_interior, apply,
                                                 apply_adj, nrm, seed, tol, 200);
    if (!r.converged)
        throw Error("generator_resolvent_norm: power iteration did not "
                    "converge (last two iterates' ratio differs by " +
                    format_g12(r.last_change) + ")");
    return NormEstimate{r.norm, r.iterations, r.last_change};
}

/// Round-trip defect of the block elimination: apply (lambda - A)^-1 to a
/// random pair, then (lambda - A), and measure the energy-norm misfit
/// against the input. Zero in exact arithmetic for any lambda off the
/// spectrum, so this certifies the one-solve block formula end to end.
inline double block_identity_residual(const GridMesh& mesh,
                                      const DampingProfile& damping,
                                      Complex lambda,
                                      std::uint64_t seed = 0x5EEDull) {
    const detail::GeneratorWorkspace ws(mesh, damping, lambda);
    const Field x = random_complex_field(2 * mesh.n_interior, seed);
    const Field back = ws.forward(ws.resolve(x));
    return ws.energy_norm(back - x) / ws.energy_norm(x);
}

}  // namespace stadlab
