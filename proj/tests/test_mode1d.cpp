#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "stadlab/common.hpp"
#include "stadlab/damping.hpp"
#include "stadlab/geometry.hpp"
#include "stadlab/mode1d.hpp"
#include "stadlab/resolvent2d.hpp"

using namespace stadlab;

namespace {

/// Damping profile of the 1D wing layout: linear ramps outside [0.15, 0.85],
/// zero on the central strip, sampled at x_i = i*hx, i = 1..n.
RealField wing_profile_1d(Eigen::Index n) {
    const double hx = 1.0 / static_cast<double>(n + 1);
    RealField a(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = (i + 1) * hx;
        if (x < 0.15) a[i] = (0.15 - x) / 0.15;
        else if (x > 0.85) a[i] = (x - 0.85) / 0.15;
        else a[i] = 0.0;
    }
    return a;
}

}  // namespace

TEST_CASE("sine transform isolates a single transverse mode", "[mode1d]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 16.0);
    const int k = 3;
    Field u(mesh.n_interior);
    auto g = [](double x) { return x * (1.0 - x); };
    for (Eigen::Index q = 0; q < mesh.n_interior; ++q) {
        const auto [i, j] = mesh.nodes[static_cast<std::size_t>(q)];
        u[q] = g(mesh.node_x(i)) * std::sin(k * mesh.node_y(j));
    }
    const ModeDecomposition dec = sine_decompose(mesh, u);
    // sin(k y) = sqrt(Ly/2) e_k, so the k-th coefficient is sqrt(pi/2) g(x)
    const double scale = std::sqrt(0.5 * kPi);
    for (int i = 1; i < mesh.nx; ++i) {
        const double x = mesh.node_x(i);
        CHECK(std::abs(dec.coefficients(k - 1, i - 1) - scale * g(x)) <= 1e-12);
        for (int l = 1; l < mesh.ny; ++l)
            if (l != k) CHECK(std::abs(dec.coefficients(l - 1, i - 1)) <= 1e-12);
    }
}

TEST_CASE("sine transform round-trips and preserves the norm", "[mode1d]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 12.0);
    const Field u = random_complex_field(mesh.n_interior, 7);
    const ModeDecomposition dec = sine_decompose(mesh, u);
    const Field back = sine_reconstruct(mesh, dec);
    CHECK((back - u).norm() <= 1e-12 * u.norm());
    // Parseval under the grid quadrature: sum_k ||u_k||^2 hx = ||u||^2 hx hy
    double sum = 0.0;
    for (Eigen::Index k = 0; k < dec.coefficients.rows(); ++k)
        sum += dec.coefficients.row(k).squaredNorm() * mesh.hx;
    const double full = grid_norm(mesh, u) * grid_norm(mesh, u);
    CHECK(sum == Catch::Approx(full).epsilon(1e-12));

    const GridMesh stadium = build_stadium(0.5 * kPi, kPi / 16.0);
    CHECK_THROWS_AS(
        sine_decompose(stadium, random_complex_field(stadium.n_interior, 1)),
        Error);
}

TEST_CASE("mode solve inverts the assembled operator exactly", "[mode1d]") {
    const Eigen::Index n = 50;
    Mode1DProblem p;
    p.k = 3;
    p.lambda = 2.5;
    p.hx = 1.0 / static_cast<double>(n + 1);
    p.a_x.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        p.a_x[i] = 0.3 + 0.2 * std::sin(kPi * (i + 1) * p.hx);
    const Field u_exact = random_complex_field(n, 21);
    p.f_k = dense_mode_operator(p) * u_exact;
    p.g_k = Field::Zero(n);
    const Field u = solve_mode_bvp(p);
    CHECK((u - u_exact).norm() <= 1e-10 * u_exact.norm());
}

TEST_CASE("mode solve with derivative data matches a dense oracle",
          "[mode1d]") {
    const Eigen::Index n = 60;
    Mode1DProblem p;
    p.k = 5;
    p.lambda = 4.0;
    p.hx = 1.0 / static_cast<double>(n + 1);
    p.a_x = RealField::Constant(n, 0.8);
    p.f_k = random_complex_field(n, 31);
    p.g_k = random_complex_field(n, 32);
    const Field u = solve_mode_bvp(p);
    const Field rhs = detail::mode_rhs(p);
    const Field oracle =
        Eigen::FullPivLU<Eigen::MatrixXcd>(dense_mode_operator(p)).solve(rhs);
    CHECK((u - oracle).norm() <= 1e-10 * oracle.norm());
}

TEST_CASE("centered derivative closure is skew under summation", "[mode1d]") {
    // <D0 g, u> = -<g, D0 u> with zero ghosts on both ends: the discrete
    // integration by parts the derivative-data estimate relies on.
    const Eigen::Index n = 40;
    Mode1DProblem p;
    p.hx = 1.0 / static_cast<double>(n + 1);
    p.a_x = RealField::Zero(n);
    p.f_k = Field::Zero(n);
    p.g_k = random_complex_field(n, 41);
    const Field u = random_complex_field(n, 42);
    const Field d0g = detail::mode_rhs(p);  // f = 0 leaves exactly D0 g
    Field d0u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex up = (i + 1 < n) ? u[i + 1] : Complex(0.0);
        const Complex um = (i > 0) ? u[i - 1] : Complex(0.0);
        d0u[i] = (up - um) / (2.0 * p.hx);
    }
    const Complex lhs = u.dot(d0g);   // sum d0g conj(u)
    const Complex rhs = -d0u.dot(p.g_k);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * d0g.norm() * u.norm());
}

TEST_CASE("stationary norm at tau = 0 is the inverse lowest frequency",
          "[mode1d]") {
    const Eigen::Index n = 200;
    const double hx = 1.0 / static_cast<double>(n + 1);
    const RealField a = RealField::Ones(n);
    const double s1 = std::sin(0.5 * kPi * hx);
    const double mu1 = 4.0 * s1 * s1 / (hx * hx);
    CHECK(r0_operator_norm(0.0, a, hx) ==
          Catch::Approx(1.0 / mu1).epsilon(1e-10));
}

TEST_CASE("stationary norms reproduce frozen reference values", "[mode1d]") {
    // Constant damping a == 1 on 200 interior nodes; values pinned from the
    // dense SVD route, so any regression in assembly, inversion, or the
    // norm definition shows up as a mismatch.
    const Eigen::Index n = 200;
    const double hx = 1.0 / static_cast<double>(n + 1);
    const RealField a = RealField::Ones(n);
    CHECK(r0_operator_norm(1.0, a, hx) ==
          Catch::Approx(0.1099855681).epsilon(1e-8));
    CHECK(r0_operator_norm(3.7, a, hx) ==
          Catch::Approx(0.1200756600).epsilon(1e-8));
    CHECK(r0_operator_norm(50.0, a, hx) ==
          Catch::Approx(0.0099103834).epsilon(1e-8));
    CHECK(r0_operator_norm(200.0, a, hx) ==
          Catch::Approx(0.0017655586270625).epsilon(1e-8));
    CHECK_THROWS_AS(r0_operator_norm(1.0, RealField::Ones(1), 0.5), Error);
}

TEST_CASE("dense and iterative norm routes agree across the size switch",
          "[mode1d]") {
    // n = 400 runs the dense SVD, n = 401 the power iteration; adjacent sizes
    // differ only by an O(h^2) resolution term far below the gate.
    const double tau = 3.7;
    const Eigen::Index n_dense = 400, n_power = 401;
    const double norm_dense = r0_operator_norm(
        tau, RealField::Ones(n_dense), 1.0 / static_cast<double>(n_dense + 1));
    const double norm_power = r0_operator_norm(
        tau, RealField::Ones(n_power), 1.0 / static_cast<double>(n_power + 1));
    CHECK(std::abs(norm_dense - norm_power) <= 1e-4 * norm_dense);
}

TEST_CASE("high-mode ratio is small and frozen for the undamped segment",
          "[mode1d]") {
    const Eigen::Index n = 500;
    const double hx = 1.0 / static_cast<double>(n + 1);
    const RealField a = RealField::Zero(n);
    const double worst = high_mode_check(10, 10.0, 20, a, hx);
    CHECK(worst <= 2.0 + 10.0 * hx);  // the a-priori constant
    CHECK(worst == Catch::Approx(0.362744).epsilon(1e-3));
    CHECK_THROWS_AS(high_mode_check(5, 10.0, 20, a, hx), Error);
    CHECK_THROWS_AS(high_mode_check(10, 10.0, 0, a, hx), Error);
}

TEST_CASE("high-mode ratio is uniform in the mode number", "[mode1d]") {
    // Doubling k twice at fixed lambda moves the ratio by well under the
    // 5 percent uniformity gate; the plain L2 ratio without the derivative
    // term would instead collapse like 1/k^2.
    const Eigen::Index n = 4000;
    const double hx = 1.0 / static_cast<double>(n + 1);
    const RealField a = wing_profile_1d(n);
    const double lambda = 32.0;
    std::vector<double> ratios;
    int combo = 6;  // seed offsets continue the (lambda, k) grid convention
    for (int k : {32, 64, 128}) {
        ratios.push_back(high_mode_check(k, lambda, 50, a, hx,
                                         0x5EEDull ^ static_cast<std::uint64_t>(combo)));
        ++combo;
    }
    const double lo = *std::min_element(ratios.begin(), ratios.end());
    const double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi / lo - 1.0 <= 0.05);
    CHECK(hi <= 2.0 + 10.0 * hx);
}

TEST_CASE("transverse modes decouple the 2D stationary problem exactly",
          "[mode1d]") {
    // With the discrete transverse eigenvalue in place of k^2, each sine
    // coefficient of the 2D solution solves the 1D mode problem on the
    // lattice with no O(h^2) slack.
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 24.0);
    const DampingProfile damping = build_wing_damping(mesh, 0.15, 0.85, 1.0);
    const double lambda = 3.0;
    const Field f = random_complex_field(mesh.n_interior, 77);
    const Field u = solve_helmholtz(mesh, damping, lambda, f);
    const ModeDecomposition dec_f = sine_decompose(mesh, f);
    const ModeDecomposition dec_u = sine_decompose(mesh, u);

    const Eigen::Index n1 = mesh.nx - 1;
    RealField a_x(n1);
    for (int i = 1; i < mesh.nx; ++i)
        a_x[i - 1] = damping.values[mesh.interior_index(i, 1)];

    for (int k = 1; k <= 5; ++k) {
        Mode1DProblem p;
        p.k = k;
        const double s = std::sin(0.5 * k * mesh.hy);
        p.mu = 4.0 * s * s / (mesh.hy * mesh.hy);
        p.lambda = lambda;
        p.a_x = a_x;
        p.hx = mesh.hx;
        p.f_k = dec_f.coefficients.row(k - 1).transpose();
        p.g_k = Field::Zero(n1);
        const Field u_k = solve_mode_bvp(p);
        const Field u_k_2d = dec_u.coefficients.row(k - 1).transpose();
        CHECK((u_k - u_k_2d).norm() <= 1e-9 * (u_k_2d.norm() + 1e-30));
    }
}
