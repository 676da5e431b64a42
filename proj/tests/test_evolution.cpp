#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stadlab/common.hpp"
#include "stadlab/damping.hpp"
#include "stadlab/evolution.hpp"
#include "stadlab/geometry.hpp"

using namespace stadlab;

namespace {

/// sin(pi x / Lx) sin(pi y / Ly) sampled on the interior.
Field lowest_mode(const GridMesh& mesh) {
    Field u(mesh.n_interior);
    for (Eigen::Index q = 0; q < mesh.n_interior; ++q) {
        const auto [i, j] = mesh.nodes[static_cast<std::size_t>(q)];
        u[q] = std::sin(kPi * mesh.node_x(i) / mesh.spec.Lx) *
               std::sin(kPi * mesh.node_y(j) / mesh.spec.Ly);
    }
    return u;
}

double lowest_frequency(const GridMesh& mesh) {
    const double sx = std::sin(0.5 * kPi * mesh.hx / mesh.spec.Lx);
    const double sy = std::sin(0.5 * kPi * mesh.hy / mesh.spec.Ly);
    return 4.0 * sx * sx / (mesh.hx * mesh.hx) +
           4.0 * sy * sy / (mesh.hy * mesh.hy);
}

/// Gaussian envelope in x times a transverse sine, frequency-localized via
/// u1 = k u0 (so the pair oscillates like exp(i k t) at leading order).
CauchyPair packet(const GridMesh& mesh, double x0, double width, int k) {
    CauchyPair data;
    data.u0.resize(mesh.n_interior);
    for (Eigen::Index q = 0; q < mesh.n_interior; ++q) {
        const auto [i, j] = mesh.nodes[static_cast<std::size_t>(q)];
        const double dx = (mesh.node_x(i) - x0) / width;
        data.u0[q] = std::exp(-0.5 * dx * dx) *
                     std::sin(k * kPi * mesh.node_y(j) / mesh.spec.Ly);
    }
    data.u1 = static_cast<double>(k) * data.u0;
    return data;
}

}  // namespace

TEST_CASE("energy of a pure mode is analytic", "[evolution]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 16.0);
    const Field u = lowest_mode(mesh);
    const Field v = Field::Zero(mesh.n_interior);
    // ||u||^2 w = (Lx/2)(Ly/2) exactly (full-period discrete sine sums)
    const double expected =
        0.5 * lowest_frequency(mesh) * 0.25 * mesh.spec.Lx * mesh.spec.Ly;
    CHECK(energy(mesh, u, v) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(pair_energy_norm(mesh, u, v) ==
          Catch::Approx(std::sqrt(2.0 * expected)).epsilon(1e-12));
}

TEST_CASE("graph norms scale and match the eigenmode action", "[evolution]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 16.0);
    const RealField a = RealField::Zero(mesh.n_interior);
    const Field u = lowest_mode(mesh);
    const double root_mu = std::sqrt(lowest_frequency(mesh));
    const Field v = root_mu * u;
    // (u, sqrt(mu) u) is an eigenpair of A(u,v) = (v, L u): A^k scales by mu^(k/2)
    const double base = pair_energy_norm(mesh, u, v);
    for (int k : {1, 2}) {
        const double expected = base * (1.0 + std::pow(root_mu, k));
        CHECK(dAk_norm(mesh, a, u, v, k) ==
              Catch::Approx(expected).epsilon(1e-12));
    }
    CHECK(dAk_norm(mesh, a, u, v, 0) == Catch::Approx(base).epsilon(1e-15));
    // positive homogeneity
    CHECK(dAk_norm(mesh, a, Field(3.0 * u), Field(3.0 * v), 2) ==
          Catch::Approx(3.0 * dAk_norm(mesh, a, u, v, 2)).epsilon(1e-12));
    CHECK_THROWS_AS(dAk_norm(mesh, a, u, v, -1), Error);
}

TEST_CASE("undamped leapfrog conserves energy at second order",
          "[evolution]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 32.0);
    const RealField a = RealField::Zero(mesh.n_interior);
    CauchyPair data;
    data.u0 = lowest_mode(mesh);
    data.u1 = Field::Zero(mesh.n_interior);

    auto max_deviation = [&](double dt) {
        const EnergyTrace trace = evolve(mesh, a, data, 50.0, dt);
        const double e0 = trace.energies.front();
        double dev = 0.0;
        for (double e : trace.energies)
            dev = std::max(dev, std::abs(e - e0) / e0);
        return dev;
    };
    const double dev_coarse = max_deviation(2e-3);
    const double dev_fine = max_deviation(1e-3);
    CHECK(dev_coarse <= 2e-5);
    CHECK(dev_coarse >= 1e-6);  // nonzero: the scheme is not exact
    const double ratio = dev_coarse / dev_fine;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("damped evolution dissipates the sampled energy", "[evolution]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 32.0);
    const DampingProfile damping = build_wing_damping(mesh, 0.15, 0.85, 1.0);
    CauchyPair data;
    data.u0 = lowest_mode(mesh);
    data.u1 = Field::Zero(mesh.n_interior);
    const EnergyTrace trace = evolve(mesh, damping, data, 20.0, 2e-3);
    const double slack = 1e-12 * trace.energies.front();
    for (std::size_t i = 1; i < trace.energies.size(); ++i)
        CHECK(trace.energies[i] <= trace.energies[i - 1] + slack);
    CHECK(trace.energies.back() < trace.energies.front());
}

TEST_CASE("leapfrog dissipates the midpoint energy exactly", "[evolution]") {
    // The defect of mid^{n+1/2} - mid^{n-1/2} + 2 dt <a vbar, vbar> w is a
    // roundoff-level quantity, not a truncation-order one.
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 16.0);
    const DampingProfile damping = build_wing_damping(mesh, 0.15, 0.85, 1.0);
    CauchyPair data;
    data.u0 = lowest_mode(mesh);
    data.u1 = Field::Zero(mesh.n_interior);
    EvolveOptions opt;
    opt.track_dissipation = true;
    const EnergyTrace trace = evolve(mesh, damping, data, 5.0, 1e-3, opt);
    CHECK(trace.max_dissipation_defect <= 1e-10);
}

TEST_CASE("decay functionals evaluate the weighted supremum", "[evolution]") {
    EnergyTrace trace;
    trace.times = {0.0, 2.0, 4.0, 8.0};
    trace.energies = {9.0, 4.0, 1.0, 0.25};
    trace.data_norms[0] = 3.0;
    trace.data_norms[1] = 2.0;

    auto weight = [](double t, int k) {
        return std::pow(t, 0.5 * k) / std::pow(std::log(t), 0.5 * k + 1.0);
    };
    double expected = 0.0;
    for (std::size_t i = 1; i < trace.times.size(); ++i)
        expected = std::max(expected, std::sqrt(trace.energies[i]) *
                                          weight(trace.times[i], 1) / 2.0);
    CHECK(decay_bound_functional(trace, 1) ==
          Catch::Approx(expected).epsilon(1e-14));

    // t_max drops the tail sample
    double expected4 = 0.0;
    for (std::size_t i = 1; i < 3; ++i)
        expected4 = std::max(expected4, std::sqrt(trace.energies[i]) *
                                            weight(trace.times[i], 1) / 2.0);
    CHECK(decay_bound_functional(trace, 1, 4.0) ==
          Catch::Approx(expected4).epsilon(1e-14));

    // power-weighted variant: t^(k/(1 + 4/m) - eps) with no log factor
    trace.data_norms[2] = 3.0;
    const double p = 2.0 / (1.0 + 4.0 / 4.0) - 0.1;
    double expected_pow = 0.0;
    for (std::size_t i = 1; i < trace.times.size(); ++i)
        expected_pow = std::max(expected_pow,
                                std::sqrt(trace.energies[i]) *
                                    std::pow(trace.times[i], p) / 3.0);
    CHECK(decay_bound_functional_power(trace, 2, 4, 0.1) ==
          Catch::Approx(expected_pow).epsilon(1e-14));
    CHECK_THROWS_AS(decay_bound_functional_power(trace, 2, 0, 0.1), Error);

    CHECK_THROWS_AS(decay_bound_functional(trace, 5), Error);
    CHECK_THROWS_AS(decay_bound_functional(trace, 1, 1.5), Error);
    trace.data_norms[3] = 0.0;
    CHECK_THROWS_AS(decay_bound_functional(trace, 3), Error);
}

TEST_CASE("decay constants are invariant under data scaling", "[evolution]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 16.0);
    const DampingProfile damping = build_wing_damping(mesh, 0.15, 0.85, 1.0);
    CauchyPair data = packet(mesh, 0.5, 0.2, 2);
    const EnergyTrace t1 = evolve(mesh, damping, data, 10.0, 0.01);
    data.u0 *= 10.0;
    data.u1 *= 10.0;
    const EnergyTrace t10 = evolve(mesh, damping, data, 10.0, 0.01);
    for (int k : {0, 1, 2})
        CHECK(decay_bound_functional(t1, k) ==
              Catch::Approx(decay_bound_functional(t10, k)).epsilon(1e-10));
}

TEST_CASE("a strip-concentrated packet outlives a wing packet", "[evolution]") {
    // Data riding the vertical bouncing-ball rays sits where the damping
    // vanishes; data on a wing is directly damped. Relative energy retention
    // after t = 10 must reflect that ordering decisively.
    const GridMesh mesh = build_stadium(0.5 * kPi, kPi / 32.0);
    const DampingProfile damping = build_wing_damping(mesh, 0.15, 0.85, 1.0);
    const CauchyPair strip = packet(mesh, 0.5, 0.12, 8);
    const CauchyPair wing = packet(mesh, -0.5, 0.12, 8);
    const EnergyTrace ts = evolve(mesh, damping, strip, 10.0, 0.01);
    const EnergyTrace tw = evolve(mesh, damping, wing, 10.0, 0.01);
    const double keep_strip = ts.energies.back() / ts.energies.front();
    const double keep_wing = tw.energies.back() / tw.energies.front();
    CHECK(keep_strip > 1.5 * keep_wing);
}

TEST_CASE("evolution rejects unstable or inconsistent input", "[evolution]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 32.0);
    const RealField a = RealField::Zero(mesh.n_interior);
    CauchyPair data;
    data.u0 = lowest_mode(mesh);
    data.u1 = Field::Zero(mesh.n_interior);
    CHECK_THROWS_AS(evolve(mesh, a, data, 1.0, 0.1), Error);  // above the ceiling
    CHECK_THROWS_AS(evolve(mesh, a, data, 1.0, 0.0), Error);
    CHECK_THROWS_AS(
        evolve(mesh, RealField::Constant(mesh.n_interior, -0.1), data, 1.0, 1e-3),
        Error);
    CauchyPair bad;
    bad.u0 = Field::Zero(3);
    bad.u1 = Field::Zero(3);
    CHECK_THROWS_AS(evolve(mesh, a, bad, 1.0, 1e-3), Error);
    // T = 0 yields the single t = 0 sample and no decay window
    const EnergyTrace trace = evolve(mesh, a, data, 0.0, 1e-3);
    CHECK(trace.times.size() == 1);
    CHECK_THROWS_AS(decay_bound_functional(trace, 0), Error);
}
