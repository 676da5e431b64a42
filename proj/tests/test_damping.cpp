#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stadlab/common.hpp"
#include "stadlab/damping.hpp"
#include "stadlab/geometry.hpp"

using namespace stadlab;

TEST_CASE("wing damping ramps linearly outside the strip", "[damping]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, 0.025);
    REQUIRE(mesh.hx == Catch::Approx(0.025).epsilon(1e-14));
    const DampingProfile p = build_wing_damping(mesh, 0.15, 0.85, 1.0);

    auto value_at = [&](int i) { return p.values[mesh.interior_index(i, 3)]; };
    // x = 0.05 on the left ramp: (0.15 - 0.05) / 0.15
    CHECK(value_at(2) == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
    // x = 0.5 inside the undamped strip
    CHECK(value_at(20) == 0.0);
    CHECK(value_at(10) == 0.0);  // x = 0.25 still inside [0.15, 0.85]
    // x = 0.9 on the right ramp: (0.9 - 0.85) / (1 - 0.85)
    CHECK(value_at(36) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(p.values.minCoeff() >= 0.0);
    CHECK(p.a_max <= 1.0);
}

TEST_CASE("wing damping is constant on the stadium wings", "[damping]") {
    const GridMesh mesh = build_stadium(0.5 * kPi, kPi / 16.0);
    const DampingProfile p = build_wing_damping(mesh, 0.15, 0.85, 1.0);
    CHECK(p.wing_floor == 1.0);
    CHECK(p.a_max == 1.0);
    int wing_nodes = 0;
    for (Eigen::Index q = 0; q < mesh.n_interior; ++q) {
        const double x = mesh.node_x(mesh.nodes[static_cast<std::size_t>(q)].first);
        if (x <= 0.0 || x >= 1.0) {
            CHECK(p.values[q] == 1.0);
            ++wing_nodes;
        }
    }
    CHECK(wing_nodes > 0);
}

TEST_CASE("order-m layers take the closed monomial values", "[damping]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, 0.025);
    const DampingProfile p = build_smooth_m_damping(mesh, 4, 0.1, 1.0);
    auto value_at = [&](int i) { return p.values[mesh.interior_index(i, 5)]; };
    // x = 0.05: s = (0.1 - 0.05)/0.1 = 1/2, a = (1/2)^4
    CHECK(value_at(2) == Catch::Approx(1.0 / 16.0).epsilon(1e-12));
    // x = 0.95: mirrored right layer
    CHECK(value_at(38) == Catch::Approx(1.0 / 16.0).epsilon(1e-12));
    // x = 0.5: outside both layers
    CHECK(value_at(20) == 0.0);
    CHECK(p.m == 4);
    CHECK(p.delta == 0.1);
}

TEST_CASE("derivative-bound constants match the falling factorial",
          "[damping]") {
    // With amplitude delta^m the layer is a = ((delta-x)/1)^m near x=0 and the
    // scale-invariant ratio |a^(n)| / a^((m-n)/m) collapses to m!/(m-n)!.
    const GridMesh mesh = build_rectangle(1.0, kPi, 0.025);
    const int m = 4;
    const double delta = 0.1;
    const DampingProfile p =
        build_smooth_m_damping(mesh, m, delta, std::pow(delta, m));
    CHECK(derivative_bound_constant(p, 1) == Catch::Approx(4.0).epsilon(1e-12));
    CHECK(derivative_bound_constant(p, 2) == Catch::Approx(12.0).epsilon(1e-12));
    CHECK(derivative_bound_constant(p, 3) == Catch::Approx(24.0).epsilon(1e-12));
}

TEST_CASE("derivative-bound constants are grid independent", "[damping]") {
    // The monomial ratio is constant along the layer, so the node maximum
    // cannot depend on where the nodes fall.
    const double delta = 0.1;
    const int m = 6;
    const double amp = 0.37;
    const GridMesh coarse = build_rectangle(1.0, kPi, 0.025);
    const GridMesh fine = build_rectangle(1.0, kPi, 0.0125);
    for (int n = 1; n < m; ++n) {
        const double c_coarse = derivative_bound_constant(
            build_smooth_m_damping(coarse, m, delta, amp), n);
        const double c_fine = derivative_bound_constant(
            build_smooth_m_damping(fine, m, delta, amp), n);
        CHECK(c_coarse == Catch::Approx(c_fine).epsilon(1e-12));
        // analytic value: (m!/(m-n)!) * amp^(n/m) / delta^n
        double falling = 1.0;
        for (int i = 0; i < n; ++i) falling *= double(m - i);
        const double analytic = falling * std::pow(amp, double(n) / m) /
                                std::pow(delta, n);
        CHECK(c_coarse == Catch::Approx(analytic).epsilon(1e-12));
    }
}

TEST_CASE("uniform damping accepts zero and carries its level", "[damping]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 16.0);
    const DampingProfile off = uniform_damping(mesh, 0.0);
    CHECK(off.values.maxCoeff() == 0.0);
    CHECK(off.a_max == 0.0);
    const DampingProfile on = uniform_damping(mesh, 0.7);
    CHECK(on.values.minCoeff() == 0.7);
    CHECK(on.values.maxCoeff() == 0.7);
    CHECK(on.a_max == 0.7);
}

TEST_CASE("damping constructors reject bad parameters", "[damping]") {
    const GridMesh mesh = build_rectangle(1.0, kPi, kPi / 16.0);
    CHECK_THROWS_AS(build_wing_damping(mesh, 0.0, 0.8, 1.0), Error);
    CHECK_THROWS_AS(build_wing_damping(mesh, 0.8, 0.2, 1.0), Error);
    CHECK_THROWS_AS(build_wing_damping(mesh, 0.2, 1.5, 1.0), Error);
    CHECK_THROWS_AS(build_wing_damping(mesh, 0.2, 0.8, 0.0), Error);
    CHECK_THROWS_AS(build_smooth_m_damping(mesh, 3, 0.1, 1.0), Error);
    CHECK_THROWS_AS(build_smooth_m_damping(mesh, 4, 0.6, 1.0), Error);
    CHECK_THROWS_AS(build_smooth_m_damping(mesh, 4, 0.1, 0.0), Error);
    CHECK_THROWS_AS(uniform_damping(mesh, -0.1), Error);

    const DampingProfile smooth = build_smooth_m_damping(mesh, 4, 0.1, 1.0);
    CHECK_THROWS_AS(derivative_bound_constant(smooth, 0), Error);
    CHECK_THROWS_AS(derivative_bound_constant(smooth, 4), Error);
    const DampingProfile wing = build_wing_damping(mesh, 0.15, 0.85, 1.0);
    CHECK_THROWS_AS(derivative_bound_constant(wing, 1), Error);
}
