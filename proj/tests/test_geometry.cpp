#include <doctest.h>

#include <cmath>
#include <numbers>

#include "adsim/error.hpp"
#include "adsim/geometry.hpp"

using namespace adsim;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> ones(const Grid& g) { return std::vector<double>(cell_count(g), 1.0); }
}  // namespace

TEST_CASE("half-space column follows the Kolmogorov spacing") {
    const auto g = build_halfspace_grid(0.05, 10.0, MeshRule::kolmogorov_scale());
    CHECK(g.dy == doctest::Approx(0.10573712634405643).epsilon(1e-14));
    CHECK(g.nodes.size() == 96);  // 95 steps
    CHECK(g.wall_index == 0);
    CHECK(g.nodes.back() >= 10.0);

    const auto unit = build_halfspace_grid(1.0, 10.0, MeshRule::kolmogorov_scale());
    CHECK(unit.dy == 1.0);
    CHECK(unit.nodes.size() == 11);
}

TEST_CASE("explicit spacing gives an arithmetic sequence") {
    const auto g = build_halfspace_grid(0.5, 10.0, MeshRule::spacing(0.1));
    REQUIRE(g.nodes.size() == 101);
    for (std::size_t j = 0; j < g.nodes.size(); ++j) CHECK(g.nodes[j] == static_cast<double>(j) * 0.1);
    CHECK(g.nodes.back() == doctest::Approx(10.0));
}

TEST_CASE("half-space nodes are uniform and weights sum to the column height") {
    for (double nu : {0.5, 0.25, 0.1, 0.075, 0.05, 0.013}) {
        const Grid g = build_halfspace_grid(nu, 10.0, MeshRule::kolmogorov_scale());
        const auto& hs = std::get<HalfSpaceGrid>(g);
        for (std::size_t j = 0; j + 1 < hs.nodes.size(); ++j) {
            const double step = hs.nodes[j + 1] - hs.nodes[j];
            // j*dy is rounded once, so successive gaps agree to a few ulps of y
            CHECK(std::abs(step - hs.dy) <= 4 * std::numeric_limits<double>::epsilon() * hs.nodes[j + 1]);
        }
        CHECK(std::abs(volume_integral(ones(g), g) - 10.0) <= 1e-12 * 10.0);
    }
}

TEST_CASE("halving nu scales dy by 2^{-3/4}") {
    for (double nu : {0.8, 0.3, 0.1}) {
        const auto a = build_halfspace_grid(nu, 10.0, MeshRule::kolmogorov_scale());
        const auto b = build_halfspace_grid(nu / 2, 10.0, MeshRule::kolmogorov_scale());
        CHECK(b.dy / a.dy == doctest::Approx(std::pow(2.0, -0.75)).epsilon(1e-14));
    }
}

TEST_CASE("node count does not increase with dy") {
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double dy = 0.05; dy <= 2.5; dy += 0.0137) {
        const auto g = build_halfspace_grid(1.0, 10.0, MeshRule::spacing(dy));
        CHECK(g.nodes.size() <= prev);
        prev = g.nodes.size();
    }
}

TEST_CASE("half-space grid rejects bad input") {
    CHECK_THROWS_AS(build_halfspace_grid(0.0, 10.0, MeshRule::kolmogorov_scale()), ConfigError);
    CHECK_THROWS_AS(build_halfspace_grid(-1.0, 10.0, MeshRule::kolmogorov_scale()), ConfigError);
    CHECK_THROWS_AS(build_halfspace_grid(0.1, 0.0, MeshRule::kolmogorov_scale()), ConfigError);
    CHECK_THROWS_AS(build_halfspace_grid(0.1, 10.0, MeshRule::spacing(3.0)), ConfigError);
    CHECK_THROWS_AS(build_halfspace_grid(0.1, 10.0, MeshRule::spacing(0.0)), ConfigError);
    // nu^{3/4} = 3.34 leaves fewer than 5 nodes on a column of height 10
    CHECK_THROWS_AS(build_halfspace_grid(5.0, 10.0, MeshRule::kolmogorov_scale()), ConfigError);
}

TEST_CASE("sphere shell counts") {
    const auto a = build_sphere_grid(0.5, 5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale());
    CHECK(a.shells() == 9);
    CHECK(a.dr == doctest::Approx(std::pow(0.5, 0.75)).epsilon(0.1));
    const auto b = build_sphere_grid(0.05, 5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale());
    CHECK(b.shells() == 48);
    CHECK(b.dr == doctest::Approx(std::pow(0.05, 0.75)).epsilon(0.015));
    CHECK(b.radii.back() == doctest::Approx(5.0));
    CHECK(b.radii.front() == doctest::Approx(0.5 * b.dr));
    CHECK(!b.origin_shell.empty());
    CHECK(!b.wall_shell.empty());
    for (const auto& c : b.info) {
        CHECK(c.theta > 0.0);
        CHECK(c.theta < kPi);
        CHECK(c.r > 0.0);
    }
}

TEST_CASE("sphere grid rejects bad input") {
    CHECK_THROWS_AS(build_sphere_grid(0.1, 0.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale()),
                    ConfigError);
    CHECK_THROWS_AS(build_sphere_grid(0.1, -5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale()),
                    ConfigError);
    CHECK_THROWS_AS(build_sphere_grid(0.0, 5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale()),
                    ConfigError);
    // four shells only
    CHECK_THROWS_AS(build_sphere_grid(0.1, 5.0, SphereMode::axisymmetric, MeshRule::spacing(1.25, 0.3)),
                    ConfigError);
}

TEST_CASE("sphere quadrature reproduces ball volume and sphere area") {
    for (auto mode : {SphereMode::axisymmetric, SphereMode::full3d}) {
        for (double nu : {0.5, 0.25, 0.1}) {
            const Grid g = build_sphere_grid(nu, 5.0, mode, MeshRule::kolmogorov_scale());
            const auto one = ones(g);
            CHECK(volume_integral(one, g) == doctest::Approx(4.0 / 3.0 * kPi * 125.0).epsilon(1e-3));
            CHECK(surface_integral(one, g) == doctest::Approx(4.0 * kPi * 25.0).epsilon(1e-3));
        }
    }
}

TEST_CASE("half-space surface integral is the wall value") {
    const Grid g = build_halfspace_grid(0.1, 10.0, MeshRule::kolmogorov_scale());
    std::vector<double> v(cell_count(g), 0.0);
    CHECK(surface_integral(v, g) == 0.0);
    CHECK(volume_integral(v, g) == 0.0);
    v[0] = 2.5;
    v[3] = 7.0;
    CHECK(surface_integral(v, g) == 2.5);
}

TEST_CASE("integrals reject mismatched fields") {
    const Grid g = build_halfspace_grid(0.1, 10.0, MeshRule::kolmogorov_scale());
    std::vector<double> v(cell_count(g) + 1, 1.0);
    CHECK_THROWS_AS(volume_integral(v, g), ShapeError);
    CHECK_THROWS_AS(surface_integral(v, g), ShapeError);
}

TEST_CASE("velocity fields") {
    const Grid a = build_sphere_grid(0.5, 5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale());
    const Grid f = build_sphere_grid(0.5, 5.0, SphereMode::full3d, MeshRule::kolmogorov_scale());
    CHECK(components_of(a) == 1);
    CHECK(components_of(f) == 3);
    auto z = VelocityField::zeros(f);
    CHECK(z.cells() == cell_count(f));
    CHECK(z.finite());
    z.values[4] = std::nan("");
    CHECK_FALSE(z.finite());

    // tangent directions are unit and orthogonal to the radius
    const auto pos = cell_positions(f);
    const auto dir = tangent_directions(f);
    for (std::size_t i = 0; i < pos.size(); ++i) {
        CHECK(std::hypot(dir[i][0], dir[i][1], dir[i][2]) == doctest::Approx(1.0));
        CHECK(std::abs(pos[i][0] * dir[i][0] + pos[i][1] * dir[i][1] + pos[i][2] * dir[i][2]) < 1e-12);
    }
}

TEST_CASE("wall distance") {
    const Grid g = build_halfspace_grid(0.1, 10.0, MeshRule::kolmogorov_scale());
    const auto d = wall_distance(g);
    CHECK(d[0] == 0.0);
    CHECK(d[3] == doctest::Approx(3 * std::get<HalfSpaceGrid>(g).dy));
    const Grid s = build_sphere_grid(0.25, 5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale());
    const auto ds = wall_distance(s);
    const auto& sg = std::get<SphereGrid>(s);
    for (auto i : sg.wall_shell) CHECK(ds[i] == doctest::Approx(0.0).epsilon(1e-12));
}
