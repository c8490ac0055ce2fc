#include <doctest.h>

#include <cmath>
#include <random>

#include "adsim/error.hpp"
#include "adsim/solver.hpp"

using namespace adsim;

namespace {

SimConfig column(double nu) {
    SimConfig c;
    c.nu = nu;
    c.realizations = 4;
    return c;
}

double inner(const VelocityField& a, const VelocityField& b, const Grid& g) {
    const auto& vol = complex_of(g).volume;
    const auto nc = static_cast<std::size_t>(a.components);
    double s = 0.0;
    for (std::size_t i = 0; i < vol.size(); ++i)
        for (std::size_t k = 0; k < nc; ++k) s += vol[i] * a.values[i * nc + k] * b.values[i * nc + k];
    return s;
}

VelocityField random_field(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    auto z = VelocityField::zeros(g);
    const auto& c = complex_of(g);
    const auto nc = static_cast<std::size_t>(z.components);
    const auto dir = tangent_directions(g);
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.fixed[i]) continue;
        const double a = n(rng);
        if (nc == 1) z.values[i] = a;
        else
            for (std::size_t k = 0; k < 3; ++k) z.values[3 * i + k] = a * dir[i][k];
    }
    return z;
}

std::vector<Grid> test_grids() {
    std::vector<Grid> gs;
    gs.emplace_back(build_halfspace_grid(0.1, 10.0, MeshRule::kolmogorov_scale()));
    gs.emplace_back(build_sphere_grid(0.25, 5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale()));
    gs.emplace_back(build_sphere_grid(0.5, 5.0, SphereMode::full3d, MeshRule::kolmogorov_scale()));
    return gs;
}

}  // namespace

TEST_CASE("config validation") {
    SimConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.steps() == 200);
    auto bad = c;
    bad.nu = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.dt = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.T = 0.001;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.alpha = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.realizations = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(noise_mode_from_string("pink"), ConfigError);
    CHECK(noise_mode_from_string(to_string(NoiseMode::white_noise_scaled)) == NoiseMode::white_noise_scaled);
}

TEST_CASE("stability limit in one dimension") {
    for (auto [nu, expect] : {std::pair{0.05, std::sqrt(0.05) / 2}, std::pair{0.5, std::sqrt(0.5) / 2}}) {
        const auto c = column(nu);
        const Grid g = build_grid(c);
        const auto rep = validate_stability(c, g);
        CHECK(rep.dt_max == doctest::Approx(expect).epsilon(1e-3));
        CHECK(rep.geometric_dt_max == doctest::Approx(expect).epsilon(1e-12));
        CHECK(rep.ok);
        CHECK_NOTHROW(require_stable(rep));
    }
    auto c = column(0.5);
    c.dt = 1.0;
    const auto rep = validate_stability(c, build_grid(c));
    CHECK_FALSE(rep.ok);
    CHECK_THROWS_AS(require_stable(rep), StabilityError);
}

TEST_CASE("canned sphere grids are stable at dt = 0.005") {
    for (double nu : {0.5, 0.25, 0.1, 0.075, 0.05}) {
        SimConfig c;
        c.geometry = GeometryKind::sphere;
        c.nu = nu;
        const auto rep = validate_stability(c, build_grid(c));
        CHECK(rep.ok);
        CHECK(rep.dt_max > rep.geometric_dt_max);
    }
}

TEST_CASE("one-dimensional Laplacian stencils") {
    const double dy = 0.1;
    const Grid g = build_halfspace_grid(1.0, 10.0, MeshRule::spacing(dy));
    auto z = VelocityField::zeros(g);
    const auto& y = std::get<HalfSpaceGrid>(g).nodes;

    SUBCASE("linear profile") {
        for (std::size_t j = 0; j < y.size(); ++j) z.values[j] = y[j];
        const auto lap = apply_laplacian(z, g, 0.0);
        // the cell below the pinned top sees zero there, so stop one short
        for (std::size_t j = 1; j + 2 < y.size(); ++j) CHECK(lap.values[j] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    }
    SUBCASE("quadratic profile") {
        for (std::size_t j = 0; j < y.size(); ++j) z.values[j] = y[j] * y[j];
        const auto lap = apply_laplacian(z, g, 0.0);
        for (std::size_t j = 1; j + 2 < y.size(); ++j) CHECK(lap.values[j] == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("wall closure matches the Robin ghost node") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n;
        for (auto& v : z.values) v = n(rng);
        z.values.back() = 0.0;
        for (double alpha : {0.0, 0.0005, 0.3}) {
            const auto lap = apply_laplacian(z, g, alpha);
            const double w0 = z.values[0], w1 = z.values[1];
            const double ghost = w1 - 2 * dy * alpha * w0;
            CHECK(lap.values[0] == doctest::Approx((ghost - 2 * w0 + w1) / (dy * dy)).epsilon(1e-12));
            if (alpha == 0.0) CHECK(lap.values[0] == doctest::Approx(2 * (w1 - w0) / (dy * dy)).epsilon(1e-12));
        }
    }
    SUBCASE("non-finite input") {
        z.values[3] = std::nan("");
        CHECK_THROWS_AS(apply_laplacian(z, g, 0.0), NumericError);
    }
}

TEST_CASE("operator is self-adjoint and dissipative in the cell inner product") {
    std::mt19937_64 rng(11);
    for (const auto& g : test_grids()) {
        for (double alpha : {0.0, 0.0005, 0.7}) {
            const auto u = random_field(g, rng), v = random_field(g, rng);
            const auto lu = apply_laplacian(u, g, alpha), lv = apply_laplacian(v, g, alpha);
            const double a = inner(u, lv, g), b = inner(lu, v, g);
            CHECK(a == doctest::Approx(b).epsilon(1e-10));
            const double quad = inner(u, lu, g);
            CHECK(quad < 0.0);
            // <u, L u> = -(|grad u|^2 + alpha |u|^2_wall)
            CHECK(-quad == doctest::Approx(gradient_energy(u, g) + alpha * wall_energy(u, g)).epsilon(1e-10));
        }
    }
}

TEST_CASE("rigid rotation is harmonic away from ring-count changes") {
    // u = e_z x x has u_phi = r sin(theta) and vanishing vector Laplacian
    for (double nu : {0.1, 0.05}) {
        const Grid g = build_sphere_grid(nu, 5.0, SphereMode::axisymmetric, MeshRule::kolmogorov_scale());
        const auto& s = std::get<SphereGrid>(g);
        auto z = VelocityField::zeros(g);
        for (std::size_t i = 0; i < s.info.size(); ++i) z.values[i] = s.info[i].r * std::sin(s.info[i].theta);
        const auto lap = apply_laplacian(z, g, 0.0);
        double res = 0.0, ref = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < s.info.size(); ++i) {
            const std::size_t k = s.info[i].shell;
            if (k == 0 || k + 1 >= s.shells()) continue;
            const auto& rings = s.rings_per_shell;
            if (rings[k - 1] != rings[k] || rings[k + 1] != rings[k]) continue;
            const double sink = z.values[i] * s.cells.sink[i];
            res += s.cells.volume[i] * lap.values[i] * lap.values[i];
            ref += s.cells.volume[i] * sink * sink;
            ++used;
        }
        REQUIRE(used > s.info.size() / 2);
        CHECK(std::sqrt(res / ref) < 0.01);
    }
}

TEST_CASE("single Euler steps") {
    const auto cfg0 = column(0.1);
    const Grid g = build_grid(cfg0);
    const auto forcing = build_forcing(cfg0.forcing_spec(), g);
    const NoiseStream noise(cfg0.seed, 0);

    SUBCASE("no drift, no noise, zero state") {
        auto c = cfg0;
        c.noise_mode = NoiseMode::off;
        const Stepper st(c, g, forcing);
        auto z = VelocityField::zeros(g);
        st.step(z, noise, 0);
        for (double v : z.values) CHECK(v == 0.0);
        CHECK(z.time == doctest::Approx(c.dt));
    }
    SUBCASE("deterministic forcing from rest") {
        auto c = cfg0;
        c.noise_mode = NoiseMode::off;
        c.deterministic_forcing = true;
        const Stepper st(c, g, forcing);
        auto z = VelocityField::zeros(g);
        st.step(z, noise, 0);
        const auto& fixed = complex_of(g).fixed;
        for (std::size_t j = 0; j < z.values.size(); ++j)
            CHECK(z.values[j] == (fixed[j] ? 0.0 : c.dt * forcing.values[j]));
    }
    SUBCASE("non-finite state is reported") {
        auto c = cfg0;
        c.noise_mode = NoiseMode::off;
        c.dt = 50.0;
        c.T = 50.0;
        const Stepper st(c, g, forcing);
        auto z = VelocityField::zeros(g);
        for (auto& v : z.values) v = 1e300;
        z.values.back() = 0.0;
        z.values[5] = -1e300;
        auto run = [&] {
            for (int k = 0; k < 10; ++k) st.step(z, noise, static_cast<std::uint64_t>(k));
        };
        CHECK_THROWS_AS(run(), NumericError);
    }
}

TEST_CASE("one noise step has variance g^2 dt") {
    for (auto mode : {NoiseMode::node_iid, NoiseMode::white_noise_scaled}) {
        auto c = column(0.1);
        c.noise_mode = mode;
        const Grid g = build_grid(c);
        const auto forcing = build_forcing(c.forcing_spec(), g);
        const Stepper st(c, g, forcing);
        const std::vector<std::size_t> probe{0, 1, 7, 30};
        const std::size_t n = 20000;
        std::vector<double> sum(probe.size(), 0.0), sum2(probe.size(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            auto z = VelocityField::zeros(g);
            st.step(z, NoiseStream(c.seed, r), 0);
            for (std::size_t p = 0; p < probe.size(); ++p) {
                sum[p] += z.values[probe[p]];
                sum2[p] += z.values[probe[p]] * z.values[probe[p]];
            }
        }
        const auto& vol = complex_of(g).volume;
        for (std::size_t p = 0; p < probe.size(); ++p) {
            const std::size_t j = probe[p];
            double expect = forcing.values[j] * forcing.values[j] * c.dt;
            if (mode == NoiseMode::white_noise_scaled) expect /= vol[j];
            const double mean = sum[p] / n;
            const double var = sum2[p] / n - mean * mean;
            CHECK(std::abs(mean) <= 3.0 * std::sqrt(expect / n));
            CHECK(std::abs(var - expect) <= 3.0 * expect * std::sqrt(2.0 / (n - 1)));
        }
    }
}

TEST_CASE("injection rate is the volume-weighted noise variance") {
    auto c = column(0.25);
    const Grid g = build_grid(c);
    const auto f = build_forcing(c.forcing_spec(), g);
    const Stepper st(c, g, f);
    const auto& cells = complex_of(g);
    double expect = 0.0;
    for (std::size_t j = 0; j < cells.size(); ++j)
        if (!cells.fixed[j]) expect += cells.volume[j] * f.values[j] * f.values[j];
    CHECK(st.noise_injection_rate() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("realizations") {
    auto c = column(0.1);
    const Grid g = build_grid(c);
    const auto f = build_forcing(c.forcing_spec(), g);

    SUBCASE("zero dynamics give a zero series") {
        auto q = c;
        q.noise_mode = NoiseMode::off;
        const auto s = run_realization(q, g, f, 0);
        CHECK(s.samples.size() == 21);
        for (const auto& smp : s.samples) {
            CHECK(smp.kinetic_energy == 0.0);
            CHECK(smp.dissipation_rate == 0.0);
            CHECK(smp.wall_energy == 0.0);
            CHECK(smp.cumulative_dissipation == 0.0);
        }
    }
    SUBCASE("same seed and index reproduce bit for bit") {
        VelocityField a, b;
        const auto s1 = run_realization(c, g, f, 3, &a);
        const auto s2 = run_realization(c, g, f, 3, &b);
        CHECK(a.values == b.values);
        for (std::size_t k = 0; k < s1.samples.size(); ++k)
            CHECK(s1.samples[k].kinetic_energy == s2.samples[k].kinetic_energy);
        VelocityField other;
        run_realization(c, g, f, 4, &other);
        CHECK(other.values != a.values);
    }
    SUBCASE("doubling the noise amplitude doubles the state exactly") {
        auto c2 = c;
        c2.amplitude = 2.0;
        const auto f2 = build_forcing(c2.forcing_spec(), g);
        VelocityField a, b;
        const auto s1 = run_realization(c, g, f, 1, &a);
        const auto s2 = run_realization(c2, g, f2, 1, &b);
        for (std::size_t j = 0; j < a.values.size(); ++j) CHECK(b.values[j] == 2.0 * a.values[j]);
        for (std::size_t k = 0; k < s1.samples.size(); ++k) {
            CHECK(s2.samples[k].kinetic_energy == 4.0 * s1.samples[k].kinetic_energy);
            CHECK(s2.samples[k].wall_energy == 4.0 * s1.samples[k].wall_energy);
        }
    }
    SUBCASE("superposition of drift and noise") {
        auto both = c;
        both.deterministic_forcing = true;
        auto drift = both;
        drift.noise_mode = NoiseMode::off;
        VelocityField zb, zd, zn;
        run_realization(both, g, f, 2, &zb);
        run_realization(drift, g, f, 2, &zd);
        run_realization(c, g, f, 2, &zn);
        for (std::size_t j = 0; j < zb.values.size(); ++j)
            CHECK(zb.values[j] == doctest::Approx(zd.values[j] + zn.values[j]).epsilon(1e-10).scale(1.0));
    }
    SUBCASE("cumulative dissipation is non-decreasing") {
        const auto s = run_realization(c, g, f, 0);
        for (std::size_t k = 1; k < s.samples.size(); ++k)
            CHECK(s.samples[k].cumulative_dissipation >= s.samples[k - 1].cumulative_dissipation);
        CHECK(s.samples.back().time == doctest::Approx(c.T));
    }
}

TEST_CASE("uniform data with full slip stays uniform away from the far field") {
    auto c = column(0.1);
    c.alpha = 0.0;
    c.noise_mode = NoiseMode::off;
    const Grid g = build_grid(c);
    const auto f = build_forcing(c.forcing_spec(), g);
    const Stepper st(c, g, f);
    auto z = VelocityField::zeros(g);
    for (std::size_t j = 0; j + 1 < z.values.size(); ++j) z.values[j] = 1.5;
    const std::size_t steps = 10;
    for (std::size_t k = 0; k < steps; ++k) st.step(z, NoiseStream(1, 0), k);
    // information from the pinned top travels one cell per step
    for (std::size_t j = 0; j + steps + 2 < z.values.size(); ++j) CHECK(z.values[j] == 1.5);
}

TEST_CASE("unforced energy never increases") {
    std::mt19937_64 rng(77);
    for (const auto& g : test_grids()) {
        SimConfig c;
        c.nu = 0.25;
        c.noise_mode = NoiseMode::off;
        c.geometry = std::holds_alternative<SphereGrid>(g) ? GeometryKind::sphere : GeometryKind::halfspace;
        ForcingField zero{std::vector<double>(cell_count(g), 0.0)};
        const Stepper st(c, g, zero);
        for (int trial = 0; trial < 5; ++trial) {
            auto z = random_field(g, rng);
            double e = kinetic_energy(z, g);
            for (std::uint64_t k = 0; k < 50; ++k) {
                st.step(z, NoiseStream(0, 0), k);
                const double e2 = kinetic_energy(z, g);
                CHECK(e2 <= e);
                e = e2;
            }
        }
    }
}

TEST_CASE("full3d steps keep the field tangential") {
    SimConfig c;
    c.geometry = GeometryKind::sphere;
    c.mode = SphereMode::full3d;
    c.nu = 0.5;
    const Grid g = build_grid(c);
    const auto f = build_forcing(c.forcing_spec(), g);
    const Stepper st(c, g, f);
    auto z = VelocityField::zeros(g);
    for (std::uint64_t k = 0; k < 5; ++k) st.step(z, NoiseStream(c.seed, 0), k);
    const auto pos = cell_positions(g);
    double radial = 0.0, total = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const double* u = &z.values[3 * i];
        const double r = std::hypot(pos[i][0], pos[i][1], pos[i][2]);
        radial = std::max(radial, std::abs(u[0] * pos[i][0] + u[1] * pos[i][1] + u[2] * pos[i][2]) / r);
        total = std::max(total, std::hypot(u[0], u[1], u[2]));
    }
    CHECK(total > 0.0);
    CHECK(radial <= 1e-12 * total);
    CHECK(divergence_residual(z, g) >= 0.0);
}

TEST_CASE("ensembles do not depend on the worker count") {
    auto c = column(0.1);
    c.realizations = 9;
    const Grid g = build_grid(c);
    const auto f = build_forcing(c.forcing_spec(), g);
    const auto a = run_ensemble(c, g, f, 1);
    const auto b = run_ensemble(c, g, f, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t k = 0; k < a[r].samples.size(); ++k) {
            CHECK(a[r].samples[k].kinetic_energy == b[r].samples[k].kinetic_energy);
            CHECK(a[r].samples[k].cumulative_dissipation == b[r].samples[k].cumulative_dissipation);
        }
}
