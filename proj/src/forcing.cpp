#include "adsim/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "adsim/error.hpp"

namespace adsim {

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("forcing: delta must lie in (0,1), got " + std::to_string(delta));
}

}  // namespace

ForcingField build_forcing(const ForcingSpec& spec, const Grid& grid) {
    check_delta(spec.delta);
    const bool sphere = std::holds_alternative<SphereGrid>(grid);
    if (sphere != (spec.geometry == GeometryKind::sphere))
        throw ConfigError("forcing: geometry does not match the grid");

    const double h = wall_spacing(grid);
    const double p = -spec.delta / 2.0;
    const auto dist = wall_distance(grid);
    ForcingField f;
    f.values.resize(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) {
        double a;
        if (dist[i] < 0.5 * h) {
            a = spec.regularization == Regularization::cell_average
                    ? std::pow(h, p) / (1.0 + p)
                    : std::pow(dist[i] + 0.5 * h, p);
        } else {
            a = std::pow(dist[i], p);
        }
        f.values[i] = spec.amplitude * a;
    }
    return f;
}

double forcing_l2_norm_sq(const ForcingSpec& spec) {
    const double d = spec.delta;
    if (d >= 1.0) throw DomainError("forcing_l2_norm_sq: integral diverges for delta >= 1");
    if (d < 0.0) throw DomainError("forcing_l2_norm_sq: delta must be non-negative");
    const double a2 = spec.amplitude * spec.amplitude;
    if (spec.geometry == GeometryKind::sphere)
        return a2 * 8.0 * std::numbers::pi * std::pow(spec.R, 3.0 - d) /
               ((1.0 - d) * (2.0 - d) * (3.0 - d));
    return a2 * std::pow(spec.y_max, 1.0 - d) / (1.0 - d);
}

double divergence_residual(const VelocityField& field, const Grid& grid) {
    const auto& c = complex_of(grid);
    if (field.cells() != c.size()) throw ShapeError("divergence_residual: field/grid size mismatch");
    if (field.components == 1) return 0.0;
    if (field.components != 3) throw ShapeError("divergence_residual: expected 1 or 3 components");

    if (const auto* hs = std::get_if<HalfSpaceGrid>(&grid)) {
        double worst = 0.0;
        for (std::size_t j = 1; j + 1 < hs->nodes.size(); ++j) {
            const double dv = (field.values[3 * (j + 1) + 1] - field.values[3 * (j - 1) + 1]) / (2 * hs->dy);
            worst = std::max(worst, std::abs(dv));
        }
        return worst;
    }

    const auto& s = std::get<SphereGrid>(grid);
    // spherical components per cell
    std::vector<Vec3> sph(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double* u = &field.values[3 * i];
        if (s.mode == SphereMode::axisymmetric) {
            sph[i] = {u[0], u[1], u[2]};
            continue;
        }
        const auto& ci = s.info[i];
        const double st = std::sin(ci.theta), ct = std::cos(ci.theta);
        const double sp = std::sin(ci.phi), cp = std::cos(ci.phi);
        sph[i] = {u[0] * st * cp + u[1] * st * sp + u[2] * ct,
                  u[0] * ct * cp + u[1] * ct * sp - u[2] * st,
                  -u[0] * sp + u[1] * cp};
    }
    std::vector<double> div(c.size(), 0.0);
    for (const auto& f : c.faces) {
        const auto k = static_cast<std::size_t>(f.kind);
        const double flux = f.area * 0.5 * (sph[f.a][k] + sph[f.b][k]);
        div[f.a] += flux;
        div[f.b] -= flux;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (s.info[i].shell + 1 == s.shells()) continue;
        worst = std::max(worst, std::abs(div[i] / c.volume[i]));
    }
    return worst;
}

VelocityField forcing_as_field(const ForcingField& forcing, const Grid& grid) {
    VelocityField f = VelocityField::zeros(grid);
    if (forcing.values.size() != f.cells()) throw ShapeError("forcing_as_field: size mismatch");
    if (f.components == 1) {
        f.values = forcing.values;
        return f;
    }
    const auto t = tangent_directions(grid);
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t k = 0; k < 3; ++k) f.values[3 * i + k] = forcing.values[i] * t[i][k];
    return f;
}

}  // namespace adsim
