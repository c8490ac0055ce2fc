#include "adsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "adsim/error.hpp"

namespace adsim {

namespace {

constexpr double kPi = std::numbers::pi;

// ceil(x) that forgives representation error just above an integer.
std::size_t ceil_count(double x) {
    return static_cast<std::size_t>(std::ceil(x - 1e-9));
}

double kolmogorov_length(double nu) { return std::pow(nu, 0.75); }

double overlap(double lo1, double hi1, double lo2, double hi2) {
    return std::max(0.0, std::min(hi1, hi2) - std::max(lo1, lo2));
}

// Measure of sin(theta) dtheta over the intersection of two polar intervals.
double polar_overlap(double lo1, double hi1, double lo2, double hi2) {
    const double lo = std::max(lo1, lo2);
    const double hi = std::min(hi1, hi2);
    return hi > lo ? std::cos(lo) - std::cos(hi) : 0.0;
}

}  // namespace

HalfSpaceGrid build_halfspace_grid(double nu, double y_max, MeshRule rule) {
    if (!(nu > 0.0)) throw ConfigError("half-space grid: viscosity must be positive");
    if (!(y_max > 0.0)) throw ConfigError("half-space grid: y_max must be positive");

    HalfSpaceGrid g;
    g.y_max = y_max;
    if (rule.kolmogorov) {
        g.dy = kolmogorov_length(nu);
    } else {
        if (!(rule.d1 > 0.0) || rule.d1 > y_max / 4.0)
            throw ConfigError("half-space grid: explicit dy must lie in (0, y_max/4]");
        g.dy = rule.d1;
    }
    const std::size_t J = ceil_count(y_max / g.dy);
    if (J < 4)
        throw ConfigError("half-space grid: fewer than 5 nodes (dy=" + std::to_string(g.dy) + ")");

    g.nodes.resize(J + 1);
    for (std::size_t j = 0; j <= J; ++j) g.nodes[j] = static_cast<double>(j) * g.dy;

    auto& c = g.cells;
    c.volume.resize(J + 1);
    c.sink.assign(J + 1, 0.0);
    c.fixed.assign(J + 1, 0);
    c.fixed[J] = 1;
    for (std::size_t j = 0; j <= J; ++j) {
        const double y = g.nodes[j];
        c.volume[j] = overlap(y - g.dy / 2, y + g.dy / 2, 0.0, y_max);
    }
    g.edge_weight.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        g.edge_weight[j] = overlap(g.nodes[j], g.nodes[j + 1], 0.0, y_max);
        c.faces.push_back({j, j + 1, 1.0, g.edge_weight[j] / (g.dy * g.dy), FaceKind::normal_y_or_r});
    }
    c.wall.push_back({0, 1.0});
    return g;
}

SphereGrid build_sphere_grid(double nu, double R, SphereMode mode, MeshRule rule) {
    if (!(nu > 0.0)) throw ConfigError("sphere grid: viscosity must be positive");
    if (!(R > 0.0)) throw ConfigError("sphere grid: radius must be positive");

    double h = 0.0, dtheta = 0.0, dphi = 0.0;
    if (rule.kolmogorov) {
        h = kolmogorov_length(nu);
        dtheta = h / R;
        dphi = h / R;
    } else {
        h = rule.d1;
        dtheta = rule.d2 > 0.0 ? rule.d2 : h / R;
        dphi = rule.d3 > 0.0 ? rule.d3 : dtheta;
        if (!(h > 0.0)) throw ConfigError("sphere grid: explicit dr must be positive");
    }
    const std::size_t n = ceil_count(R / h);
    if (n < 5)
        throw ConfigError("sphere grid: mesh too coarse, " + std::to_string(n) + " radial shells");

    SphereGrid g;
    g.R = R;
    g.mode = mode;
    g.dr = R / (static_cast<double>(n) - 0.5);
    const std::size_t n_theta_wall = std::max<std::size_t>(2, ceil_count(kPi / dtheta));
    g.dtheta = kPi / static_cast<double>(n_theta_wall);
    const std::size_t n_phi_wall =
        mode == SphereMode::full3d ? std::max<std::size_t>(4, ceil_count(2 * kPi / dphi)) : 1;
    g.dphi = 2 * kPi / static_cast<double>(n_phi_wall);
    const double arc_theta = R * g.dtheta;
    const double arc_phi = R * g.dphi;

    g.radii.resize(n);
    g.shell_lo.resize(n);
    g.shell_hi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.radii[i] = (static_cast<double>(i) + 0.5) * g.dr;
        g.shell_lo[i] = static_cast<double>(i) * g.dr;
        g.shell_hi[i] = static_cast<double>(i + 1) * g.dr;
    }
    g.radii[n - 1] = R;
    g.shell_hi[n - 1] = R;

    // ring_start[i][k] = first cell index of ring k in shell i
    std::vector<std::vector<std::size_t>> ring_start(n);
    std::vector<std::vector<std::size_t>> ring_sectors(n);
    g.rings_per_shell.resize(n);
    // Ring counts halve going inward only when the halved arc still fits the
    // wall arc, so most radial faces connect cells with matching polar edges.
    auto halved = [](std::size_t count, double arc_len, double limit, std::size_t floor) {
        while (count / 2 >= floor && arc_len * 2.0 <= limit) {
            count = (count + 1) / 2;
            arc_len *= 2.0;
        }
        return count;
    };
    std::size_t nt_outer = n_theta_wall;
    for (std::size_t i = n; i-- > 0;) {
        nt_outer = halved(nt_outer, kPi * g.radii[i] / static_cast<double>(nt_outer), arc_theta, 2);
        g.rings_per_shell[i] = nt_outer;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t nt = g.rings_per_shell[i];
        const double dt = kPi / static_cast<double>(nt);
        for (std::size_t k = 0; k < nt; ++k) {
            const double tlo = static_cast<double>(k) * dt;
            const double thi = k + 1 == nt ? kPi : static_cast<double>(k + 1) * dt;
            const double theta = (static_cast<double>(k) + 0.5) * dt;
            std::size_t np = 1;
            if (mode == SphereMode::full3d) {
                np = halved(n_phi_wall,
                            2 * kPi * g.radii[i] * std::sin(theta) / static_cast<double>(n_phi_wall),
                            arc_phi, 4);
            }
            ring_start[i].push_back(g.info.size());
            ring_sectors[i].push_back(np);
            const double dp = 2 * kPi / static_cast<double>(np);
            for (std::size_t m = 0; m < np; ++m) {
                const double plo = static_cast<double>(m) * dp;
                const double phi_hi = m + 1 == np ? 2 * kPi : static_cast<double>(m + 1) * dp;
                g.info.push_back({i, k, m, g.radii[i], theta, (static_cast<double>(m) + 0.5) * dp,
                                  tlo, thi, plo, phi_hi});
            }
        }
    }

    auto& c = g.cells;
    const std::size_t N = g.info.size();
    c.volume.resize(N);
    c.sink.assign(N, 0.0);
    c.fixed.assign(N, 0);
    for (std::size_t idx = 0; idx < N; ++idx) {
        const auto& s = g.info[idx];
        const double lo = g.shell_lo[s.shell], hi = g.shell_hi[s.shell];
        c.volume[idx] = (hi * hi * hi - lo * lo * lo) / 3.0 *
                        (std::cos(s.theta_lo) - std::cos(s.theta_hi)) * (s.phi_hi - s.phi_lo);
        if (mode == SphereMode::axisymmetric) {
            const double rs = s.r * std::sin(s.theta);
            c.sink[idx] = 1.0 / (rs * rs);
        }
        if (s.shell == 0) g.origin_shell.push_back(idx);
        if (s.shell + 1 == n) g.wall_shell.push_back(idx);
    }

    auto cells_of_ring = [&](std::size_t i, std::size_t k) {
        const std::size_t first = ring_start[i][k];
        return std::pair{first, first + ring_sectors[i][k]};
    };

    // radial faces: shell i to shell i+1, over overlapping (theta, phi) patches
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double rf = g.shell_hi[i];
        const double dist = g.radii[i + 1] - g.radii[i];
        for (std::size_t k = 0; k < g.rings_per_shell[i]; ++k) {
            for (std::size_t k2 = 0; k2 < g.rings_per_shell[i + 1]; ++k2) {
                const auto [a0, a1] = cells_of_ring(i, k);
                const auto [b0, b1] = cells_of_ring(i + 1, k2);
                const double ov_t = polar_overlap(g.info[a0].theta_lo, g.info[a0].theta_hi,
                                                  g.info[b0].theta_lo, g.info[b0].theta_hi);
                if (ov_t <= 0.0) continue;
                for (std::size_t a = a0; a < a1; ++a) {
                    for (std::size_t b = b0; b < b1; ++b) {
                        const double ov_p = overlap(g.info[a].phi_lo, g.info[a].phi_hi,
                                                    g.info[b].phi_lo, g.info[b].phi_hi);
                        if (ov_p <= 0.0) continue;
                        const double area = rf * rf * ov_t * ov_p;
                        c.faces.push_back({a, b, area, area / dist, FaceKind::normal_y_or_r});
                    }
                }
            }
        }
    }

    // polar faces inside a shell
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = g.shell_lo[i], hi = g.shell_hi[i];
        const double rc = 0.5 * (lo + hi);
        const double dt = kPi / static_cast<double>(g.rings_per_shell[i]);
        for (std::size_t k = 0; k + 1 < g.rings_per_shell[i]; ++k) {
            const auto [a0, a1] = cells_of_ring(i, k);
            const auto [b0, b1] = cells_of_ring(i, k + 1);
            const double sf = std::sin(g.info[a0].theta_hi);
            for (std::size_t a = a0; a < a1; ++a) {
                for (std::size_t b = b0; b < b1; ++b) {
                    const double ov_p = overlap(g.info[a].phi_lo, g.info[a].phi_hi,
                                                g.info[b].phi_lo, g.info[b].phi_hi);
                    if (ov_p <= 0.0) continue;
                    const double area = 0.5 * (hi * hi - lo * lo) * sf * ov_p;
                    c.faces.push_back({a, b, area, area / (rc * dt), FaceKind::polar});
                }
            }
        }
    }

    // azimuthal faces inside a ring (full3d only)
    if (mode == SphereMode::full3d) {
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = g.shell_lo[i], hi = g.shell_hi[i];
            const double rc = 0.5 * (lo + hi);
            for (std::size_t k = 0; k < g.rings_per_shell[i]; ++k) {
                const auto [a0, a1] = cells_of_ring(i, k);
                const std::size_t np = a1 - a0;
                const auto& s = g.info[a0];
                const double dt = s.theta_hi - s.theta_lo;
                const double dp = 2 * kPi / static_cast<double>(np);
                const double area = 0.5 * (hi * hi - lo * lo) * dt;
                const double dist = rc * std::sin(s.theta) * dp;
                for (std::size_t m = 0; m < np; ++m) {
                    c.faces.push_back(
                        {a0 + m, a0 + (m + 1) % np, area, area / dist, FaceKind::azimuthal});
                }
            }
        }
    }

    for (std::size_t idx : g.wall_shell) {
        const auto& s = g.info[idx];
        c.wall.push_back(
            {idx, R * R * (std::cos(s.theta_lo) - std::cos(s.theta_hi)) * (s.phi_hi - s.phi_lo)});
    }
    return g;
}

const CellComplex& complex_of(const Grid& grid) {
    return std::visit([](const auto& g) -> const CellComplex& { return g.cells; }, grid);
}

std::size_t cell_count(const Grid& grid) { return complex_of(grid).size(); }

int components_of(const Grid& grid) {
    if (const auto* s = std::get_if<SphereGrid>(&grid); s && s->mode == SphereMode::full3d) return 3;
    return 1;
}

std::vector<double> wall_distance(const Grid& grid) {
    if (const auto* h = std::get_if<HalfSpaceGrid>(&grid)) return h->nodes;
    const auto& s = std::get<SphereGrid>(grid);
    std::vector<double> d(s.info.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = s.info[i].shell + 1 == s.shells() ? 0.0 : s.R - s.info[i].r;
    return d;
}

double wall_spacing(const Grid& grid) {
    if (const auto* h = std::get_if<HalfSpaceGrid>(&grid)) return h->dy;
    return std::get<SphereGrid>(grid).dr;
}

std::vector<Vec3> cell_positions(const Grid& grid) {
    std::vector<Vec3> p;
    if (const auto* h = std::get_if<HalfSpaceGrid>(&grid)) {
        for (double y : h->nodes) p.push_back({0.0, y, 0.0});
        return p;
    }
    for (const auto& s : std::get<SphereGrid>(grid).info) {
        p.push_back({s.r * std::sin(s.theta) * std::cos(s.phi),
                     s.r * std::sin(s.theta) * std::sin(s.phi), s.r * std::cos(s.theta)});
    }
    return p;
}

std::vector<Vec3> tangent_directions(const Grid& grid) {
    std::vector<Vec3> t;
    if (const auto* h = std::get_if<HalfSpaceGrid>(&grid)) {
        t.assign(h->nodes.size(), Vec3{0.0, 0.0, 1.0});
        return t;
    }
    for (const auto& s : std::get<SphereGrid>(grid).info)
        t.push_back({-std::sin(s.phi), std::cos(s.phi), 0.0});
    return t;
}

double volume_integral(std::span<const double> values, const Grid& grid) {
    const auto& c = complex_of(grid);
    if (values.size() != c.size())
        throw ShapeError("volume_integral: field has " + std::to_string(values.size()) +
                         " entries, grid has " + std::to_string(c.size()) + " cells");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) sum += values[i] * c.volume[i];
    return sum;
}

double surface_integral(std::span<const double> values, const Grid& grid) {
    const auto& c = complex_of(grid);
    if (values.size() != c.size())
        throw ShapeError("surface_integral: field has " + std::to_string(values.size()) +
                         " entries, grid has " + std::to_string(c.size()) + " cells");
    double sum = 0.0;
    for (const auto& w : c.wall) sum += values[w.cell] * w.area;
    return sum;
}

VelocityField VelocityField::zeros(const Grid& grid) {
    VelocityField f;
    f.components = components_of(grid);
    f.values.assign(cell_count(grid) * static_cast<std::size_t>(f.components), 0.0);
    return f;
}

bool VelocityField::finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> squared_magnitude(const VelocityField& field) {
    const auto nc = static_cast<std::size_t>(field.components);
    std::vector<double> out(field.cells(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t c = 0; c < nc; ++c) out[i] += field.values[i * nc + c] * field.values[i * nc + c];
    return out;
}

}  // namespace adsim
