#include "adsim/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "adsim/error.hpp"

namespace adsim {

namespace {

void check_shape(const VelocityField& z, const Grid& grid, const char* what) {
    if (z.cells() != cell_count(grid) || z.components != components_of(grid))
        throw ShapeError(std::string(what) + ": field does not match grid");
}

double jump_sq(const VelocityField& z, std::size_t a, std::size_t b) {
    const auto nc = static_cast<std::size_t>(z.components);
    double s = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
        const double d = z.values[b * nc + c] - z.values[a * nc + c];
        s += d * d;
    }
    return s;
}

struct Point {
    Vec3 x;
    double weight;
    Vec3 value;
};

// Quadrature points for the seminorm. Axisymmetric cells are spread over
// azimuthal sectors so that |f(x)-f(y)| sees the rotation of phi-hat.
std::vector<Point> seminorm_points(const VelocityField& z, const Grid& grid) {
    std::vector<Point> pts;
    if (const auto* hs = std::get_if<HalfSpaceGrid>(&grid)) {
        for (std::size_t j = 0; j < hs->nodes.size(); ++j)
            if (hs->cells.volume[j] > 0.0)
                pts.push_back({{hs->nodes[j], 0.0, 0.0}, hs->cells.volume[j], {z.values[j], 0.0, 0.0}});
        return pts;
    }
    const auto& s = std::get<SphereGrid>(grid);
    const auto pos = cell_positions(grid);
    if (s.mode == SphereMode::full3d) {
        for (std::size_t i = 0; i < s.info.size(); ++i)
            pts.push_back({pos[i], s.cells.volume[i],
                           {z.values[3 * i], z.values[3 * i + 1], z.values[3 * i + 2]}});
        return pts;
    }
    const double arc = s.R * s.dtheta;
    for (std::size_t i = 0; i < s.info.size(); ++i) {
        const auto& c = s.info[i];
        const double rs = c.r * std::sin(c.theta);
        const auto np = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(2 * std::numbers::pi * rs / arc)));
        for (std::size_t m = 0; m < np; ++m) {
            const double phi = (static_cast<double>(m) + 0.5) * 2 * std::numbers::pi / static_cast<double>(np);
            const double u = z.values[i];
            pts.push_back({{rs * std::cos(phi), rs * std::sin(phi), c.r * std::cos(c.theta)},
                           s.cells.volume[i] / static_cast<double>(np),
                           {-u * std::sin(phi), u * std::cos(phi), 0.0}});
        }
    }
    return pts;
}

double pair_term(const Point& p, const Point& q, double exponent, double cutoff) {
    double d2 = 0.0, f2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        d2 += (p.x[k] - q.x[k]) * (p.x[k] - q.x[k]);
        f2 += (p.value[k] - q.value[k]) * (p.value[k] - q.value[k]);
    }
    const double d = std::sqrt(d2);
    if (d < cutoff) return 0.0;
    return f2 / std::pow(d, exponent);
}

// unit-mass bump on (-1,1): C exp(-1/(1-t^2))
constexpr double kBumpNorm = 1.0 / 0.44399381616807943;

}  // namespace

double kinetic_energy(const VelocityField& z, const Grid& grid) {
    check_shape(z, grid, "kinetic_energy");
    return volume_integral(squared_magnitude(z), grid);
}

double gradient_energy(const VelocityField& z, const Grid& grid, GradientForm form) {
    check_shape(z, grid, "gradient_energy");
    const auto& c = complex_of(grid);
    double sum = 0.0;
    for (const auto& f : c.faces) sum += f.conductance * jump_sq(z, f.a, f.b);
    // jumps into the pinned far-field cells are already faces; the metric term
    // only exists for the axisymmetric azimuthal representation
    if (form == GradientForm::covariant) {
        const auto mag = squared_magnitude(z);
        for (std::size_t i = 0; i < c.size(); ++i) sum += c.sink[i] * c.volume[i] * mag[i];
    }
    return sum;
}

double wall_energy(const VelocityField& z, const Grid& grid) {
    check_shape(z, grid, "wall_energy");
    return surface_integral(squared_magnitude(z), grid);
}

double slip_norm(const VelocityField& z, const Grid& grid, double nu, double alpha) {
    return nu * (gradient_energy(z, grid) + alpha * wall_energy(z, grid));
}

EnsembleStats accumulate_ensemble(std::span<const DiagnosticsSeries> series) {
    if (series.empty()) throw ShapeError("accumulate_ensemble: no series");
    const std::size_t m = series.front().samples.size();
    for (const auto& s : series) {
        if (s.samples.size() != m) throw ShapeError("accumulate_ensemble: sample counts differ");
        for (std::size_t k = 0; k < m; ++k)
            if (s.samples[k].time != series.front().samples[k].time)
                throw ShapeError("accumulate_ensemble: sample times differ");
    }

    EnsembleStats st;
    st.realizations = series.size();
    const auto n = static_cast<double>(series.size());
    auto channel = [&](auto get) {
        ChannelStats cs;
        cs.mean.assign(m, 0.0);
        cs.sem.assign(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            double sum = 0.0;
            for (const auto& s : series) sum += get(s.samples[k]);
            const double mean = sum / n;
            double ss = 0.0;
            for (const auto& s : series) {
                const double d = get(s.samples[k]) - mean;
                ss += d * d;
            }
            cs.mean[k] = mean;
            cs.sem[k] = series.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        }
        return cs;
    };
    for (const auto& smp : series.front().samples) st.times.push_back(smp.time);
    st.kinetic_energy = channel([](const DiagnosticSample& s) { return s.kinetic_energy; });
    st.dissipation_rate = channel([](const DiagnosticSample& s) { return s.dissipation_rate; });
    st.wall_energy = channel([](const DiagnosticSample& s) { return s.wall_energy; });
    st.slip_norm = channel([](const DiagnosticSample& s) { return s.slip_norm; });
    st.cumulative_dissipation = channel([](const DiagnosticSample& s) { return s.cumulative_dissipation; });
    return st;
}

double weak_dissipation_value(const EnsembleStats& stats, double nu) {
    if (stats.kinetic_energy.mean.empty()) return 0.0;
    return nu * stats.kinetic_energy.mean.back();
}

PowerLawFit fit_scaling_exponent(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 3) throw DomainError("fit_scaling_exponent: need at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& [x, y] : pairs) {
        if (!(x > 0.0) || !(y > 0.0)) throw DomainError("fit_scaling_exponent: data must be positive");
        sx += std::log(x);
        sy += std::log(y);
    }
    const auto n = static_cast<double>(pairs.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : pairs) {
        const double dx = std::log(x) - mx, dy = std::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DomainError("fit_scaling_exponent: abscissae are all equal");
    PowerLawFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (const auto& [x, y] : pairs) {
        const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

double hs_seminorm_sq(const VelocityField& z, const Grid& grid, double s, SeminormSampling sampling) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("hs_seminorm_sq: order s must lie in (0,1)");
    check_shape(z, grid, "hs_seminorm_sq");
    const bool column = std::holds_alternative<HalfSpaceGrid>(grid);
    const double exponent = (column ? 1.0 : 3.0) + 2.0 * s;
    const double cutoff = 0.5 * wall_spacing(grid);
    const auto pts = seminorm_points(z, grid);

    if (!sampling.monte_carlo) {
        double sum = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                sum += pts[i].weight * pts[j].weight * pair_term(pts[i], pts[j], exponent, cutoff);
        return 2.0 * sum;
    }

    if (sampling.pairs == 0) throw DomainError("hs_seminorm_sq: monte_carlo needs pairs > 0");
    std::vector<double> w;
    double total = 0.0;
    for (const auto& p : pts) {
        w.push_back(p.weight);
        total += p.weight;
    }
    std::mt19937_64 rng(sampling.seed);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    double acc = 0.0;
    for (std::size_t k = 0; k < sampling.pairs; ++k) {
        const std::size_t i = pick(rng), j = pick(rng);
        acc += pair_term(pts[i], pts[j], exponent, cutoff);
    }
    return total * total * acc / static_cast<double>(sampling.pairs);
}

DensityField duchon_robert_density(const VelocityField& z, const Grid& grid, double ell) {
    const auto* hs = std::get_if<HalfSpaceGrid>(&grid);
    if (!hs) throw DomainError("duchon_robert_density: only the half-space column is supported");
    check_shape(z, grid, "duchon_robert_density");
    const double h = hs->dy;
    if (ell < 2.0 * h) throw DomainError("duchon_robert_density: mollifier width below 2 grid cells");

    const auto& y = hs->nodes;
    const auto reach = static_cast<std::size_t>(std::floor(ell / h));
    DensityField out;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] <= ell || y[i] + ell >= hs->y_max) continue;
        double acc = 0.0;
        for (std::size_t k = 1; k <= reach; ++k) {
            const double t = static_cast<double>(k) * h / ell;
            if (t >= 1.0) break;
            const double bump = kBumpNorm / ell * std::exp(-1.0 / (1.0 - t * t));
            const double dbump = bump * (-2.0 * t / ((1.0 - t * t) * (1.0 - t * t))) / ell;
            // lags +xi and -xi; the derivative of the even bump is odd
            const double up = z.values[i + k] - z.values[i];
            const double down = z.values[i - k] - z.values[i];
            acc += dbump * (up * up * up - down * down * down) * h;
        }
        out.nodes.push_back(i);
        out.values.push_back(0.25 * acc);
    }
    return out;
}

SweepRow make_sweep_row(const EnsembleStats& stats, double nu, double delta, std::string mode) {
    SweepRow row;
    row.nu = nu;
    row.delta = delta;
    row.mode = std::move(mode);
    row.time_integrated_diss = stats.cumulative_dissipation.mean.back();
    row.final_wall_ke = stats.wall_energy.mean.back();
    row.final_ke = stats.kinetic_energy.mean.back();
    row.weak_diss = weak_dissipation_value(stats, nu);
    return row;
}

}  // namespace adsim
