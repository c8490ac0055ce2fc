#include "adsim/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "adsim/error.hpp"

namespace adsim {

std::string to_string(NoiseMode mode) {
    switch (mode) {
        case NoiseMode::node_iid: return "node_iid";
        case NoiseMode::white_noise_scaled: return "white_noise_scaled";
        case NoiseMode::off: return "off";
    }
    return "?";
}

NoiseMode noise_mode_from_string(const std::string& s) {
    if (s == "node_iid") return NoiseMode::node_iid;
    if (s == "white_noise_scaled") return NoiseMode::white_noise_scaled;
    if (s == "off") return NoiseMode::off;
    throw ConfigError("unknown noise_mode '" + s + "'");
}

std::string to_string(GeometryKind g) { return g == GeometryKind::sphere ? "sphere" : "halfspace"; }
std::string to_string(SphereMode m) { return m == SphereMode::full3d ? "full3d" : "axisymmetric"; }
std::string to_string(Regularization r) {
    return r == Regularization::cell_average ? "cell_average" : "half_cell_offset";
}

void SimConfig::validate() const {
    if (!(nu > 0.0)) throw ConfigError("nu must be positive");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(T >= dt)) throw ConfigError("T must be at least dt");
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
    if (realizations < 1) throw ConfigError("realizations must be at least 1");
    if (sample_every < 1) throw ConfigError("sample_every must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (geometry == GeometryKind::halfspace && !(y_max > 0.0)) throw ConfigError("y_max must be positive");
    if (geometry == GeometryKind::sphere && !(R > 0.0)) throw ConfigError("R must be positive");
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

ForcingSpec SimConfig::forcing_spec() const {
    ForcingSpec f;
    f.delta = delta;
    f.geometry = geometry;
    f.R = R;
    f.y_max = y_max;
    f.regularization = regularization;
    f.amplitude = amplitude;
    return f;
}

Grid build_grid(const SimConfig& config) {
    config.validate();
    if (config.geometry == GeometryKind::halfspace)
        return build_halfspace_grid(config.nu, config.y_max, MeshRule::kolmogorov_scale());
    return build_sphere_grid(config.nu, config.R, config.mode, MeshRule::kolmogorov_scale());
}

DiffusionOperator::DiffusionOperator(const Grid& grid, double alpha) {
    const auto& c = complex_of(grid);
    const std::size_t n = c.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    std::vector<double> outflow(n, 0.0);
    for (const auto& f : c.faces) {
        adj[f.a].emplace_back(f.b, f.conductance);
        adj[f.b].emplace_back(f.a, f.conductance);
        outflow[f.a] += f.conductance;
        outflow[f.b] += f.conductance;
    }
    for (const auto& w : c.wall) outflow[w.cell] += alpha * w.area;

    fixed_ = c.fixed;
    diag_.resize(n);
    offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        offsets_[i + 1] = offsets_[i];
        if (fixed_[i]) {
            diag_[i] = 0.0;
            continue;
        }
        const double inv = 1.0 / c.volume[i];
        diag_[i] = -outflow[i] * inv - c.sink[i];
        double row = std::abs(diag_[i]);
        for (const auto& [j, g] : adj[i]) {
            row += g * inv;
            if (fixed_[j]) continue;  // pinned neighbours hold zero
            neighbours_.push_back(j);
            weights_.push_back(g * inv);
            ++offsets_[i + 1];
        }
        spectral_bound_ = std::max(spectral_bound_, row);
    }
}

void DiffusionOperator::apply(std::span<const double> u, std::span<double> out, int components) const {
    const auto nc = static_cast<std::size_t>(components);
    for (std::size_t i = 0; i < diag_.size(); ++i) {
        for (std::size_t k = 0; k < nc; ++k) {
            if (fixed_[i]) {
                out[i * nc + k] = 0.0;
                continue;
            }
            double acc = diag_[i] * u[i * nc + k];
            for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e)
                acc += weights_[e] * u[neighbours_[e] * nc + k];
            out[i * nc + k] = acc;
        }
    }
}

StabilityReport validate_stability(const SimConfig& config, const Grid& grid) {
    StabilityReport rep;
    rep.dt = config.dt;
    const DiffusionOperator op(grid, config.alpha);
    rep.spectral_bound = op.spectral_bound();
    rep.dt_max = 2.0 / (config.nu * rep.spectral_bound);

    if (const auto* hs = std::get_if<HalfSpaceGrid>(&grid)) {
        rep.h_min = hs->dy;
        rep.d_eff = 1;
    } else {
        const auto& s = std::get<SphereGrid>(grid);
        rep.d_eff = s.mode == SphereMode::full3d ? 3 : 2;
        double h = s.dr;
        for (const auto& ci : s.info) {
            h = std::min(h, ci.r * (ci.theta_hi - ci.theta_lo));
            const double rs = ci.r * std::sin(ci.theta);
            h = std::min(h, s.mode == SphereMode::full3d ? rs * (ci.phi_hi - ci.phi_lo) : rs);
        }
        rep.h_min = h;
    }
    rep.geometric_dt_max = rep.h_min * rep.h_min / (2.0 * rep.d_eff * config.nu);
    rep.ok = config.dt <= rep.dt_max;
    return rep;
}

void require_stable(const StabilityReport& report) {
    if (!report.ok)
        throw StabilityError("explicit step unstable: dt=" + std::to_string(report.dt) +
                             " exceeds dt_max=" + std::to_string(report.dt_max));
}

VelocityField apply_laplacian(const VelocityField& state, const Grid& grid, double alpha) {
    if (!state.finite()) throw NumericError("apply_laplacian: non-finite input");
    if (state.cells() != cell_count(grid)) throw ShapeError("apply_laplacian: field/grid size mismatch");
    const DiffusionOperator op(grid, alpha);
    VelocityField out = state;
    op.apply(state.values, out.values, state.components);
    return out;
}

Stepper::Stepper(const SimConfig& config, const Grid& grid, const ForcingField& forcing)
    : config_(config), grid_(grid), op_(grid, config.alpha) {
    const auto& c = complex_of(grid);
    const std::size_t n = c.size();
    if (forcing.values.size() != n) throw ShapeError("Stepper: forcing/grid size mismatch");
    const int nc = components_of(grid);
    direction_ = tangent_directions(grid);

    drift_.assign(n * static_cast<std::size_t>(nc), 0.0);
    if (config.deterministic_forcing) {
        const auto f = forcing_as_field(forcing, grid);
        drift_ = f.values;
    }
    amplitude_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (c.fixed[i]) continue;
        switch (config.noise_mode) {
            case NoiseMode::node_iid: amplitude_[i] = forcing.values[i] * std::sqrt(config.dt); break;
            case NoiseMode::white_noise_scaled:
                amplitude_[i] = forcing.values[i] * std::sqrt(config.dt / c.volume[i]);
                break;
            case NoiseMode::off: break;
        }
    }
    lap_.resize(drift_.size());
    xi_.resize(n);
}

double Stepper::noise_injection_rate() const {
    const auto& c = complex_of(grid_);
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) sum += c.volume[i] * amplitude_[i] * amplitude_[i];
    return sum / config_.dt;
}

void Stepper::step(VelocityField& z, const NoiseStream& noise, std::uint64_t step_index) const {
    const int nc = z.components;
    const std::size_t n = op_.size();
    const double dt = config_.dt, nu = config_.nu;
    op_.apply(z.values, lap_, nc);
    const bool noisy = config_.noise_mode != NoiseMode::off;
    if (noisy) noise.fill(step_index, xi_);

    if (nc == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            if (op_.pinned(i)) continue;
            double v = z.values[i] + dt * (nu * lap_[i] + drift_[i]);
            if (noisy) v += amplitude_[i] * xi_[i];
            z.values[i] = v;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (op_.pinned(i)) continue;
            double* u = &z.values[3 * i];
            const auto& t = direction_[i];
            double along = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                double v = u[k] + dt * (nu * lap_[3 * i + k] + drift_[3 * i + k]);
                if (noisy) v += amplitude_[i] * xi_[i] * t[k];
                along += v * t[k];
            }
            // keep the azimuthal ansatz: tangential, no radial or polar part
            for (std::size_t k = 0; k < 3; ++k) u[k] = along * t[k];
        }
    }
    z.time += dt;
    for (double v : z.values)
        if (!std::isfinite(v))
            throw NumericError("non-finite state at step " + std::to_string(step_index) +
                               ", realization " + std::to_string(noise.realization()));
}

DiagnosticsSeries run_realization(const SimConfig& config, const Grid& grid, const ForcingField& forcing,
                                  std::size_t realization_index, VelocityField* final_state) {
    const Stepper stepper(config, grid, forcing);
    const NoiseStream noise(config.seed, realization_index);
    VelocityField z = VelocityField::zeros(grid);
    const std::size_t n_steps = config.steps();

    DiagnosticsSeries series;
    double cumulative = 0.0;
    for (std::size_t k = 0;; ++k) {
        z.time = static_cast<double>(k) * config.dt;
        const double grad = gradient_energy(z, grid);
        const double wall = wall_energy(z, grid);
        const double rate = config.nu * grad;
        if (k % config.sample_every == 0 || k == n_steps) {
            DiagnosticSample s;
            s.time = z.time;
            s.kinetic_energy = kinetic_energy(z, grid);
            s.dissipation_rate = rate;
            s.wall_energy = wall;
            s.slip_norm = config.nu * (grad + config.alpha * wall);
            s.cumulative_dissipation = cumulative;
            series.samples.push_back(s);
        }
        if (k == n_steps) break;
        cumulative += config.dt * rate;
        stepper.step(z, noise, k);
    }
    if (final_state) *final_state = std::move(z);
    return series;
}

std::vector<DiagnosticsSeries> run_ensemble(const SimConfig& config, const Grid& grid,
                                            const ForcingField& forcing, unsigned workers) {
    const std::size_t n = config.realizations;
    std::vector<DiagnosticsSeries> out(n);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (workers == 1) {
        for (std::size_t r = 0; r < n; ++r) out[r] = run_realization(config, grid, forcing, r);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < n && !failed; r = next++) {
                    try {
                        out[r] = run_realization(config, grid, forcing, r);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace adsim
