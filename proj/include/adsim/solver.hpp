#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adsim/diagnostics.hpp"
#include "adsim/forcing.hpp"
#include "adsim/geometry.hpp"
#include "adsim/noise.hpp"

namespace adsim {

enum class NoiseMode {
    node_iid,            ///< dW_j = sqrt(dt) xi_j
    white_noise_scaled,  ///< dW_j = sqrt(dt / |cell_j|) xi_j
    off
};

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& s);
std::string to_string(GeometryKind g);
std::string to_string(SphereMode m);
std::string to_string(Regularization r);

struct SimConfig {
    GeometryKind geometry = GeometryKind::halfspace;
    SphereMode mode = SphereMode::axisymmetric;
    double nu = 0.1;
    double delta = 0.75;
    double alpha = 0.0005;
    double dt = 0.005;
    double T = 1.0;
    double y_max = 10.0;
    double R = 5.0;
    NoiseMode noise_mode = NoiseMode::node_iid;
    bool deterministic_forcing = false;
    std::size_t realizations = 250;
    std::uint64_t seed = 20240101;
    std::size_t sample_every = 10;
    Regularization regularization = Regularization::cell_average;
    double amplitude = 1.0;

    /// Throws ConfigError on violated invariants (stability is checked separately).
    void validate() const;
    std::size_t steps() const;
    ForcingSpec forcing_spec() const;
};

Grid build_grid(const SimConfig& config);

struct StabilityReport {
    double dt = 0.0;
    double dt_max = 0.0;        ///< 2 / (nu * spectral bound of the operator)
    double spectral_bound = 0.0;  ///< Gershgorin bound on |eigenvalues| of the Laplacian
    double h_min = 0.0;         ///< smallest cell spacing, including r dtheta and r sin(theta) dphi
    int d_eff = 1;
    double geometric_dt_max = 0.0;  ///< h_min^2 / (2 d_eff nu)
    bool ok = false;
};

StabilityReport validate_stability(const SimConfig& config, const Grid& grid);
/// Throws StabilityError unless the report passes.
void require_stable(const StabilityReport& report);

/// Discrete vector Laplacian with the Navier-slip (Robin) wall closure,
/// homogeneous Dirichlet far field (half-space top), and the curvature term of
/// the azimuthal representation. Self-adjoint in the cell-volume inner product.
class DiffusionOperator {
public:
    DiffusionOperator(const Grid& grid, double alpha);

    /// out = L u for a field with `components` values per cell; pinned cells get 0.
    void apply(std::span<const double> u, std::span<double> out, int components) const;
    double spectral_bound() const { return spectral_bound_; }
    std::size_t size() const { return diag_.size(); }
    bool pinned(std::size_t i) const { return fixed_[i] != 0; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> neighbours_;
    std::vector<double> weights_;
    std::vector<double> diag_;
    std::vector<char> fixed_;
    double spectral_bound_ = 0.0;
};

/// Laplacian of `state` including the wall closure. Throws NumericError on NaN input.
VelocityField apply_laplacian(const VelocityField& state, const Grid& grid, double alpha);

/// One Euler-Maruyama step: z <- z + dt (nu L z + f) + g dW.
/// The grid must outlive the stepper.
class Stepper {
public:
    Stepper(const SimConfig& config, const Grid& grid, const ForcingField& forcing);

    void step(VelocityField& z, const NoiseStream& noise, std::uint64_t step_index) const;
    const Grid& grid() const { return grid_; }
    const SimConfig& config() const { return config_; }
    /// Expected energy injected by the noise per unit time: sum_j |cell_j| g_j^2 Var(dW_j)/dt.
    double noise_injection_rate() const;

private:
    SimConfig config_;
    const Grid& grid_;
    DiffusionOperator op_;
    std::vector<double> drift_;      ///< f, component-expanded
    std::vector<double> amplitude_;  ///< g * scale of dW, per cell
    std::vector<Vec3> direction_;
    mutable std::vector<double> lap_;
    mutable std::vector<double> xi_;
};

/// Integrates one realization from z(0) = 0 to T; samples every
/// `sample_every` steps and at T. Cumulative dissipation is the left-point sum
/// over every step.
DiagnosticsSeries run_realization(const SimConfig& config, const Grid& grid,
                                  const ForcingField& forcing, std::size_t realization_index,
                                  VelocityField* final_state = nullptr);

/// Runs realizations 0..N-1 on up to `workers` threads; results in index order.
std::vector<DiagnosticsSeries> run_ensemble(const SimConfig& config, const Grid& grid,
                                            const ForcingField& forcing, unsigned workers);

}  // namespace adsim
