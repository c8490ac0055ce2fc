#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adsim/geometry.hpp"

namespace adsim {

/// Covariant uses the full gradient of the vector field u_phi phi-hat,
/// including the metric term u^2/(r sin theta)^2; naive drops it.
enum class GradientForm { covariant, naive };

/// ||z||^2_{L^2(D)}
double kinetic_energy(const VelocityField& z, const Grid& grid);
/// ||grad z||^2_{L^2(D)}, summed over faces as conductance * (jump)^2.
double gradient_energy(const VelocityField& z, const Grid& grid,
                       GradientForm form = GradientForm::covariant);
/// ||z||^2_{L^2(boundary)} from the wall-cell trace.
double wall_energy(const VelocityField& z, const Grid& grid);
/// nu * (||grad z||^2 + alpha ||z||^2_{boundary})
double slip_norm(const VelocityField& z, const Grid& grid, double nu, double alpha);

struct DiagnosticSample {
    double time = 0.0;
    double kinetic_energy = 0.0;
    double dissipation_rate = 0.0;  ///< nu ||grad z||^2
    double wall_energy = 0.0;
    double slip_norm = 0.0;
    double cumulative_dissipation = 0.0;  ///< int_0^t dissipation_rate
};

struct DiagnosticsSeries {
    std::vector<DiagnosticSample> samples;
};

struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> sem;
};

struct EnsembleStats {
    std::size_t realizations = 0;
    std::vector<double> times;
    ChannelStats kinetic_energy;
    ChannelStats dissipation_rate;
    ChannelStats wall_energy;
    ChannelStats slip_norm;
    ChannelStats cumulative_dissipation;
};

/// Per-sample mean and standard error, summed in series order.
EnsembleStats accumulate_ensemble(std::span<const DiagnosticsSeries> series);

/// nu * E||z(T)||^2 from the final sample.
double weak_dissipation_value(const EnsembleStats& stats, double nu);

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least-squares line through (log x, log y).
PowerLawFit fit_scaling_exponent(std::span<const std::pair<double, double>> pairs);

struct SeminormSampling {
    bool monte_carlo = false;
    std::size_t pairs = 0;
    std::uint64_t seed = 0;

    static SeminormSampling full() { return {}; }
    static SeminormSampling sampled(std::size_t n, std::uint64_t seed) { return {true, n, seed}; }
};

/// Gagliardo double sum int int |f(x)-f(y)|^2 / |x-y|^{d+2s}, skipping pairs
/// closer than half a cell. d = 1 on the half-space column, 3 in the ball.
double hs_seminorm_sq(const VelocityField& z, const Grid& grid, double s,
                      SeminormSampling sampling = SeminormSampling::full());

/// Mollified local Duchon-Robert density (1-D form) at nodes farther than ell
/// from both ends of the column.
struct DensityField {
    std::vector<std::size_t> nodes;
    std::vector<double> values;
};

DensityField duchon_robert_density(const VelocityField& z, const Grid& grid, double ell);

struct SweepRow {
    double nu = 0.0;
    double delta = 0.0;
    std::string mode;
    double time_integrated_diss = 0.0;
    double final_wall_ke = 0.0;
    double final_ke = 0.0;
    double weak_diss = 0.0;
};

SweepRow make_sweep_row(const EnsembleStats& stats, double nu, double delta, std::string mode);

}  // namespace adsim
