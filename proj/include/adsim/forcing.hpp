#pragma once

#include <vector>

#include "adsim/geometry.hpp"

namespace adsim {

enum class GeometryKind { halfspace, sphere };

/// How the amplitude is evaluated at the wall cell, where dist = 0.
enum class Regularization {
    cell_average,     ///< (1/h) * integral_0^h u^{-delta/2} du
    half_cell_offset  ///< amplitude evaluated at dist + h/2
};

struct ForcingSpec {
    double delta = 0.75;
    GeometryKind geometry = GeometryKind::halfspace;
    double R = 5.0;       ///< ball radius (sphere)
    double y_max = 10.0;  ///< column height (half-space)
    Regularization regularization = Regularization::cell_average;
    double amplitude = 1.0;
};

/// Scalar amplitude of g per cell: the z-component in the half-space, the
/// phi-hat component in the ball.
struct ForcingField {
    std::vector<double> values;
};

/// amplitude * dist^{-delta/2}, regularised at the wall cell.
ForcingField build_forcing(const ForcingSpec& spec, const Grid& grid);

/// Closed form of ||g||^2_{L^2(D)}: 8 pi R^{3-d}/((1-d)(2-d)(3-d)) for the ball,
/// y_max^{1-d}/(1-d) per unit plate area for the half-space.
double forcing_l2_norm_sq(const ForcingSpec& spec);

/// Maximum absolute finite-volume divergence over interior cells.
///
/// One-component fields are tangential (planar or azimuthal, independent of
/// the ignorable coordinate) and have zero divergence structurally.
/// Three-component fields are (r, theta, phi) components on an axisymmetric
/// sphere grid and Cartesian components otherwise.
double divergence_residual(const VelocityField& field, const Grid& grid);

/// Wraps a forcing amplitude as a velocity field (1 component, or phi-hat
/// times the amplitude in full3d mode).
VelocityField forcing_as_field(const ForcingField& forcing, const Grid& grid);

}  // namespace adsim
