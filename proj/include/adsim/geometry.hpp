#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace adsim {

using Vec3 = std::array<double, 3>;

/// Direction a finite-volume face is normal to.
enum class FaceKind { normal_y_or_r, polar, azimuthal };

/// Interior face between cells `a` and `b`, oriented from a to b.
struct Face {
    std::size_t a;
    std::size_t b;
    double area;
    double conductance;  ///< area / distance between the two cell centres
    FaceKind kind;
};

/// Boundary face on the slip wall.
struct WallFace {
    std::size_t cell;
    double area;
};

/// Cell/face connectivity shared by every grid. The diffusion operator,
/// quadratures and gradient energies are all assembled from this.
struct CellComplex {
    std::vector<double> volume;
    std::vector<Face> faces;
    std::vector<WallFace> wall;
    /// Coefficient s_i of the zeroth-order term -s_i u_i (curvature of the
    /// azimuthal vector Laplacian); zero in the half-space.
    std::vector<double> sink;
    /// Cells pinned to zero (far-field Dirichlet).
    std::vector<char> fixed;

    std::size_t size() const { return volume.size(); }
};

/// Mesh spacing rule: Kolmogorov scale nu^{3/4}, or explicit spacings.
struct MeshRule {
    bool kolmogorov = true;
    double d1 = 0.0;  ///< dy or dr
    double d2 = 0.0;  ///< dtheta (sphere)
    double d3 = 0.0;  ///< dphi (sphere, full3d)

    static MeshRule kolmogorov_scale() { return {}; }
    static MeshRule spacing(double d1, double d2 = 0.0, double d3 = 0.0) {
        return {false, d1, d2, d3};
    }
};

/// Wall-normal column above an infinite plate, y in [0, y_max].
struct HalfSpaceGrid {
    double dy = 0.0;
    double y_max = 0.0;
    std::vector<double> nodes;        ///< y_j = j*dy, j = 0..J
    std::size_t wall_index = 0;
    std::vector<double> edge_weight;  ///< |[y_j, y_{j+1}] ∩ [0, y_max]|
    CellComplex cells;

    std::size_t intervals() const { return nodes.size() - 1; }
};

enum class SphereMode { axisymmetric, full3d };

struct SphereCell {
    std::size_t shell;
    std::size_t ring;
    std::size_t sector;
    double r;
    double theta;
    double phi;
    double theta_lo, theta_hi;
    double phi_lo, phi_hi;
};

/// Ball of radius R in spherical coordinates. Radial nodes sit at
/// (i+1/2)dr with the outermost node on the wall; each shell carries its own
/// polar (and, in full3d, azimuthal) partition so that cell arc lengths stay
/// close to the wall-shell spacing.
struct SphereGrid {
    double R = 0.0;
    SphereMode mode = SphereMode::axisymmetric;
    double dr = 0.0;
    double dtheta = 0.0;  ///< polar spacing on the wall shell
    double dphi = 0.0;    ///< azimuthal spacing on the wall (2*pi in axisymmetric mode)
    std::vector<double> radii;
    std::vector<double> shell_lo, shell_hi;
    std::vector<std::size_t> rings_per_shell;
    std::vector<SphereCell> info;
    std::vector<std::size_t> origin_shell;
    std::vector<std::size_t> wall_shell;
    CellComplex cells;

    std::size_t shells() const { return radii.size(); }
};

using Grid = std::variant<HalfSpaceGrid, SphereGrid>;

HalfSpaceGrid build_halfspace_grid(double nu, double y_max, MeshRule rule);
SphereGrid build_sphere_grid(double nu, double R, SphereMode mode, MeshRule rule);

const CellComplex& complex_of(const Grid& grid);
std::size_t cell_count(const Grid& grid);
/// Components stored per cell for a velocity field on this grid.
int components_of(const Grid& grid);
/// Distance from each cell centre to the wall.
std::vector<double> wall_distance(const Grid& grid);
/// Spacing used by the wall-cell regularisation (dy or dr).
double wall_spacing(const Grid& grid);
/// Cell-centre positions (half-space: (0, y, 0)).
std::vector<Vec3> cell_positions(const Grid& grid);
/// Unit azimuthal (half-space: z) direction at each cell centre.
std::vector<Vec3> tangent_directions(const Grid& grid);

/// Sum_j values_j * volume_j.
double volume_integral(std::span<const double> values, const Grid& grid);
/// Sum over wall cells of values * wall area (per unit plate area in the half-space).
double surface_integral(std::span<const double> values, const Grid& grid);

/// State z at one time. Values are cell-major: values[cell*components + c].
struct VelocityField {
    int components = 1;
    std::vector<double> values;
    double time = 0.0;

    static VelocityField zeros(const Grid& grid);
    std::size_t cells() const { return values.size() / static_cast<std::size_t>(components); }
    bool finite() const;
};

/// |z|^2 per cell.
std::vector<double> squared_magnitude(const VelocityField& field);

}  // namespace adsim
