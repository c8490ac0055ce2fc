#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adsim/geometry.hpp"

namespace adsim::analysis {

/// Admissible (s, p) for fractional regularity of the boundary-singular forcing:
/// s = (1 - delta + 2 eps)/(2 - delta) and p in (p_lower, p_upper) with
/// p_upper = 1/delta.
struct FeasibilityQuery {
    double delta = 0.0;
    double eps = 0.0;
    double s = 0.0;
    double p_lower = 0.0;
    double p_upper = 0.0;
    double quadratic = 0.0;  ///< 4(1 - eps) - 11 delta + 5 delta^2
    bool feasible = false;
};

FeasibilityQuery feasibility_check(double delta, double eps);
/// Smallest root of 5 d^2 - 11 d + 4(1 - eps) = 0.
double feasibility_threshold(double eps = 0.0);

struct RadialMoment {
    double quadrature = 0.0;
    double closed_form = 0.0;      ///< Gamma((3-d)/2) / (2 (2b)^{(3-d)/2})
    double printed_form = 0.0;     ///< same prefactor with Gamma(3-d)
    double refinement_change = 0.0;  ///< |I(L) - I(L+1)| between refinement levels
};

/// int_0^inf exp(-2 b r^2) r^{2-delta} dr
RadialMoment gaussian_radial_moment(double delta, double b);

struct LowerBoundParams {
    double delta = 0.5;
    double b = 1.0;
    double c = 1.0;
    double w = 0.0;
    double T = 1.0;
};

/// 2 pi^2 c^2 T^{2-d/2} / ((1-d/2)(2-d/2)) times the radial Gaussian moment.
double lower_bound_value(const LowerBoundParams& params);

struct InterpolationExponent {
    double theta = 0.0;
    double s = 0.0;
    double residual = 0.0;  ///< |theta - delta/2|
};

/// Solves 1/2 + eps = (1 - theta) s + theta.
InterpolationExponent interpolation_exponent(double delta, double eps);

struct BbmRow {
    double s = 0.0;
    double scaled_seminorm = 0.0;  ///< (1-s) |h|^2_{H^s}
    double reference = 0.0;        ///< K_d ||grad h||^2
};

struct BbmTable {
    std::vector<BbmRow> rows;
    double extrapolated = 0.0;  ///< polynomial extrapolation of the rows to s = 1
    double reference = 0.0;
};

/// Extrapolates values[k] taken at s[k] to s = 1 (Neville in 1 - s).
double extrapolate_to_one(std::span<const double> s, std::span<const double> values);

/// 1-D field sampled at y_j = j*dy on [0, L]. Uses lag integration with the
/// r^{1-2s} weight integrated exactly against a piecewise-linear
/// F(r)/r^2; the reference is ||h'||^2 (one-dimensional constant 1).
BbmTable bbm_limit_check_1d(std::span<const double> samples, double dy, std::span<const double> s_values);

/// Smooth field on the unit cube, compared against (2 pi/3) ||grad h||^2.
BbmTable bbm_limit_check_3d(const std::function<double(const Vec3&)>& field,
                            std::span<const double> s_values);

/// Outcome of one check in the verification suite.
struct Check {
    std::string name;
    double value = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Full closed-form verification suite (the `verify` subcommand).
std::vector<Check> run_verification_suite();

}  // namespace adsim::analysis
