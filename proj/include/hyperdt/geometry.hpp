#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Numerical kernel for the Lorentz (hyperboloid), Beltrami-Klein, and
// Poincare representations of hyperbolic space with curvature K < 0.
//
// Conventions used throughout:
//   * Lorentz points are (d+1)-vectors with the timelike coordinate at
//     index 0 and <u,u>_M = 1/K, u0 > 0.
//   * The gnomonic projection is the plain coordinate ratio u_i / u0, so
//     Klein (and Poincare) coordinates live in the open unit ball for
//     every K. Curvature enters through distances, not through the ball
//     radius.
//   * gamma(v, K) is defined as the timelike coordinate of the lift of v
//     back onto the hyperboloid; this is the weight that appears in the
//     Einstein midpoint.
//
// All functions are pure and thread-safe.

namespace hyperdt::geom {

struct Curvature {
  double K;  // strictly negative

  explicit Curvature(double k);
};

// Relative tolerance for manifold-membership checks.
inline constexpr double kMembershipTol = 1e-9;

using Vec = std::vector<double>;

double minkowski_inner(std::span<const double> u, std::span<const double> v);

// Validates the hyperboloid constraint for u at curvature K. If the
// constraint holds within kMembershipTol (relative), the timelike
// coordinate is rescaled so it holds exactly; otherwise throws.
Vec normalize_lorentz(std::span<const double> u, Curvature K);

bool is_in_unit_ball(std::span<const double> v);

// Geodesic distance on the hyperboloid: arccosh(K * <u,v>_M) / sqrt(-K).
// Arguments that undershoot 1 by less than kMembershipTol are clamped.
double lorentz_distance(std::span<const double> u, std::span<const double> v,
                        Curvature K);

// Gnomonic projection u -> (u_1/u_0, ..., u_d/u_0).
Vec lorentz_to_klein(std::span<const double> u);

// Inverse gnomonic projection; the output satisfies <u,u>_M = 1/K.
Vec klein_to_lorentz(std::span<const double> v, Curvature K);

Vec poincare_to_klein(std::span<const double> u, Curvature K);
Vec klein_to_poincare(std::span<const double> v, Curvature K);

// Distance in the Klein ball, defined by composition: lift both points to
// the hyperboloid and measure there.
double klein_distance(std::span<const double> u, std::span<const double> v,
                      Curvature K);

// Cross-ratio distance along the chord through b and c, using the chord's
// two unit-sphere boundary intersections. Returns 0 for b == c.
double cross_ratio_distance(std::span<const double> b,
                            std::span<const double> c, Curvature K);

// Einstein-midpoint weight: the timelike coordinate of klein_to_lorentz.
double gamma(std::span<const double> x, Curvature K);
double gamma_scalar(double t, Curvature K);

Vec einstein_midpoint(std::span<const double> u, std::span<const double> v,
                      Curvature K);

// One-dimensional Einstein midpoint of two Klein coordinates, used for
// threshold adjustment along a single split axis.
double scalar_einstein_midpoint(double L, double R, Curvature K);

// Split angles parameterize homogeneous hyperplanes via the normal
// n(i, theta) = (-cos theta, 0, ..., sin theta, ..., 0). The Klein
// threshold equivalent of theta is cot(theta).
struct SplitAngle {
  double theta;  // in (0, pi)

  explicit SplitAngle(double t);
};

// arccot with range (0, pi).
double arccot(double x);

// Hyperbolically equidistant midpoint of two split angles. Satisfies
// cot(m) == scalar_einstein_midpoint(cot t1, cot t2). The singular case
// t1 + t2 == pi returns pi/2.
SplitAngle angular_midpoint(SplitAngle t1, SplitAngle t2);

}  // namespace hyperdt::geom
