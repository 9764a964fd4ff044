#include "hyperdt/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperdt::geom {

Curvature::Curvature(double k) : K(k) {
  if (!(k < 0.0) || !std::isfinite(k))
    throw std::invalid_argument("curvature must be a finite negative number");
}

SplitAngle::SplitAngle(double t) : theta(t) {
  if (!(t > 0.0) || !(t < M_PI))
    throw std::domain_error("split angle must lie in (0, pi)");
}

double minkowski_inner(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.size() < 2)
    throw std::invalid_argument("minkowski_inner: dimension mismatch");
  double acc = -u[0] * v[0];
  for (std::size_t i = 1; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

static double sq_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

Vec normalize_lorentz(std::span<const double> u, Curvature K) {
  if (u.size() < 2) throw std::invalid_argument("lorentz point needs >= 2 coords");
  if (!(u[0] > 0.0)) throw std::invalid_argument("timelike coordinate must be positive");
  const double inner = minkowski_inner(u, u);
  const double target = 1.0 / K.K;
  if (std::abs(inner - target) > kMembershipTol * std::abs(target))
    throw std::invalid_argument("point does not satisfy the hyperboloid constraint");
  Vec out(u.begin(), u.end());
  // Rescale u0 so that -u0^2 + |u_s|^2 == 1/K exactly.
  double space = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) space += u[i] * u[i];
  out[0] = std::sqrt(space - target);
  return out;
}

bool is_in_unit_ball(std::span<const double> v) { return sq_norm(v) < 1.0; }

static void require_in_ball(std::span<const double> v, const char* who) {
  if (!is_in_unit_ball(v))
    throw std::invalid_argument(std::string(who) + ": point outside the Klein ball");
}

double lorentz_distance(std::span<const double> u, std::span<const double> v,
                        Curvature K) {
  double arg = K.K * minkowski_inner(u, v);
  if (arg < 1.0) {
    if (arg < 1.0 - kMembershipTol)
      throw std::domain_error("lorentz_distance: arccosh argument below 1");
    arg = 1.0;
  }
  return std::acosh(arg) / std::sqrt(-K.K);
}

Vec lorentz_to_klein(std::span<const double> u) {
  if (u.size() < 2) throw std::invalid_argument("lorentz point needs >= 2 coords");
  if (!(u[0] > 0.0))
    throw std::invalid_argument("lorentz_to_klein: timelike coordinate must be positive");
  Vec out(u.size() - 1);
  for (std::size_t i = 1; i < u.size(); ++i) out[i - 1] = u[i] / u[0];
  return out;
}

Vec klein_to_lorentz(std::span<const double> v, Curvature K) {
  require_in_ball(v, "klein_to_lorentz");
  const double u0 = 1.0 / std::sqrt(-K.K * (1.0 - sq_norm(v)));
  Vec out(v.size() + 1);
  out[0] = u0;
  for (std::size_t i = 0; i < v.size(); ++i) out[i + 1] = v[i] * u0;
  return out;
}

Vec poincare_to_klein(std::span<const double> u, Curvature K) {
  (void)K;  // ball radius is curvature-independent under the ratio convention
  require_in_ball(u, "poincare_to_klein");
  const double denom = 1.0 + std::sqrt(1.0 - sq_norm(u));
  Vec out(u.begin(), u.end());
  for (double& x : out) x /= denom;
  return out;
}

Vec klein_to_poincare(std::span<const double> v, Curvature K) {
  (void)K;
  require_in_ball(v, "klein_to_poincare");
  // Exact functional inverse of poincare_to_klein.
  const double denom = 1.0 + sq_norm(v);
  Vec out(v.begin(), v.end());
  for (double& x : out) x = 2.0 * x / denom;
  return out;
}

double klein_distance(std::span<const double> u, std::span<const double> v,
                      Curvature K) {
  return lorentz_distance(klein_to_lorentz(u, K), klein_to_lorentz(v, K), K);
}

double cross_ratio_distance(std::span<const double> b,
                            std::span<const double> c, Curvature K) {
  require_in_ball(b, "cross_ratio_distance");
  require_in_ball(c, "cross_ratio_distance");
  if (b.size() != c.size())
    throw std::invalid_argument("cross_ratio_distance: dimension mismatch");

  Vec dir(b.size());
  double dir2 = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    dir[i] = c[i] - b[i];
    dir2 += dir[i] * dir[i];
  }
  if (dir2 == 0.0) return 0.0;  // degenerate chord

  // |b + t dir|^2 = 1, with roots ta < 0 (point a) and td > 1 (point d),
  // so that the chord ordering is a, b, c, d.
  double bd = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) bd += b[i] * dir[i];
  const double disc = bd * bd - dir2 * (sq_norm(b) - 1.0);
  const double root = std::sqrt(disc);
  const double ta = (-bd - root) / dir2;
  const double td = (-bd + root) / dir2;

  const double len = std::sqrt(dir2);
  const double ac = (1.0 - ta) * len;   // a..c, c at t = 1
  const double bdist = td * len;        // b..d, b at t = 0
  const double ab = -ta * len;
  const double cd = (td - 1.0) * len;
  return 0.5 * std::log((ac * bdist) / (ab * cd)) / std::sqrt(-K.K);
}

double gamma(std::span<const double> x, Curvature K) {
  require_in_ball(x, "gamma");
  return 1.0 / std::sqrt(-K.K * (1.0 - sq_norm(x)));
}

double gamma_scalar(double t, Curvature K) {
  if (!(t * t < 1.0)) throw std::invalid_argument("gamma: coordinate outside the Klein ball");
  return 1.0 / std::sqrt(-K.K * (1.0 - t * t));
}

Vec einstein_midpoint(std::span<const double> u, std::span<const double> v,
                      Curvature K) {
  const double gu = gamma(u, K);
  const double gv = gamma(v, K);
  Vec out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = (gu * u[i] + gv * v[i]) / (gu + gv);
  return out;
}

double scalar_einstein_midpoint(double L, double R, Curvature K) {
  const double gl = gamma_scalar(L, K);
  const double gr = gamma_scalar(R, K);
  return (gl * L + gr * R) / (gl + gr);
}

double arccot(double x) { return M_PI_2 - std::atan(x); }

SplitAngle angular_midpoint(SplitAngle t1, SplitAngle t2) {
  const double a1 = t1.theta, a2 = t2.theta;
  if (a1 == a2) return t1;
  if (a1 + a2 == M_PI) return SplitAngle(M_PI_2);  // symmetric equidistant angle
  const double alpha =
      std::sin(2.0 * a1 - 2.0 * a2) /
      (2.0 * std::sin(a1 + a2) * std::sin(a1 - a2));
  const double beta = (M_PI - a1 - a2) > 0.0 ? 1.0 : -1.0;
  const double cot_m = alpha - beta * std::sqrt(alpha * alpha - 1.0);
  return SplitAngle(arccot(cot_m));
}

}  // namespace hyperdt::geom
