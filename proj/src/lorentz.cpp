#include "adsmax/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adsmax/angles.hpp"
#include "adsmax/constants.hpp"
#include "adsmax/errors.hpp"

namespace adsmax::lorentz {

namespace {

const Mat2 kJ = (Mat2() << 0, -1, 1, 0).finished();

}  // namespace

double Vec22::euclidean_norm() const {
  return std::sqrt(x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4);
}

double inner(const Vec22& a, const Vec22& b) {
  return a.x1 * b.x1 + a.x2 * b.x2 - a.x3 * b.x3 - a.x4 * b.x4;
}

QuadricPoint::QuadricPoint(const Vec22& v) {
  const double n = inner(v, v);
  if (!(n < 0) || !std::isfinite(n))
    throw ValidationError("QuadricPoint: vector is not timelike");
  v_ = v / std::sqrt(-n);
}

QuadricPoint QuadricPoint::antipode() const { return QuadricPoint(-v_); }

Eigen::Vector3d hyperboloid(const Eigen::Vector2d& y) {
  const double r2 = y.squaredNorm();
  if (!(r2 < 1.0)) throw ValidationError("point outside the Poincare disk");
  const double d = 1.0 - r2;
  return {2.0 * y[0] / d, 2.0 * y[1] / d, (1.0 + r2) / d};
}

Eigen::Vector2d poincare(const Eigen::Vector3d& X) {
  return {X[0] / (1.0 + X[2]), X[1] / (1.0 + X[2])};
}

double lapse(const Eigen::Vector2d& y) {
  const double r2 = y.squaredNorm();
  return (1.0 + r2) / (1.0 - r2);
}

double conformal_factor(const Eigen::Vector2d& y) { return 2.0 / (1.0 - y.squaredNorm()); }

double hyperbolic_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double num = 2.0 * (a - b).squaredNorm();
  const double den = (1.0 - a.squaredNorm()) * (1.0 - b.squaredNorm());
  return std::acosh(1.0 + num / den);
}

double hyperbolic_radius(const Eigen::Vector2d& y) { return 2.0 * std::atanh(y.norm()); }

QuadricPoint chart_to_quadric(const CylPoint& p) {
  const Eigen::Vector3d X = hyperboloid(p.y);
  return QuadricPoint(Vec22{X[0], X[1], X[2] * std::cos(p.t), X[2] * std::sin(p.t)});
}

double cylinder_time(const Vec22& x, std::optional<double> t_hint) {
  double t = std::atan2(x.x4, x.x3);
  if (t_hint) t += two_pi * std::round((*t_hint - t) / two_pi);
  return t;
}

CylPoint quadric_to_chart(const QuadricPoint& q, std::optional<double> t_hint) {
  const Vec22& x = q.v();
  const double X3 = std::hypot(x.x3, x.x4);
  CylPoint p;
  p.y = poincare(Eigen::Vector3d(x.x1, x.x2, X3));
  p.t = cylinder_time(x, t_hint);
  return p;
}

const char* to_string(CausalClass c) {
  switch (c) {
    case CausalClass::timelike: return "timelike";
    case CausalClass::lightlike: return "lightlike";
    case CausalClass::spacelike: return "spacelike";
  }
  return "?";
}

QuadricPoint geodesic_exp(const QuadricPoint& p, const TangentVec& v, double s) {
  const Vec22& x = p.v();
  const double scale = std::max(1.0, v.euclidean_norm());
  if (std::abs(inner(x, v)) > tol::exact * scale * x.euclidean_norm())
    throw ValidationError("geodesic_exp: v is not tangent at p");
  const double n = inner(v, v);
  if (std::abs(n) <= tol::causal * scale * scale) return QuadricPoint(x + s * v);
  const Vec22 w = v / std::sqrt(std::abs(n));
  if (n < 0) return QuadricPoint(std::cos(s) * x + std::sin(s) * w);
  return QuadricPoint(std::cosh(s) * x + std::sinh(s) * w);
}

Separation lorentz_separation(const QuadricPoint& p, const QuadricPoint& q) {
  const double c = -inner(p.v(), q.v());
  if (c < -1.0 - tol::exact)
    throw ValidationError("lorentz_separation: separation exceeds one period");
  if (std::abs(c - 1.0) <= tol::exact) return {CausalClass::lightlike, 0.0};
  if (c < 1.0) return {CausalClass::timelike, std::acos(std::max(c, -1.0))};
  return {CausalClass::spacelike, std::acosh(c)};
}

SpacelikePlane dual_plane(const QuadricPoint& p) { return SpacelikePlane{p}; }

QuadricPoint dual_point(const SpacelikePlane& P) { return P.dual; }

SpacelikePlane reference_plane() { return SpacelikePlane{QuadricPoint(Vec22{0, 0, 0, 1})}; }

PlaneFrame plane_frame(const SpacelikePlane& P) {
  const Vec22& q = P.dual.v();
  auto project = [&](const Vec22& e) { return e + inner(e, q) * q; };
  const Vec22 basis[4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  // (0,0,q4,-q3) is timelike and orthogonal to q
  Vec22 c0{0, 0, q.x4, -q.x3};
  c0 = c0 / std::sqrt(-inner(c0, c0));
  PlaneFrame f;
  f.c0 = c0;
  Vec22 found[2];
  int k = 0;
  for (int i = 0; i < 4 && k < 2; ++i) {
    Vec22 e = project(basis[i]);
    e = e + inner(e, c0) * c0;
    for (int j = 0; j < k; ++j) e = e - inner(e, found[j]) * found[j];
    const double n = inner(e, e);
    if (n > 1e-6) found[k++] = e / std::sqrt(n);
  }
  f.e1 = found[0];
  f.e2 = found[1];
  return f;
}

QuadricPoint plane_point(const SpacelikePlane& P, const Eigen::Vector2d& z) {
  const PlaneFrame f = plane_frame(P);
  const Eigen::Vector3d X = hyperboloid(z);
  return QuadricPoint(X[2] * f.c0 + X[0] * f.e1 + X[1] * f.e2);
}

Mat2 to_matrix(const Vec22& v) {
  Mat2 n;
  n << v.x3 + v.x1, v.x2 + v.x4, v.x2 - v.x4, v.x3 - v.x1;
  return n * kJ;
}

Vec22 from_matrix(const Mat2& m) {
  const Mat2 n = m * kJ.inverse();
  return {(n(0, 0) - n(1, 1)) / 2.0, (n(0, 1) + n(1, 0)) / 2.0, (n(0, 0) + n(1, 1)) / 2.0,
          (n(0, 1) - n(1, 0)) / 2.0};
}

RP1 RP1::from_angle(double alpha) { return {std::cos(alpha / 2.0), std::sin(alpha / 2.0)}; }

double RP1::angle() const { return wrap_2pi(2.0 * std::atan2(b, a)); }

double bracket(const RP1& p, const RP1& q) { return p.a * q.b - p.b * q.a; }

Ruling ruling_coords(const Vec22& v) {
  const double scale = v.euclidean_norm();
  if (scale == 0.0) throw ValidationError("ruling_coords: zero vector");
  if (std::abs(inner(v, v)) > 1e-9 * scale * scale)
    throw ValidationError("ruling_coords: vector is not null");
  const Mat2 m = to_matrix(v);
  const int col = m.col(0).squaredNorm() >= m.col(1).squaredNorm() ? 0 : 1;
  const int row = m.row(0).squaredNorm() >= m.row(1).squaredNorm() ? 0 : 1;
  const Eigen::Vector2d u = m.col(col);
  const Eigen::Vector2d r = m.row(row).transpose();
  // m = u (J e)^T, so e = J^{-1} r
  return {RP1{u[0], u[1]}, RP1{r[1], -r[0]}};
}

Vec22 null_from_ruling(const RP1& xi, const RP1& eta) {
  const Eigen::Vector2d u(xi.a, xi.b);
  const Eigen::Vector2d je(-eta.b, eta.a);
  return from_matrix(u * je.transpose());
}

Vec22 boundary_point(double theta, double tau) {
  return {std::cos(theta), std::sin(theta), std::cos(tau), std::sin(tau)};
}

MobiusMap::MobiusMap(const Mat2& m) {
  const double d = m.determinant();
  if (!(d > 0) || !std::isfinite(d))
    throw ValidationError("MobiusMap: determinant must be positive");
  m_ = m / std::sqrt(d);
}

MobiusMap MobiusMap::rotation(double alpha) {
  const double c = std::cos(alpha / 2.0), s = std::sin(alpha / 2.0);
  return MobiusMap((Mat2() << c, -s, s, c).finished());
}

MobiusMap MobiusMap::hyperbolic(double s) {
  const double c = std::cosh(s / 2.0), h = std::sinh(s / 2.0);
  return MobiusMap((Mat2() << c, h, h, c).finished());
}

MobiusMap MobiusMap::inverse() const { return MobiusMap(m_.inverse()); }

RP1 MobiusMap::apply(const RP1& p) const {
  return {m_(0, 0) * p.a + m_(0, 1) * p.b, m_(1, 0) * p.a + m_(1, 1) * p.b};
}

double MobiusMap::apply_angle(double alpha) const { return apply(RP1::from_angle(alpha)).angle(); }

Vec22 apply_isometry(const Isometry3& g, const Vec22& x) {
  return from_matrix(g.left.matrix() * to_matrix(x) * g.right.matrix().inverse());
}

QuadricPoint apply_isometry(const Isometry3& g, const QuadricPoint& p) {
  return QuadricPoint(apply_isometry(g, p.v()));
}

Isometry3 time_translation(double c) {
  return {MobiusMap::rotation(-c), MobiusMap::rotation(c)};
}

Isometry3 disk_rotation(double psi) { return {MobiusMap::rotation(psi), MobiusMap::rotation(psi)}; }

Eigen::Vector3d projective_chart(const CylPoint& p) {
  if (!(std::abs(p.t) < half_pi)) throw ValidationError("projective_chart: |t| >= pi/2");
  const Eigen::Vector3d X = hyperboloid(p.y);
  const double den = X[2] * std::cos(p.t);
  return {X[0] / den, X[1] / den, std::tan(p.t)};
}

Eigen::Vector3d projective_chart(const Vec22& x) {
  if (x.x3 == 0.0) throw ValidationError("projective_chart: point at infinity of the chart");
  return {x.x1 / x.x3, x.x2 / x.x3, x.x4 / x.x3};
}

QuadricPoint projective_lift(const Eigen::Vector3d& z) {
  const double d = 1.0 + z[2] * z[2] - z[0] * z[0] - z[1] * z[1];
  if (!(d > 0)) throw ValidationError("projective_lift: point outside the chart image");
  return QuadricPoint(Vec22{z[0], z[1], 1.0, z[2]} / std::sqrt(d));
}

MobiusMap plane_mobius(const SpacelikePlane& P) {
  return MobiusMap(to_matrix(P.dual.v())).inverse();
}

std::pair<Isometry3, Isometry3> leftright_to_P0(const SpacelikePlane& P) {
  const MobiusMap m = plane_mobius(P);
  return {Isometry3{MobiusMap::identity(), m.inverse()}, Isometry3{m, MobiusMap::identity()}};
}

Eigen::Vector2d reference_plane_coords(const Vec22& x) {
  const double s = x.x3 < 0 ? -1.0 : 1.0;
  const double X3 = std::sqrt(1.0 + x.x1 * x.x1 + x.x2 * x.x2);
  return poincare(Eigen::Vector3d(s * x.x1, s * x.x2, X3));
}

}  // namespace adsmax::lorentz
