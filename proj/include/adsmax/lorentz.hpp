#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>

namespace adsmax::lorentz {

// Vector of R^{2,2}; the form is x1^2 + x2^2 - x3^2 - x4^2.
struct Vec22 {
  double x1 = 0, x2 = 0, x3 = 0, x4 = 0;

  double& operator[](int i) { return i == 0 ? x1 : i == 1 ? x2 : i == 2 ? x3 : x4; }
  double operator[](int i) const { return i == 0 ? x1 : i == 1 ? x2 : i == 2 ? x3 : x4; }

  Vec22 operator+(const Vec22& o) const { return {x1 + o.x1, x2 + o.x2, x3 + o.x3, x4 + o.x4}; }
  Vec22 operator-(const Vec22& o) const { return {x1 - o.x1, x2 - o.x2, x3 - o.x3, x4 - o.x4}; }
  Vec22 operator-() const { return {-x1, -x2, -x3, -x4}; }
  Vec22 operator*(double s) const { return {s * x1, s * x2, s * x3, s * x4}; }
  Vec22 operator/(double s) const { return {x1 / s, x2 / s, x3 / s, x4 / s}; }
  Vec22& operator+=(const Vec22& o) { x1 += o.x1; x2 += o.x2; x3 += o.x3; x4 += o.x4; return *this; }

  double euclidean_norm() const;
  Eigen::Vector4d eigen() const { return {x1, x2, x3, x4}; }
  static Vec22 from_eigen(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

inline Vec22 operator*(double s, const Vec22& v) { return v * s; }

using TangentVec = Vec22;

double inner(const Vec22& a, const Vec22& b);

// Point of AdS* = {<x,x> = -1}; renormalized on construction.
class QuadricPoint {
 public:
  explicit QuadricPoint(const Vec22& v);
  const Vec22& v() const { return v_; }
  QuadricPoint antipode() const;

 private:
  Vec22 v_;
};

// Poincare-disk point y and universal-cover time t.
struct CylPoint {
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
  double t = 0;
};

// Poincare disk <-> hyperboloid {X3^2 - X1^2 - X2^2 = 1, X3 > 0}
Eigen::Vector3d hyperboloid(const Eigen::Vector2d& y);
Eigen::Vector2d poincare(const Eigen::Vector3d& X);
// lapse phi = X3 = (1+r^2)/(1-r^2)
double lapse(const Eigen::Vector2d& y);
// conformal factor a with hyperbolic metric a^2 |dy|^2, a = 2/(1-r^2)
double conformal_factor(const Eigen::Vector2d& y);
double hyperbolic_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b);
double hyperbolic_radius(const Eigen::Vector2d& y);

QuadricPoint chart_to_quadric(const CylPoint& p);
CylPoint quadric_to_chart(const QuadricPoint& q, std::optional<double> t_hint = std::nullopt);
// cylinder time of any vector with x3^2 + x4^2 > 0
double cylinder_time(const Vec22& x, std::optional<double> t_hint = std::nullopt);

enum class CausalClass { timelike, lightlike, spacelike };
const char* to_string(CausalClass c);

QuadricPoint geodesic_exp(const QuadricPoint& p, const TangentVec& v, double s);
using GeodesicFn = std::function<QuadricPoint(const QuadricPoint&, const TangentVec&, double)>;

struct Separation {
  CausalClass cls;
  double value;
};
Separation lorentz_separation(const QuadricPoint& p, const QuadricPoint& q);

// Totally geodesic spacelike plane dual^perp in AdS*.
struct SpacelikePlane {
  QuadricPoint dual;
};
SpacelikePlane dual_plane(const QuadricPoint& p);
QuadricPoint dual_point(const SpacelikePlane& P);
// horizontal slice {t = 0} = {x4 = 0}; dual point (0,0,0,1)
SpacelikePlane reference_plane();
// orthonormal frame (c0 timelike, e1, e2 spacelike) of dual^perp
struct PlaneFrame {
  Vec22 c0, e1, e2;
};
PlaneFrame plane_frame(const SpacelikePlane& P);
// point of P with Poincare coordinate z in the frame of plane_frame
QuadricPoint plane_point(const SpacelikePlane& P, const Eigen::Vector2d& z);

using Mat2 = Eigen::Matrix2d;
// det(to_matrix(v)) = -<v,v>
Mat2 to_matrix(const Vec22& v);
Vec22 from_matrix(const Mat2& m);

// point of RP^1 in homogeneous coordinates; angle() is the double-angle
// parameter alpha in [0, 2pi) with representative (cos(alpha/2), sin(alpha/2))
struct RP1 {
  double a = 1, b = 0;
  static RP1 from_angle(double alpha);
  static RP1 affine(double x) { return {x, 1.0}; }
  static RP1 infinity() { return {1.0, 0.0}; }
  double angle() const;
};
double bracket(const RP1& p, const RP1& q);

struct Ruling {
  RP1 xi, eta;
};
Ruling ruling_coords(const Vec22& null_v);
// null vector with the given ruling coordinates (defined up to sign)
Vec22 null_from_ruling(const RP1& xi, const RP1& eta);
// null vector (cos th, sin th, cos tau, sin tau)
Vec22 boundary_point(double theta, double tau);

class MobiusMap {
 public:
  MobiusMap() : m_(Mat2::Identity()) {}
  explicit MobiusMap(const Mat2& m);
  static MobiusMap identity() { return MobiusMap(); }
  static MobiusMap rotation(double alpha);
  static MobiusMap hyperbolic(double s);
  const Mat2& matrix() const { return m_; }
  MobiusMap inverse() const;
  MobiusMap operator*(const MobiusMap& o) const { return MobiusMap(m_ * o.m_); }
  RP1 apply(const RP1& p) const;
  // action on the double-angle parameter, result in [0, 2pi)
  double apply_angle(double alpha) const;

 private:
  Mat2 m_;
};

// acts on the matrix model by M -> A M B^{-1}
struct Isometry3 {
  MobiusMap left, right;
  static Isometry3 identity() { return {}; }
  Isometry3 inverse() const { return {left.inverse(), right.inverse()}; }
  Isometry3 operator*(const Isometry3& o) const { return {left * o.left, right * o.right}; }
};
Vec22 apply_isometry(const Isometry3& g, const Vec22& x);
QuadricPoint apply_isometry(const Isometry3& g, const QuadricPoint& p);
// t -> t + c
Isometry3 time_translation(double c);
// rotation of the disk by psi about the origin
Isometry3 disk_rotation(double psi);

// pi*(y, t) = (x1/(x3 cos t), x2/(x3 cos t), tan t)
Eigen::Vector3d projective_chart(const CylPoint& p);
Eigen::Vector3d projective_chart(const Vec22& x);
// inverse of the chart for z inside {z1^2 + z2^2 < z3^2 + 1}; representative with x3 > 0
QuadricPoint projective_lift(const Eigen::Vector3d& z);

MobiusMap plane_mobius(const SpacelikePlane& P);
// (Phi_{P,l}, Phi_{P,r}) = ((id, m^{-1}), (m, id))
std::pair<Isometry3, Isometry3> leftright_to_P0(const SpacelikePlane& P);
// Poincare coordinate of a point of the reference plane (sign of the representative ignored)
Eigen::Vector2d reference_plane_coords(const Vec22& x);

}  // namespace adsmax::lorentz
