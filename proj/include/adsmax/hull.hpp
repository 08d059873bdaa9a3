#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "adsmax/boundary.hpp"
#include "adsmax/lorentz.hpp"

namespace adsmax::hull {

using boundary::BoundaryCurve;
using lorentz::CylPoint;
using lorentz::QuadricPoint;
using lorentz::Vec22;

enum class FacetLabel { past, future, vertical };
const char* to_string(FacetLabel l);

struct Facet {
  std::array<int, 3> v{};  // curve sample indices, counter-clockwise seen from outside
  Eigen::Vector3d n;       // unit outward normal in the chart
  double c = 0;            // supporting plane n.z = c, hull on n.z <= c
  FacetLabel label = FacetLabel::vertical;
  Vec22 dual;              // plane dual (n1, n2, c, -n3), unit timelike when spacelike
  bool lightlike = false;  // degenerate support plane
  // sheet of the facet plane over the disk: t = base + sigma * acos(s(y) / rho)
  double base = 0, sigma = 1, rho = 1;
};

struct Heights {
  double lower, upper;
};

// Convex hull of the chart images of a boundary curve. The curve is first
// shifted in time so that its tau range is centered on 0; every height and
// point reported here is in the time coordinate of the input curve.
class ConvexHull3 {
 public:
  const BoundaryCurve& curve() const { return curve_; }
  double time_offset() const { return offset_; }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  const std::vector<Facet>& facets() const { return facets_; }
  bool planar() const { return planar_; }
  // dual of the plane of a planar hull, chart coordinates
  const Vec22& plane_dual() const { return plane_dual_; }
  double scale() const { return scale_; }
  int count(FacetLabel l) const;

  Heights heights(const Eigen::Vector2d& y) const;
  // chart point of a cylinder point of the input time coordinate
  Eigen::Vector3d chart(const CylPoint& p) const;
  // null vector of a curve sample in chart coordinates (x3 > 0)
  Vec22 vertex(int k) const;

  void write_csv(std::ostream& os) const;

 private:
  friend ConvexHull3 convex_hull(const BoundaryCurve&);
  double facet_height(const Facet& f, const Eigen::Vector3d& X) const;

  BoundaryCurve curve_;
  BoundaryCurve shifted_;
  double offset_ = 0;
  std::vector<Eigen::Vector3d> points_;
  std::vector<Facet> facets_;
  bool planar_ = false;
  Vec22 plane_dual_;
  double scale_ = 1;
};

// sampling density is that of the curve; throws for fewer than 4 samples
ConvexHull3 convex_hull(const BoundaryCurve& curve);

struct ContainResult {
  bool inside;
  double margin;  // min over facets of c - n.z (Euclidean chart distance)
};
ContainResult contains(const ConvexHull3& hull, const CylPoint& p, double tol = 1e-9);
ContainResult contains(const ConvexHull3& hull, const QuadricPoint& p, double tol = 1e-9);

struct EdgeWidth {
  std::array<int, 2> lower_edge, upper_edge;
  double value;
};

struct WidthReport {
  double width = 0;      // clamped at pi/2
  double raw_width = 0;  // before clamping
  bool planar = false;
  Vec22 lower_point, upper_point;  // argmax pair, input time coordinate
  CylPoint lower_cyl, upper_cyl;
  std::vector<EdgeWidth> table;    // best upper edge for every lower edge
};
WidthReport width(const ConvexHull3& hull);

// boundary of the domain of dependence sampled at disk points
struct Envelopes {
  std::vector<double> lower, upper;
  bool touches = false;  // lightlike segments: envelopes meet the hull
};
Envelopes dod_envelopes(const BoundaryCurve& curve, const std::vector<Eigen::Vector2d>& points);

// min over y on the past hull boundary of max over x on the past envelope in
// the past of y of the timelike distance
double regularity_margin(const ConvexHull3& hull, const Envelopes& env,
                         const std::vector<Eigen::Vector2d>& points);

}  // namespace adsmax::hull
