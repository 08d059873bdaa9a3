#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "adsmax/constants.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/hull.hpp"

using namespace adsmax;
using namespace adsmax::hull;
using boundary::CircleHomeo;
using boundary::lift_graph;
using lorentz::Isometry3;
using lorentz::Mat2;
using lorentz::MobiusMap;

namespace {

MobiusMap random_mobius(std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> n(0.0, spread);
  for (;;) {
    Mat2 m = Mat2::Identity();
    m(0, 0) += n(rng);
    m(0, 1) += n(rng);
    m(1, 0) += n(rng);
    m(1, 1) += n(rng);
    if (m.determinant() > 0.2) return MobiusMap(m);
  }
}

// polar grid of disk points up to radius r_max
std::vector<Eigen::Vector2d> disk_grid(int rings, int per_ring, double r_max) {
  std::vector<Eigen::Vector2d> pts{Eigen::Vector2d::Zero()};
  for (int i = 1; i <= rings; ++i) {
    const double r = r_max * i / rings;
    for (int j = 0; j < per_ring; ++j) {
      const double a = two_pi * (j + 0.5 * (i % 2)) / per_ring;
      pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
  }
  return pts;
}

double hull_width(const boundary::BoundaryCurve& c) { return width(convex_hull(c)).width; }

}  // namespace

TEST_CASE("planar hulls") {
  const ConvexHull3 h = convex_hull(lift_graph(boundary::identity_homeo(), 128));
  CHECK(h.planar());
  CHECK(width(h).width == 0.0);
  const Heights z = h.heights(Eigen::Vector2d(0.3, -0.2));
  CHECK(std::abs(z.lower) < 1e-12);
  CHECK(std::abs(z.upper) < 1e-12);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 4; ++t) {
    const MobiusMap m = random_mobius(rng, 0.5);
    const ConvexHull3 hm = convex_hull(lift_graph(boundary::mobius_boundary(m), 256));
    CHECK(hm.planar());
    CHECK(width(hm).width == 0.0);
    // the height sheet lies on the plane with plane map m
    const lorentz::Vec22 q = lorentz::from_matrix(m.inverse().matrix());
    for (const auto& y : disk_grid(3, 8, 0.8)) {
      const Heights hy = hm.heights(y);
      const lorentz::Vec22 x = lorentz::chart_to_quadric({y, hy.lower}).v();
      CHECK(std::abs(lorentz::inner(x, q)) < 1e-9 * q.euclidean_norm());
    }
  }
}

TEST_CASE("two-step hull has width pi/2") {
  const ConvexHull3 h = convex_hull(boundary::two_step_curve(32));
  CHECK_FALSE(h.planar());
  const WidthReport w = width(h);
  CHECK(std::abs(w.raw_width - half_pi) < 1e-9);
  for (const Facet& f : h.facets()) CHECK(f.lightlike);
}

TEST_CASE("width along the step family") {
  double prev = 0.0;
  for (double kappa : {0.0, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    const WidthReport w = width(convex_hull(lift_graph(boundary::step_family(kappa), 512)));
    CHECK(w.width >= prev - 1e-9);
    CHECK(w.raw_width <= half_pi + 1e-3);
    prev = w.width;
  }
  CHECK(prev >= half_pi - 0.05);
}

TEST_CASE("width bounded for random quasi-symmetric data") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 6; ++t) {
    const CircleHomeo f = boundary::compose(random_mobius(rng, 0.4),
                                            boundary::bump_family(0.3 + 0.1 * t),
                                            random_mobius(rng, 0.4));
    const WidthReport w = width(convex_hull(lift_graph(f, 256)));
    CHECK(w.raw_width <= half_pi + 1e-3);
    CHECK(w.width > 0.0);
    // the argmax pair realizes the width
    const double c = -lorentz::inner(w.lower_point, w.upper_point);
    CHECK(std::acos(std::clamp(c, -1.0, 1.0)) == doctest::Approx(w.raw_width).epsilon(1e-8));
    CHECK(w.upper_cyl.t >= w.lower_cyl.t);
  }
}

TEST_CASE("hull convexity audit") {
  const boundary::BoundaryCurve c = lift_graph(boundary::bump_family(0.6), 256).time_shifted(0.4);
  const ConvexHull3 h = convex_hull(c);
  CHECK(h.count(FacetLabel::past) > 0);
  CHECK(h.count(FacetLabel::future) > 0);
  const double eps = 1e-9 * std::max(1.0, h.scale());
  for (const Facet& f : h.facets()) {
    CHECK(std::abs(f.n.norm() - 1.0) < 1e-12);
    for (int k : f.v) CHECK(std::abs(f.n.dot(h.points()[k]) - f.c) < eps);
    for (const auto& p : h.points()) CHECK(f.n.dot(p) <= f.c + eps);
    if (f.label != FacetLabel::vertical) CHECK(lorentz::inner(f.dual, f.dual) < 0.0);
  }
  // Euler characteristic of a closed triangulated sphere
  CHECK(h.facets().size() == 2 * h.points().size() - 4);

  for (const auto& y : disk_grid(6, 24, 0.97)) {
    const Heights z = h.heights(y);
    CHECK(z.lower <= z.upper + 1e-10);
    // heights reported in the input time coordinate
    CHECK(z.lower > c.tau_min() - half_pi);
    CHECK(z.upper < c.tau_max() + half_pi);
  }

  std::ostringstream os;
  h.write_csv(os);
  CHECK(os.str().rfind("facet,v0,v1,v2", 0) == 0);
}

TEST_CASE("containment") {
  const boundary::BoundaryCurve c = lift_graph(boundary::bump_family(0.5), 256).time_shifted(-0.3);
  const ConvexHull3 h = convex_hull(c);
  for (const auto& y : disk_grid(4, 12, 0.9)) {
    const Heights z = h.heights(y);
    const ContainResult on = contains(h, lorentz::CylPoint{y, z.lower});
    CHECK(on.inside);
    CHECK(std::abs(on.margin) < 1e-9);
    const ContainResult mid = contains(h, lorentz::CylPoint{y, 0.5 * (z.lower + z.upper)});
    CHECK(mid.inside);
    CHECK(mid.margin >= 0.0);
    const double t_far = -h.time_offset() + half_pi - 1e-3;
    if (t_far > z.upper + 1e-2) CHECK_FALSE(contains(h, lorentz::CylPoint{y, t_far}).inside);
    // quadric overload agrees
    const auto q = lorentz::chart_to_quadric({y, 0.5 * (z.lower + z.upper)});
    CHECK(contains(h, q).margin == doctest::Approx(mid.margin).epsilon(1e-9));
  }
  CHECK_THROWS_AS(contains(h, lorentz::CylPoint{Eigen::Vector2d::Zero(), -h.time_offset() + 2.0}),
                  ValidationError);
  CHECK_THROWS_AS(convex_hull(boundary::BoundaryCurve({0.0, 2.0, 4.0}, {0.0, 0.0, 0.0})),
                  ValidationError);
}

TEST_CASE("domain of dependence envelopes") {
  const auto pts = disk_grid(6, 24, 0.95);
  const boundary::BoundaryCurve flat = lift_graph(boundary::identity_homeo(), 512);
  const Envelopes e0 = dod_envelopes(flat, pts);
  CHECK(e0.upper[0] == doctest::Approx(half_pi).epsilon(1e-12));
  CHECK(e0.lower[0] == doctest::Approx(-half_pi).epsilon(1e-12));
  CHECK(e0.upper[0] - e0.lower[0] == doctest::Approx(pi));
  CHECK_FALSE(e0.touches);

  for (double a : {0.3, 0.7}) {
    const boundary::BoundaryCurve c = lift_graph(boundary::bump_family(a), 512);
    const ConvexHull3 h = convex_hull(c);
    const Envelopes e = dod_envelopes(c, pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Heights z = h.heights(pts[i]);
      CHECK(e.lower[i] <= z.lower + 1e-9);
      CHECK(z.lower <= z.upper + 1e-9);
      CHECK(z.upper <= e.upper[i] + 1e-9);
    }
  }
  CHECK(dod_envelopes(boundary::two_step_curve(8), pts).touches);
}

TEST_CASE("width isometry invariance") {
  std::mt19937_64 rng(13);
  const boundary::BoundaryCurve c = lift_graph(boundary::bump_family(0.6), 512);
  const double w0 = hull_width(c);
  for (int t = 0; t < 4; ++t) {
    const Isometry3 g{random_mobius(rng, 0.3), random_mobius(rng, 0.3)};
    const double w1 = hull_width(boundary::apply_isometry(g, c));
    CHECK(std::abs(w1 - w0) < 2e-3);
  }
  // time translations and rotations act exactly
  const double w2 = hull_width(boundary::apply_isometry(lorentz::time_translation(2.5), c));
  CHECK(std::abs(w2 - w0) < 1e-9);
  const double w3 = hull_width(boundary::apply_isometry(lorentz::disk_rotation(1.1), c));
  CHECK(std::abs(w3 - w0) < 2e-3);
}

TEST_CASE("width under refinement") {
  for (const CircleHomeo& f : {boundary::bump_family(0.5), boundary::step_family(0.5)}) {
    const double a = hull_width(lift_graph(f, 512));
    const double b = hull_width(lift_graph(f, 1024));
    CHECK(std::abs(b - a) < 1e-3);
  }
}

TEST_CASE("regularity margin") {
  const auto pts = disk_grid(8, 32, 0.95);
  auto margin_on = [](const CircleHomeo& f, const std::vector<Eigen::Vector2d>& p) {
    const boundary::BoundaryCurve c = lift_graph(f, 512);
    const ConvexHull3 h = convex_hull(c);
    return regularity_margin(h, dod_envelopes(c, p), p);
  };
  auto margin = [&](const CircleHomeo& f) { return margin_on(f, pts); };
  CHECK(margin(boundary::identity_homeo()) == doctest::Approx(half_pi).epsilon(1e-9));
  // for a plane the maximum sits over the dual points, added to the samples
  std::mt19937_64 rng(14);
  const MobiusMap m = random_mobius(rng, 0.3);
  const lorentz::QuadricPoint q(lorentz::from_matrix(m.inverse().matrix()));
  const Eigen::Vector2d yq = lorentz::quadric_to_chart(q).y;
  auto with_dual = pts;
  with_dual.push_back(yq);
  with_dual.push_back(-yq);
  CHECK(margin_on(boundary::mobius_boundary(m), with_dual) == doctest::Approx(half_pi).epsilon(1e-6));
  double prev = half_pi + 1e-9;
  for (double kappa : {0.25, 0.5, 0.75, 0.9, 0.99}) {
    const double m = margin(boundary::step_family(kappa));
    CHECK(m > 0.0);
    CHECK(m <= prev + 1e-6);
    prev = m;
  }
  CHECK(prev < 0.1);
}
