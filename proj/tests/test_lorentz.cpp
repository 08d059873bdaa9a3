#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "adsmax/constants.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/lorentz.hpp"

using namespace adsmax;
using namespace adsmax::lorentz;

namespace {

Vec22 random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng), n(rng), n(rng)};
}

QuadricPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(-0.8, 0.8), t(-3.0, 3.0);
  Eigen::Vector2d y(r(rng), r(rng));
  if (y.norm() > 0.9) y *= 0.9 / y.norm();
  return chart_to_quadric({y, t(rng)});
}

// random tangent vector at p with prescribed sign of <v,v> (normalized)
Vec22 random_tangent(std::mt19937_64& rng, const QuadricPoint& p, int sign) {
  for (;;) {
    Vec22 v = random_vec(rng);
    v = v + inner(v, p.v()) * p.v();
    const double n = inner(v, v);
    if (sign * n > 0.1) return v / std::sqrt(std::abs(n));
  }
}

double dist(const Vec22& a, const Vec22& b) { return (a - b).euclidean_norm(); }

double angle_diff(double a, double b) {
  double d = std::fmod(a - b, two_pi);
  if (d > pi) d -= two_pi;
  if (d < -pi) d += two_pi;
  return std::abs(d);
}

// same point of RP1
bool same_rp1(const RP1& p, const RP1& q) {
  return std::abs(bracket(p, q)) < 1e-9 * std::hypot(p.a, p.b) * std::hypot(q.a, q.b);
}

}  // namespace

TEST_CASE("inner product signature") {
  CHECK(inner({1, 0, 0, 0}, {1, 0, 0, 0}) == 1.0);
  CHECK(inner({0, 0, 0, 1}, {0, 0, 0, 1}) == -1.0);
  const double t = 0.7;
  const Vec22 v{0, 0, std::cos(t), std::sin(t)};
  CHECK(inner(v, v) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("chart round trip") {
  const QuadricPoint o = chart_to_quadric({Eigen::Vector2d::Zero(), 0.0});
  CHECK(dist(o.v(), {0, 0, 1, 0}) < 1e-15);
  const QuadricPoint o2 = chart_to_quadric({Eigen::Vector2d::Zero(), two_pi});
  CHECK(dist(o2.v(), {0, 0, 1, 0}) < 1e-12);

  const Eigen::Vector3d X = hyperboloid(Eigen::Vector2d(0.3, 0.4));
  CHECK(X[2] * X[2] - X[0] * X[0] - X[1] * X[1] == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    std::uniform_real_distribution<double> r(-0.7, 0.7), t(-3.1, 3.1);
    const CylPoint p{{r(rng), r(rng)}, t(rng)};
    const CylPoint q = quadric_to_chart(chart_to_quadric(p));
    CHECK((p.y - q.y).norm() < 1e-12);
    CHECK(std::abs(p.t - q.t) < 1e-12);
  }
  // winding hint selects the sheet
  const CylPoint far = quadric_to_chart(chart_to_quadric({{0.1, 0.2}, 7.0}), 6.5);
  CHECK(far.t == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("quadric construction rejects non-timelike vectors") {
  CHECK_THROWS_AS(QuadricPoint(Vec22{1, 0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(QuadricPoint(Vec22{1, 0, 1, 0}), ValidationError);
  const QuadricPoint p(Vec22{0, 0, 2, 0});
  CHECK(inner(p.v(), p.v()) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("geodesics") {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const QuadricPoint p = random_point(rng);
    const Vec22 vt = random_tangent(rng, p, -1);
    const Vec22 vs = random_tangent(rng, p, +1);
    CHECK(dist(geodesic_exp(p, vt, pi).v(), -p.v()) < 1e-10);
    CHECK(dist(geodesic_exp(p, vt, two_pi).v(), p.v()) < 1e-10);
    CHECK(dist(geodesic_exp(p, vs, 0.0).v(), p.v()) < 1e-12);
    const Vec22 expect = std::cosh(1.0) * p.v() + std::sinh(1.0) * vs;
    CHECK(dist(geodesic_exp(p, vs, 1.0).v(), expect) < 1e-10);

    // group law with explicit parallel transport
    const double s = 0.4, s2 = 1.1;
    const QuadricPoint q = geodesic_exp(p, vt, s);
    const Vec22 vq = -std::sin(s) * p.v() + std::cos(s) * vt;
    CHECK(dist(geodesic_exp(q, vq, s2).v(), geodesic_exp(p, vt, s + s2).v()) < 1e-10);

    const Separation a = lorentz_separation(p, geodesic_exp(p, vt, half_pi));
    CHECK(a.cls == CausalClass::timelike);
    CHECK(a.value == doctest::Approx(half_pi).epsilon(1e-10));
    const Separation b = lorentz_separation(p, geodesic_exp(p, vs, 2.0));
    CHECK(b.cls == CausalClass::spacelike);
    CHECK(b.value == doctest::Approx(2.0).epsilon(1e-10));
  }
  const QuadricPoint p(Vec22{0, 0, 1, 0});
  CHECK_THROWS_AS(geodesic_exp(p, Vec22{0, 0, 1, 0}, 1.0), ValidationError);
  CHECK_THROWS_AS(lorentz_separation(p, geodesic_exp(p, Vec22{1, 0, 0, 0}, 1.0).antipode()),
                  ValidationError);
  // lightlike direction
  const Separation l = lorentz_separation(p, geodesic_exp(p, Vec22{1, 0, 0, 1}, 0.7));
  CHECK(l.cls == CausalClass::lightlike);
}

TEST_CASE("reverse triangle inequality") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s(0.05, 0.5);
  for (int k = 0; k < 1000; ++k) {
    const QuadricPoint p = random_point(rng);
    // future timelike directions inside a cone around the time direction
    auto future = [&](const QuadricPoint& x) {
      Vec22 t{0, 0, -x.v().x4, x.v().x3};
      t = t + inner(t, x.v()) * x.v();
      t = t / std::sqrt(-inner(t, t));
      Vec22 w = random_tangent(rng, x, +1);
      w = w + inner(w, t) * t;
      const Vec22 v = t + 0.5 * w / std::sqrt(inner(w, w));
      return v / std::sqrt(-inner(v, v));
    };
    const QuadricPoint q = geodesic_exp(p, future(p), s(rng));
    const QuadricPoint r = geodesic_exp(q, future(q), s(rng));
    const Separation pq = lorentz_separation(p, q), qr = lorentz_separation(q, r),
                     pr = lorentz_separation(p, r);
    REQUIRE(pr.cls == CausalClass::timelike);
    CHECK(pr.value >= pq.value + qr.value - 1e-9);
  }
}

TEST_CASE("duality") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 50; ++k) {
    const QuadricPoint p = random_point(rng);
    const SpacelikePlane P = dual_plane(p);
    CHECK(dist(dual_point(P).v(), p.v()) == 0.0);
    std::uniform_real_distribution<double> z(-0.9, 0.9);
    for (int j = 0; j < 20; ++j) {
      Eigen::Vector2d y(z(rng), z(rng));
      if (y.norm() > 0.95) continue;
      const QuadricPoint x = plane_point(P, y);
      CHECK(std::abs(inner(x.v(), p.v())) < 1e-9);
      const Separation s = lorentz_separation(p, x);
      CHECK(s.cls == CausalClass::timelike);
      CHECK(s.value == doctest::Approx(half_pi).epsilon(1e-10));
    }
  }
  const PlaneFrame f = plane_frame(dual_plane(QuadricPoint(Vec22{0, 0, 1, 0})));
  CHECK(std::abs(f.c0.x3) < 1e-15);
}

TEST_CASE("matrix model") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 1000; ++k) {
    const Vec22 a = random_vec(rng), b = random_vec(rng);
    CHECK(to_matrix(a).determinant() == doctest::Approx(-inner(a, a)).epsilon(1e-12));
    CHECK((to_matrix(a + b) - to_matrix(a) - to_matrix(b)).norm() < 1e-14);
    CHECK(dist(from_matrix(to_matrix(a)), a) < 1e-14);
  }
  CHECK((to_matrix({0, 0, 0, 1}) - Mat2::Identity()).norm() == 0.0);
}

TEST_CASE("ruling coordinates of boundary points") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int k = 0; k < 200; ++k) {
    const double th = u(rng), t = u(rng);
    const Ruling r = ruling_coords(boundary_point(th, t));
    CHECK(angle_diff(r.xi.angle(), th - t) < 1e-10);
    CHECK(angle_diff(r.eta.angle(), th + t) < 1e-10);
    const Vec22 back = null_from_ruling(r.xi, r.eta);
    CHECK(std::abs(inner(back, back)) < 1e-12);
    const Ruling r2 = ruling_coords(back);
    CHECK(same_rp1(r.xi, r2.xi));
    CHECK(same_rp1(r.eta, r2.eta));
  }
  CHECK_THROWS_AS(ruling_coords({0, 0, 1, 0}), ValidationError);
}

TEST_CASE("left leaf from a lightlike plane") {
  // the boundary of the lightlike plane n^perp (n null) is a left or right leaf
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int k = 0; k < 20; ++k) {
    const RP1 xi = RP1::from_angle(u(rng));
    const RP1 eta0 = RP1::from_angle(u(rng));
    const Vec22 n = null_from_ruling(xi, eta0);
    // points of the leaf {xi} all lie in n^perp
    for (int j = 0; j < 5; ++j) {
      const Vec22 w = null_from_ruling(xi, RP1::from_angle(u(rng)));
      CHECK(std::abs(inner(w, n)) < 1e-12);
      CHECK(same_rp1(ruling_coords(w).xi, xi));
    }
  }
}

TEST_CASE("isometries") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random_mobius = [&]() {
    for (;;) {
      Mat2 m;
      m << n(rng), n(rng), n(rng), n(rng);
      if (m.determinant() > 0.2) return MobiusMap(m);
    }
  };
  for (int k = 0; k < 100; ++k) {
    const Isometry3 g{random_mobius(), random_mobius()};
    const Vec22 a = random_vec(rng), b = random_vec(rng);
    CHECK(inner(apply_isometry(g, a), apply_isometry(g, b)) ==
          doctest::Approx(inner(a, b)).epsilon(1e-10));
    const QuadricPoint p = random_point(rng);
    CHECK(dist(apply_isometry(Isometry3::identity(), p).v(), p.v()) < 1e-12);

    const double th = n(rng), t = n(rng);
    const Vec22 v = boundary_point(th, t);
    const Ruling r = ruling_coords(v);
    const Ruling gr = ruling_coords(apply_isometry(g, v));
    CHECK(same_rp1(gr.xi, g.left.apply(r.xi)));
    CHECK(same_rp1(gr.eta, g.right.apply(r.eta)));

    const MobiusMap rot = MobiusMap::rotation(n(rng));
    const Vec22 o = apply_isometry(Isometry3{rot, rot}, Vec22{0, 0, 1, 0});
    CHECK(dist(o, {0, 0, 1, 0}) < 1e-14);
  }
  CHECK_THROWS_AS(MobiusMap((Mat2() << 1, 0, 0, -1).finished()), ValidationError);
}

TEST_CASE("time translation and disk rotation") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0), r(-0.6, 0.6);
  for (int k = 0; k < 50; ++k) {
    const CylPoint p{{r(rng), r(rng)}, u(rng)};
    const double c = u(rng), psi = 3 * u(rng);
    const CylPoint q = quadric_to_chart(apply_isometry(time_translation(c), chart_to_quadric(p)));
    CHECK((q.y - p.y).norm() < 1e-12);
    CHECK(q.t == doctest::Approx(p.t + c).epsilon(1e-12));
    const CylPoint w = quadric_to_chart(apply_isometry(disk_rotation(psi), chart_to_quadric(p)));
    const Eigen::Vector2d ry = Eigen::Rotation2Dd(psi) * p.y;
    CHECK((w.y - ry).norm() < 1e-12);
    CHECK(w.t == doctest::Approx(p.t).epsilon(1e-12));
  }
}

TEST_CASE("projective chart") {
  const Eigen::Vector3d z0 = projective_chart(CylPoint{});
  CHECK(z0.norm() == 0.0);
  CHECK_THROWS_AS(projective_chart(CylPoint{{0, 0}, half_pi}), ValidationError);

  std::mt19937_64 rng(10);
  int tested = 0;
  while (tested < 200) {
    const QuadricPoint p = random_point(rng);
    const CylPoint c = quadric_to_chart(p);
    if (std::abs(c.t) > 1.2) continue;
    const Vec22 v = random_tangent(rng, p, +1);
    const QuadricPoint q1 = geodesic_exp(p, v, 0.3), q2 = geodesic_exp(p, v, 0.8);
    if (q1.v().x3 * p.v().x3 <= 0 || q2.v().x3 * p.v().x3 <= 0) continue;
    const Eigen::Vector3d a = projective_chart(p.v()), b = projective_chart(q1.v()),
                          d = projective_chart(q2.v());
    const double res = (b - a).cross(d - a).norm() / ((b - a).norm() * (d - a).norm());
    CHECK(res < 1e-10);
    const Eigen::Vector3d z = projective_chart(c);
    CHECK((z - a).norm() < 1e-10 * (1 + a.norm()));
    CHECK(z[0] * z[0] + z[1] * z[1] <= z[2] * z[2] + 1.0);
    const Vec22 l = projective_lift(z).v();
    CHECK(dist(l, p.v().x3 > 0 ? p.v() : -p.v()) < 1e-9);
    ++tested;
  }
}

TEST_CASE("plane normalization") {
  const SpacelikePlane P0 = reference_plane();
  CHECK((plane_mobius(P0).matrix() - Mat2::Identity()).norm() < 1e-15);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-pi, pi), z(-0.7, 0.7);
  for (int k = 0; k < 30; ++k) {
    const SpacelikePlane P = dual_plane(random_point(rng));
    const MobiusMap m = plane_mobius(P);
    const auto [phil, phir] = leftright_to_P0(P);
    for (int j = 0; j < 20; ++j) {
      const QuadricPoint x = plane_point(P, {z(rng), z(rng)});
      CHECK(std::abs(inner(apply_isometry(phil, x).v(), dual_point(P0).v())) < 1e-9);
      CHECK(std::abs(inner(apply_isometry(phir, x).v(), dual_point(P0).v())) < 1e-9);
    }
    // boundary circle of P is the graph of m, and Phi_l keeps xi
    const PlaneFrame f = plane_frame(P);
    for (int j = 0; j < 10; ++j) {
      const double a = u(rng);
      const Vec22 w = f.c0 + std::cos(a) * f.e1 + std::sin(a) * f.e2;
      CHECK(std::abs(inner(w, w)) < 1e-12);
      const Ruling r = ruling_coords(w);
      CHECK(same_rp1(m.apply(r.xi), r.eta));
      const Ruling rl = ruling_coords(apply_isometry(phil, w));
      CHECK(same_rp1(rl.xi, r.xi));
      const Ruling rr = ruling_coords(apply_isometry(phir, w));
      CHECK(same_rp1(rr.eta, r.eta));
    }
  }
}
