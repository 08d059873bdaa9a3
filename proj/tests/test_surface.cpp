#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "adsmax/constants.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/hull.hpp"
#include "adsmax/surface.hpp"

using namespace adsmax;
using namespace adsmax::surface;
using lorentz::Vec22;

namespace {

double max_abs(const Eigen::VectorXd& f, const std::vector<bool>& mask) {
  double m = 0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (mask[i] && std::isfinite(f[i])) m = std::max(m, std::abs(f[i]));
  return m;
}

double median_abs(const Eigen::VectorXd& f, const std::vector<bool>& mask) {
  std::vector<double> a;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (mask[i] && std::isfinite(f[i])) a.push_back(std::abs(f[i]));
  REQUIRE(!a.empty());
  std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
  return a[a.size() / 2];
}

Eigen::VectorXd det_b_plus_one(const ShapeData& sd) {
  Eigen::VectorXd d(sd.B.size());
  for (std::size_t i = 0; i < sd.B.size(); ++i) d[i] = sd.B[i].determinant() + 1.0;
  return d;
}

lorentz::SpacelikePlane tilted_plane() {
  lorentz::Mat2 M;
  M << 1.2, 0.3, -0.1, 0.9;
  return {lorentz::QuadricPoint(lorentz::from_matrix(M))};
}

}  // namespace

TEST_CASE("disk mesh") {
  const auto m = make_mesh(2.0, 16, 48);
  CHECK(m->size() == 769);
  CHECK(m->vertices[0].norm() == 0.0);
  CHECK(min_angle_deg(*m) > 20.0);
  int nb = 0;
  for (std::size_t v = 0; v < m->size(); ++v) {
    if (!m->boundary(static_cast<int>(v))) continue;
    ++nb;
    CHECK(std::abs(lorentz::hyperbolic_radius(m->vertices[v]) - 2.0) < 1e-12);
  }
  CHECK(nb > 48);
  // Euler characteristic of a disk
  std::set<std::pair<int, int>> edges;
  for (const auto& t : m->triangles)
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
  CHECK(static_cast<long>(m->size()) - static_cast<long>(edges.size()) + static_cast<long>(m->triangles.size()) == 1);

  for (auto [r, a, b] : {std::tuple{3.0, 50, 200}, std::tuple{1.0, 6, 12}, std::tuple{2.0, 32, 96}}) {
    const auto mm = make_mesh(r, a, b);
    CHECK(mm->size() == static_cast<std::size_t>(1 + a * b));
    CHECK(min_angle_deg(*mm) > 20.0);
  }
  CHECK_THROWS_AS(make_mesh(0.0, 16, 48), ValidationError);
  CHECK_THROWS_AS(make_mesh(2.0, 1, 48), ValidationError);

  // masks shrink with depth
  const auto m1 = m->interior_mask(1), m3 = m->interior_mask(3);
  for (std::size_t v = 0; v < m->size(); ++v) {
    if (m3[v]) CHECK(m1[v]);
    if (m->boundary(static_cast<int>(v))) CHECK_FALSE(m1[v]);
  }

  // P1 interpolation reproduces affine fields; fits reproduce quadratics
  Eigen::VectorXd f(m->size()), q(m->size());
  for (std::size_t v = 0; v < m->size(); ++v) {
    const auto& y = m->vertices[v];
    f[v] = 0.3 + 2.0 * y.x() - y.y();
    q[v] = y.x() * y.x() - 3.0 * y.x() * y.y();
  }
  for (const Eigen::Vector2d y : {Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(-0.5, 0.3), Eigen::Vector2d(0.0, -0.7)}) {
    CHECK(locate(*m, y).tri >= 0);
    CHECK(interpolate(*m, f, y) == doctest::Approx(0.3 + 2.0 * y.x() - y.y()).epsilon(1e-12));
  }
  CHECK(locate(*m, Eigen::Vector2d(0.9, 0.0)).tri == -1);
  for (int v : {0, 17, 200}) {
    const auto& y = m->vertices[v];
    const Eigen::Vector2d g = m->gradient(q, v);
    CHECK(g.x() == doctest::Approx(2.0 * y.x() - 3.0 * y.y()).epsilon(1e-9));
    CHECK(g.y() == doctest::Approx(-3.0 * y.x()).epsilon(1e-9));
  }
}

TEST_CASE("horizontal slice") {
  const auto m = make_mesh(2.0, 16, 48);
  const SpacelikeGraph S(m, Eigen::VectorXd::Zero(m->size()));
  CHECK(S.margin() == doctest::Approx(1.0));
  const Eigen::VectorXd v = gradient_function(S);
  CHECK((v.array() == 1.0).all());
  CHECK(mean_curvature(S).lpNorm<Eigen::Infinity>() == 0.0);
  const ShapeData sd = shape_data(S);
  for (std::size_t i = 0; i < m->size(); ++i) {
    CHECK(lorentz::inner(sd.nu[i], sd.nu[i]) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sd.B[i].norm() < 1e-12);
    CHECK(sd.K[i] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sd.v[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
  // all vertices are flat, so chi is masked everywhere
  const ChiResidual chi = chi_residual(S, sd);
  CHECK(std::none_of(chi.valid.begin(), chi.valid.end(), [](bool b) { return b; }));

  // the slice is a hyperbolic plane: Laplacian of cosh(rho) is 2 cosh(rho)
  const auto mk = m->interior_mask(2);
  Eigen::VectorXd f(m->size());
  for (std::size_t i = 0; i < m->size(); ++i) f[i] = lorentz::hyperboloid(m->vertices[i])[2];
  const Eigen::VectorXd L = laplace_beltrami(S, f);
  for (std::size_t i = 0; i < m->size(); ++i)
    if (mk[i]) CHECK(std::abs(L[i] - 2.0 * f[i]) < 0.05 * f[i]);
  CHECK(laplace_beltrami(S, Eigen::VectorXd::Constant(m->size(), 3.0)).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("spacelike certificate") {
  const auto m = make_mesh(2.0, 8, 24);
  Eigen::VectorXd u(m->size());
  for (std::size_t i = 0; i < m->size(); ++i) u[i] = 3.0 * m->vertices[i].x();
  CHECK_THROWS_AS(SpacelikeGraph(m, u), ValidationError);
  CHECK_THROWS_AS(SpacelikeGraph(m, Eigen::VectorXd::Zero(5)), ValidationError);
  CHECK(std::isinf(assemble(*m, u, false).energy));
  for (std::size_t i = 0; i < m->size(); ++i) u[i] = 0.2 * m->vertices[i].x();
  const SpacelikeGraph S(m, u);
  const auto mg = triangle_margins(*m, u);
  CHECK(S.margin() == doctest::Approx(*std::min_element(mg.begin(), mg.end())));
  CHECK(S.margin() > 0.0);
}

TEST_CASE("area functional derivatives") {
  const auto m = make_mesh(1.5, 6, 18);
  Eigen::VectorXd u(m->size());
  for (std::size_t i = 0; i < m->size(); ++i)
    u[i] = 0.1 * std::sin(3.0 * m->vertices[i].x()) + 0.05 * m->vertices[i].y();
  const Assembly A = assemble(*m, u, true);
  Eigen::VectorXd d(m->size());
  for (std::size_t i = 0; i < m->size(); ++i) d[i] = std::cos(1.0 + 7.0 * i);
  const double h = 1e-5;
  const Assembly P = assemble(*m, u + h * d, true), N = assemble(*m, u - h * d, true);
  CHECK((P.energy - N.energy) / (2 * h) == doctest::Approx(A.gradient.dot(d)).epsilon(1e-6));
  const Eigen::VectorXd fd = (P.gradient - N.gradient) / (2 * h);
  CHECK((fd - A.hessian * d).norm() < 1e-6 * (1.0 + fd.norm()));
  // convex: the Hessian is positive semidefinite
  CHECK(d.dot(A.hessian * d) > 0.0);
}

TEST_CASE("tilted plane") {
  const lorentz::SpacelikePlane P = tilted_plane();
  const Vec22 q = P.dual.v();
  double prev = 1.0;
  for (int k : {16, 32}) {
    const auto m = make_mesh(2.0, k, 3 * k);
    const SpacelikeGraph S = plane_surface(m, P);
    const auto mk = m->interior_mask(2);
    // every vertex lies on the plane
    for (std::size_t i = 0; i < m->size(); ++i)
      CHECK(std::abs(lorentz::inner(S.point(static_cast<int>(i)).v(), q)) < 1e-12);
    // gradient function against the plane normal
    const ShapeData sd = shape_data(S);
    const Eigen::VectorXd v = gradient_function(S);
    for (std::size_t i = 0; i < m->size(); ++i) {
      if (!mk[i]) continue;
      const auto c = lorentz::quadric_to_chart(S.point(static_cast<int>(i)));
      const Vec22 T{0.0, 0.0, -std::sin(c.t), std::cos(c.t)};
      const double v_exact = std::abs(lorentz::inner(q, T)) / std::sqrt(-lorentz::inner(q, q));
      CHECK(v[i] == doctest::Approx(v_exact).epsilon(1e-3));
      CHECK(sd.v[i] == doctest::Approx(v_exact).epsilon(1e-3));
      CHECK(std::abs(lorentz::inner(sd.nu[i], q)) ==
            doctest::Approx(std::sqrt(-lorentz::inner(q, q))).epsilon(1e-6));
    }
    const double H = max_abs(mean_curvature(S), mk);
    CHECK(H < 1e-3);
    CHECK(H < prev / 3.0);  // second order
    prev = H;
    CHECK(max_abs(sd.H, mk) < 5e-3);
    CHECK(max_abs(sd.K.array() + 1.0, mk) < 1e-5);
  }
}

TEST_CASE("horosphere fixture") {
  double H0 = 1e9, T0 = 1e9, D0 = 1e9, C0 = 1e9;
  for (int k : {16, 32, 64}) {
    const auto m = make_mesh(2.0, k, 3 * k);
    const SpacelikeGraph S = horosphere_surface(m);
    const auto mk = m->interior_mask(2);
    const ShapeData sd = shape_data(S);
    const double H = max_abs(mean_curvature(S), mk);
    const double T = max_abs(sd.H, mk);
    const double D = max_abs(det_b_plus_one(sd), mk);
    const ChiResidual chi = chi_residual(S, sd);
    auto cmask = mk;
    for (std::size_t i = 0; i < cmask.size(); ++i) cmask[i] = cmask[i] && chi.valid[i];
    const double C = median_abs(chi.residual, cmask);
    CHECK(H < H0);
    CHECK(T < T0);
    CHECK(D < D0);
    CHECK(C < C0);
    H0 = H, T0 = T, D0 = D, C0 = C;
    // flat, with principal curvatures +-1
    Eigen::VectorXd kd(m->size());
    for (std::size_t i = 0; i < m->size(); ++i) kd[i] = sd.k1[i] - 1.0;
    CHECK(median_abs(kd, mk) < 0.01);
    CHECK(median_abs(sd.K_intrinsic, mk) < 0.01);
    CHECK(median_abs(sd.K, mk) < 0.05);
  }
  CHECK(H0 < 0.02);
  CHECK(D0 < 0.02);

  // rotation and time shift act on the closed form
  const auto m = make_mesh(2.0, 16, 48);
  const SpacelikeGraph A = horosphere_surface(m, 0.0, 0.1);
  const SpacelikeGraph B = horosphere_surface(m, 0.0, -0.2);
  CHECK((A.u() - B.u()).array().abs().maxCoeff() == doctest::Approx(0.3));
  CHECK(horosphere_boundary_tau(0.3, 0.3) == doctest::Approx(-quarter_pi));
  CHECK(horosphere_boundary_tau(0.3 + quarter_pi, 0.3) == doctest::Approx(0.0).epsilon(1e-12));

  // boundary at infinity: four lightlike segments, hull of width pi/2
  std::vector<double> th, ta;
  for (int i = 0; i < 512; ++i) {
    th.push_back(two_pi * i / 512);
    ta.push_back(horosphere_boundary_tau(th.back(), 0.2));
  }
  const hull::WidthReport w = hull::width(hull::convex_hull(boundary::BoundaryCurve(th, ta)));
  CHECK(std::abs(w.width - half_pi) < 0.02);
}

TEST_CASE("Gauss relation and curvature pipelines") {
  const auto m = make_mesh(2.0, 32, 96);
  const auto mk = m->interior_mask(3);
  const SpacelikeGraph P = plane_surface(m, tilted_plane());
  for (double r : {0.3, -0.2}) {
    const Equidistant E = equidistant(P, r);
    const ShapeData sd = shape_data(E.graph);
    const Eigen::VectorXd Hn = mean_curvature(E.graph);
    auto cmask = mk;
    for (std::size_t i = 0; i < cmask.size(); ++i) cmask[i] = cmask[i] && E.covered[i];
    const double kp = equidistant_curvature(0.0, r);
    Eigen::VectorXd e1(m->size()), e2(m->size()), ht(m->size()), gauss(m->size());
    for (std::size_t i = 0; i < m->size(); ++i) {
      e1[i] = sd.k1[i] - kp;
      e2[i] = sd.k2[i] - kp;
      ht[i] = Hn[i] - sd.H[i];
      gauss[i] = sd.K_intrinsic[i] - sd.K[i];
    }
    CHECK(median_abs(e1, cmask) < 0.01);
    CHECK(median_abs(e2, cmask) < 0.01);
    // trace of the shape operator against the nodal mean curvature
    CHECK(median_abs(ht, cmask) < 0.01);
    CHECK(median_abs(gauss, cmask) < 0.01);
  }
  // zero distance is the identity
  const Equidistant E0 = equidistant(P, 0.0);
  CHECK((E0.graph.u() - P.u()).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK_THROWS_AS(equidistant(P, 1.0), ValidationError);
  CHECK(equidistant_curvature(1.0, quarter_pi) == doctest::Approx(0.0));
}

TEST_CASE("export") {
  const auto m = make_mesh(1.0, 4, 12);
  const SpacelikeGraph S = horosphere_surface(m);
  const ShapeData sd = shape_data(S);
  std::ostringstream csv, obj;
  write_csv(csv, S, sd);
  write_obj(obj, S);
  const std::string c = csv.str(), o = obj.str();
  CHECK(c.rfind("y1,y2,t,u,v,H,K,k1,k2\n", 0) == 0);
  CHECK(std::count(c.begin(), c.end(), '\n') == static_cast<long>(m->size() + 1));
  long nv = 0, nf = 0;
  std::istringstream is(o);
  for (std::string line; std::getline(is, line);) {
    if (line.rfind("v ", 0) == 0) ++nv;
    if (line.rfind("f ", 0) == 0) ++nf;
  }
  CHECK(nv == static_cast<long>(m->size()));
  CHECK(nf == static_cast<long>(m->triangles.size()));
}
