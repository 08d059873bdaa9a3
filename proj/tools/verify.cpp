#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "commands.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/hull.hpp"
#include "adsmax/lagrangian.hpp"
#include "adsmax/solver.hpp"
#include "adsmax/surface.hpp"

namespace adsmax::cli {

namespace {

using lorentz::QuadricPoint;
using lorentz::Vec22;

QuadricPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(-0.8, 0.8), t(-3.0, 3.0);
  Eigen::Vector2d y(r(rng), r(rng));
  if (y.norm() > 0.9) y *= 0.9 / y.norm();
  return lorentz::chart_to_quadric({y, t(rng)});
}

Vec22 random_tangent(std::mt19937_64& rng, const QuadricPoint& p, int sign) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec22 v{n(rng), n(rng), n(rng), n(rng)};
    v = v + lorentz::inner(v, p.v()) * p.v();
    const double q = lorentz::inner(v, v);
    if (sign * q > 0.1) return v / std::sqrt(std::abs(q));
  }
}

// future timelike unit vector inside a cone around the time direction
Vec22 future_tangent(std::mt19937_64& rng, const QuadricPoint& x) {
  Vec22 t{0, 0, -x.v().x4, x.v().x3};
  t = t + lorentz::inner(t, x.v()) * x.v();
  t = t / std::sqrt(-lorentz::inner(t, t));
  Vec22 w = random_tangent(rng, x, +1);
  w = w + lorentz::inner(w, t) * t;
  const Vec22 v = t + 0.5 * w / std::sqrt(lorentz::inner(w, w));
  return v / std::sqrt(-lorentz::inner(v, v));
}

double dist(const Vec22& a, const Vec22& b) { return (a - b).euclidean_norm(); }

struct Suite {
  Report& R;
  void add(const std::string& module, Audit a) {
    a.name = module + "." + a.name;
    R.audits.push_back(std::move(a));
  }
  // a check that must throw ValidationError
  template <class F>
  void rejects(const std::string& module, const std::string& name, F f) {
    bool thrown = false;
    try {
      f();
    } catch (const ValidationError&) {
      thrown = true;
    }
    add(module, audit_bool(name, thrown));
  }
};

void lorentz_checks(Suite& s, const RunConfig& c, const lorentz::GeodesicFn& geo) {
  std::mt19937_64 rng(c.seed);
  double antipode = 0, period = 0, spacelike = 0, duality = 0, det = 0, reverse = -1e300;
  for (int k = 0; k < c.verify.samples; ++k) {
    const QuadricPoint p = random_point(rng);
    const Vec22 vt = random_tangent(rng, p, -1), vs = random_tangent(rng, p, +1);
    antipode = std::max(antipode, dist(geo(p, vt, pi).v(), -p.v()));
    period = std::max(period, dist(geo(p, vt, two_pi).v(), p.v()));
    spacelike = std::max(spacelike, dist(geo(p, vs, 1.0).v(), std::cosh(1.0) * p.v() + std::sinh(1.0) * vs));

    std::uniform_real_distribution<double> z(-0.6, 0.6);
    const QuadricPoint x = lorentz::plane_point(lorentz::dual_plane(p), {z(rng), z(rng)});
    const lorentz::Separation sep = lorentz::lorentz_separation(p, x);
    duality = std::max(duality, sep.cls == lorentz::CausalClass::timelike ? std::abs(sep.value - half_pi) : 1.0);

    std::normal_distribution<double> n(0.0, 1.0);
    const Vec22 a{n(rng), n(rng), n(rng), n(rng)};
    det = std::max(det, std::abs(lorentz::to_matrix(a).determinant() + lorentz::inner(a, a)) /
                            std::max(1.0, std::abs(lorentz::inner(a, a))));

    std::uniform_real_distribution<double> len(0.05, 0.5);
    const QuadricPoint q = geo(p, future_tangent(rng, p), len(rng));
    const QuadricPoint r = geo(q, future_tangent(rng, q), len(rng));
    const lorentz::Separation pq = lorentz::lorentz_separation(p, q), qr = lorentz::lorentz_separation(q, r),
                              pr = lorentz::lorentz_separation(p, r);
    reverse = std::max(reverse, pr.cls == lorentz::CausalClass::timelike ? pq.value + qr.value - pr.value : 1.0);
  }
  s.add("lorentz", audit("geodesic_antipode", antipode, "<", 1e-9));
  s.add("lorentz", audit("geodesic_period", period, "<", 1e-9));
  s.add("lorentz", audit("geodesic_spacelike", spacelike, "<", 1e-9));
  s.add("lorentz", audit("duality_distance", duality, "<", 1e-9));
  s.add("lorentz", audit("det_to_matrix", det, "<", 1e-9));
  s.add("lorentz", audit("reverse_triangle", reverse, "<", 1e-9));
}

void boundary_checks(Suite& s, const RunConfig& c) {
  using lorentz::RP1;
  s.add("boundary", audit("cross_ratio_harmonic",
                          boundary::cross_ratio(RP1::affine(-3), RP1::affine(-1), RP1::affine(1), RP1::infinity()),
                          "==", 2.0));
  s.add("boundary", audit("cross_ratio_degenerate",
                          boundary::cross_ratio(RP1::affine(0), RP1::affine(0), RP1::affine(1), RP1::affine(1)),
                          "==", 1.0));
  s.rejects("boundary", "non_monotone_rejected",
            [] { boundary::lift_graph_samples({0.0, 1.0, 2.0, 3.0}, {0.0, 1.5, 1.2, 3.0}); });
  const boundary::QsSampler q = make_sampler(QsSpec{16, 16, 8}, c.seed);
  s.add("boundary", audit("identity_modulus", std::abs(boundary::qs_modulus(boundary::identity_homeo(), q) - 1),
                          "<", 1e-8));
  lorentz::Mat2 m;
  m << 1.3, 0.4, -0.2, 0.8;
  s.add("boundary", audit("mobius_modulus",
                          std::abs(boundary::qs_modulus(boundary::mobius_boundary(lorentz::MobiusMap(m)), q) - 1),
                          "<", 1e-8));
}

void hull_checks(Suite& s, const RunConfig& c) {
  auto w = [](const boundary::BoundaryCurve& curve) { return hull::width(hull::convex_hull(curve)); };
  s.add("hull", audit("identity_width", w(boundary::lift_graph(boundary::identity_homeo(), 128)).width, "==", 0));
  s.add("hull", audit("two_step_width", std::abs(w(boundary::two_step_curve(32)).raw_width - half_pi), "<", 1e-9));
  BoundarySpec horo;
  horo.family = "horosphere";
  horo.samples = 512;
  s.add("hull", audit("horosphere_width", std::abs(w(make_curve(horo, c.seed)).width - half_pi), "<", 0.02));
  double prev = 0, worst = -1e300, top = 0;
  for (double kappa : {0.0, 0.25, 0.5, 0.75}) {
    const double x = w(boundary::lift_graph(boundary::step_family(kappa), 256)).raw_width;
    worst = std::max(worst, prev - x);
    top = std::max(top, x);
    prev = x;
  }
  s.add("hull", audit("step_width_monotone", worst, "<=", 1e-9));
  s.add("hull", audit("step_width_bound", top, "<=", half_pi + 1e-3));
  // seeded random quasi-symmetric fixture
  BoundarySpec rnd;
  rnd.family = "random";
  rnd.samples = 256;
  rnd.knots = 128;
  const hull::WidthReport wr = w(make_curve(rnd, c.seed));
  s.R.diagnostics["random_fixture_width"] = wr.raw_width;
  s.add("hull", audit("random_width_bound", wr.raw_width, "<=", half_pi + 1e-3));
}

void surface_checks(Suite& s) {
  const auto mesh = surface::make_mesh(2.0, 12, 48);
  const surface::SpacelikeGraph P(mesh, Eigen::VectorXd::Zero(mesh->size()));
  const surface::ShapeData sd = surface::shape_data(P);
  s.add("surface", audit("slice_H", surface::mean_curvature(P).lpNorm<Eigen::Infinity>(), "<", 1e-10));
  s.add("surface", audit("slice_K", (sd.K.array() + 1).abs().maxCoeff(), "<", 1e-10));
  double prev = 1e300, worst = -1e300;
  for (int k : {12, 24}) {
    const auto m = surface::make_mesh(2.0, k, 3 * k);
    const auto mask = m->interior_mask(2);
    const Eigen::VectorXd H = surface::mean_curvature(surface::horosphere_surface(m));
    double h = 0;
    for (std::size_t i = 0; i < m->size(); ++i)
      if (mask[i]) h = std::max(h, std::abs(H[i]));
    worst = std::max(worst, h - prev);
    prev = h;
  }
  s.add("surface", audit("horosphere_H_refinement", worst, "<", 0));
}

void solver_checks(Suite& s) {
  solver::SolveConfig cfg;
  cfg.radii = {2.0};
  cfg.mesh_res = {12, 48};
  const auto id = solver::solve_maximal(boundary::lift_graph(boundary::identity_homeo()), cfg);
  s.add("solver", audit("identity_u", id.S->u().lpNorm<Eigen::Infinity>(), "<", 1e-10));

  cfg.mesh_res = {16, 64};
  const auto st = solver::solve_maximal(boundary::lift_graph(boundary::step_family(0.5)), cfg);
  double hull_min = 1e300;
  for (const auto& h : st.history) hull_min = std::min(hull_min, h.hull_margin);
  s.add("solver", audit_bool("step_converged", st.converged));
  s.add("solver", audit("step_H", surface::mean_curvature(*st.S).lpNorm<Eigen::Infinity>(), "<", cfg.tol_H));
  s.add("solver", audit("step_hull_margin", hull_min, ">=", -cfg.hull_tol));

  double reported = 0;
  bool rejected = false;
  try {
    solver::solve_maximal(boundary::two_step_curve(), cfg);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    const auto p = msg.find("width ");
    rejected = msg.find("lightlike") != std::string::npos && p != std::string::npos;
    if (p != std::string::npos) reported = std::stod(msg.substr(p + 6));
  }
  s.add("solver", audit_bool("two_step_rejected", rejected));
  s.add("solver", audit("two_step_width", std::abs(reported - half_pi), "<", 1e-3));

  // minimal Lagrangian map of the step solution
  const surface::ShapeData sd = surface::shape_data(*st.S);
  const lagrangian::PhiS P = lagrangian::phi_s(lagrangian::extract_projections(*st.S, sd));
  s.add("lagrangian", audit("step_det", P.max_det_residual, "<=", 1e-8));
  s.add("lagrangian", audit("step_flips", P.flipped_l + P.flipped_r, "==", 0));
  const surface::SpacelikeGraph& slice = *id.S;
  const lagrangian::MLMap ml = lagrangian::extract_projections(slice, surface::shape_data(slice));
  double e = 0;
  for (std::size_t v = 0; v < slice.mesh().size(); ++v)
    e = std::max({e, (ml.phi_l[v] - slice.mesh().vertices[v]).norm(), (ml.phi_r[v] - slice.mesh().vertices[v]).norm()});
  s.add("lagrangian", audit("slice_identity", e, "<", 1e-10));
}

}  // namespace

Report cmd_verify(const RunConfig& c, const VerifyOptions& opt) {
  Report R;
  R.command = "verify";
  R.config = to_json(c);
  Suite s{R};
  using Clock = std::chrono::steady_clock;
  auto t0 = Clock::now();
  auto lap = [&](const char* name) {
    const auto t1 = Clock::now();
    R.timings[name] = std::chrono::duration<double>(t1 - t0).count();
    t0 = t1;
  };
  lorentz_checks(s, c, opt.geodesic);
  lap("lorentz");
  boundary_checks(s, c);
  lap("boundary");
  hull_checks(s, c);
  lap("hull");
  surface_checks(s);
  lap("surface");
  solver_checks(s);
  lap("solver");
  int failed = 0;
  for (const Audit& a : R.audits) failed += !a.pass;
  R.diagnostics["checks"] = R.audits.size();
  R.diagnostics["failed"] = failed;
  return R;
}

}  // namespace adsmax::cli
