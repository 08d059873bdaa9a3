#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "adsmax/errors.hpp"
#include "adsmax/hull.hpp"
#include "adsmax/lagrangian.hpp"
#include "adsmax/parallel.hpp"
#include "adsmax/solver.hpp"
#include "adsmax/surface.hpp"

#ifndef ADSMAX_VERSION
#define ADSMAX_VERSION "0.0.0"
#endif

namespace adsmax::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

class Timer {
 public:
  explicit Timer(json& sink) : sink_(sink) {}
  void lap(const std::string& name) {
    const auto now = Clock::now();
    sink_[name] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

 private:
  json& sink_;
  Clock::time_point last_ = Clock::now();
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

void write_output(Report& R, const RunConfig& c, const std::string& name,
                  const std::function<void(std::ostream&)>& body) {
  std::ostringstream os;
  body(os);
  const std::string s = os.str();
  fs::create_directories(c.out);
  std::ofstream f(fs::path(c.out) / name, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + (fs::path(c.out) / name).string());
  f << s;
  R.outputs.push_back({{"file", name}, {"bytes", s.size()}, {"fnv1a", hex(fnv1a(s))}});
}

// JSON has no inf or NaN
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double median(std::vector<double> a) {
  if (a.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
  return a[a.size() / 2];
}

template <class F>
std::vector<double> collect(std::size_t n, const std::vector<bool>& mask, F f) {
  std::vector<double> a;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) {
      const double x = f(i);
      if (std::isfinite(x)) a.push_back(x);
    }
  return a;
}

double max_of(const std::vector<double>& a) {
  return a.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(a.begin(), a.end());
}

Report start(const std::string& command, const RunConfig& c) {
  Report R;
  R.command = command;
  R.config = to_json(c);
  return R;
}

std::vector<Eigen::Vector2d> disk_grid(const GridSpec& g) {
  std::vector<Eigen::Vector2d> pts{Eigen::Vector2d::Zero()};
  for (int i = 1; i <= g.rings; ++i) {
    const double r = g.r_max * i / g.rings;
    for (int j = 0; j < g.per_ring; ++j) {
      const double a = two_pi * (j + 0.5 * (i % 2)) / g.per_ring;
      pts.emplace_back(r * std::cos(a), r * std::sin(a));
    }
  }
  return pts;
}

json cyl(const lorentz::CylPoint& p) { return {{"y", {p.y.x(), p.y.y()}}, {"t", p.t}}; }

json width_json(const hull::WidthReport& w, const boundary::BoundaryCurve& curve) {
  return {{"width", w.width},
          {"raw_width", w.raw_width},
          {"planar", w.planar},
          {"lower", cyl(w.lower_cyl)},
          {"upper", cyl(w.upper_cyl)},
          {"lightlike_segments", curve.lightlike_segment_count()},
          {"max_slope", curve.max_slope()}};
}

void curve_outputs(Report& R, const RunConfig& c, const boundary::BoundaryCurve& curve,
                   const hull::ConvexHull3* hull) {
  write_output(R, c, "boundary.csv", [&](std::ostream& os) { curve.write_csv(os); });
  if (hull) write_output(R, c, "hull.csv", [&](std::ostream& os) { hull->write_csv(os); });
}

// invariant audit of a maximal graph: nodal H, trace of B, Gauss relation, chi equation
void audit_surface(Report& R, const RunConfig& c, const surface::SpacelikeGraph& S, const surface::ShapeData& sd) {
  const surface::DiskMesh& m = S.mesh();
  const auto mask = m.interior_mask(2);
  const Eigen::VectorXd H = surface::mean_curvature(S);
  const surface::ChiResidual chi = surface::chi_residual(S, sd);
  auto cmask = mask;
  for (std::size_t i = 0; i < cmask.size(); ++i) cmask[i] = cmask[i] && chi.valid[i];

  const double H_inf = H.lpNorm<Eigen::Infinity>();
  const double tr_inf = max_of(collect(m.size(), mask, [&](std::size_t i) { return std::abs(sd.H[i]); }));
  const double gauss =
      median(collect(m.size(), mask, [&](std::size_t i) { return std::abs(sd.K_intrinsic[i] - sd.K[i]); }));
  const double chi_med = median(collect(m.size(), cmask, [&](std::size_t i) { return std::abs(chi.residual[i]); }));
  std::vector<bool> core(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) core[i] = lorentz::hyperbolic_radius(m.vertices[i]) <= 1.0;
  const double k_core = max_of(collect(m.size(), core, [&](std::size_t i) { return sd.K[i]; }));

  R.diagnostics["surface"] = {{"vertices", m.size()},
                              {"triangles", m.triangles.size()},
                              {"spacelike_margin", S.margin()},
                              {"nodal_H_inf", H_inf},
                              {"trace_B_inf", num(tr_inf)},
                              {"gauss_median", num(gauss)},
                              {"chi_residual_median", num(chi_med)},
                              {"chi_vertices", std::count(cmask.begin(), cmask.end(), true)},
                              {"max_K_within_1", num(k_core)}};
  R.audits.push_back(audit("nodal_H_inf", H_inf, "<", c.solver.tol_H));
  R.audits.push_back(audit("spacelike_margin", S.margin(), ">", 0));
  R.audits.push_back(audit("gauss_median", gauss, "<", 0.01));
  // the fitted shape operator carries O(h^2) truncation, far above the nodal tolerance
  R.audits.push_back(audit("trace_B_inf", tr_inf, "<", 10 * c.solver.tol_H, false));
}

void surface_outputs(Report& R, const RunConfig& c, const surface::SpacelikeGraph& S, const surface::ShapeData& sd) {
  write_output(R, c, "surface.obj", [&](std::ostream& os) { surface::write_obj(os, S); });
  write_output(R, c, "surface.csv", [&](std::ostream& os) { surface::write_csv(os, S, sd); });
}

json radius_json(const solver::RadiusReport& r) {
  return {{"r", r.r},
          {"vertices", r.vertices},
          {"h", r.h},
          {"newton_iterations", r.newton_iterations},
          {"used_flow", r.used_flow},
          {"H_inf", r.H_inf},
          {"hull_margin", r.hull_margin},
          {"diff_previous", r.diff_previous}};
}

void require_converged(Report& R, bool converged, const std::string& what) {
  if (!converged && R.exit_code == exit_pass) {
    R.exit_code = exit_convergence;
    R.error = what + " did not converge";
  }
}

solver::SolveResult solve_checked(Report& R, const RunConfig& c, const boundary::BoundaryCurve& curve) {
  solver::SolveResult S = solver::solve_maximal(curve, c.solver);
  double hull_min = std::numeric_limits<double>::infinity();
  for (const solver::NewtonRecord& h : S.history) hull_min = std::min(hull_min, h.hull_margin);
  json radii = json::array();
  for (const auto& r : S.radii) radii.push_back(radius_json(r));
  R.diagnostics["solve"] = {{"converged", S.converged},
                            {"width", S.width},
                            {"width_warning", S.width_warning},
                            {"sheet", solver::to_string(S.sheet)},
                            {"newton_iterations", S.history.size()},
                            {"min_hull_margin", num(hull_min)},
                            {"radii", radii}};
  R.audits.push_back(audit("hull_margin_min", hull_min, ">=", -c.solver.hull_tol));
  require_converged(R, S.converged, "solve");
  return S;
}

}  // namespace

Audit audit(std::string name, double value, std::string relation, double threshold, bool required) {
  bool ok = false;
  if (relation == "<")
    ok = value < threshold;
  else if (relation == "<=")
    ok = value <= threshold;
  else if (relation == ">")
    ok = value > threshold;
  else if (relation == ">=")
    ok = value >= threshold;
  else if (relation == "==")
    ok = value == threshold;
  else
    throw std::logic_error("unknown relation " + relation);
  return {std::move(name), value, threshold, std::move(relation), ok, required};
}

Audit audit_bool(std::string name, bool ok, bool required) {
  return audit(std::move(name), ok ? 1.0 : 0.0, "==", 1.0, required);
}

bool Report::audits_pass() const {
  return std::all_of(audits.begin(), audits.end(), [](const Audit& a) { return a.pass || !a.required; });
}

json Report::stable_json() const {
  json a = json::array();
  for (const Audit& x : audits)
    a.push_back({{"name", x.name},
                 {"value", num(x.value)},
                 {"relation", x.relation},
                 {"threshold", x.threshold},
                 {"pass", x.pass},
                 {"required", x.required}});
  json j{{"command", command},
         {"versions",
          {{"adsmax", ADSMAX_VERSION},
           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION)},
           {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                        "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
           {"compiler", __VERSION__}}},
         {"config", config},
         {"diagnostics", diagnostics},
         {"audits", a},
         {"pass", exit_code == exit_pass},
         {"exit_code", exit_code},
         {"outputs", outputs}};
  if (!error.empty()) j["error"] = error;
  return j;
}

json Report::to_json() const {
  json j = stable_json();
  j["timings"] = timings;
  j["runtime"] = {{"threads", thread_count()}};
  return j;
}

Report cmd_width(const RunConfig& c) {
  Report R = start("width", c);
  Timer t(R.timings);
  const boundary::BoundaryCurve curve = make_curve(c.boundary, c.seed);
  t.lap("lift");
  const hull::ConvexHull3 h = hull::convex_hull(curve);
  const hull::WidthReport w = hull::width(h);
  t.lap("hull");
  R.diagnostics["width"] = width_json(w, curve);
  if (has_homeo(c.boundary)) {
    R.diagnostics["modulus"] = num(boundary::qs_modulus(make_homeo(c.boundary, c.seed), make_sampler(c.qs, c.seed)));
    t.lap("modulus");
  } else {
    R.diagnostics["modulus"] = nullptr;
  }
  const auto pts = disk_grid(c.grid);
  R.diagnostics["regularity_margin"] = num(hull::regularity_margin(h, hull::dod_envelopes(curve, pts), pts));
  t.lap("regularity");
  R.audits.push_back(audit("raw_width", w.raw_width, "<=", half_pi + 1e-3));
  curve_outputs(R, c, curve, &h);
  return R;
}

Report cmd_qs_check(const RunConfig& c) {
  Report R = start("qs-check", c);
  Timer t(R.timings);
  const boundary::CircleHomeo f = make_homeo(c.boundary, c.seed);
  const double cr1 = boundary::cross_ratio(lorentz::RP1::affine(-3), lorentz::RP1::affine(-1),
                                           lorentz::RP1::affine(1), lorentz::RP1::infinity());
  const double cr2 = boundary::cross_ratio(lorentz::RP1::affine(0), lorentz::RP1::affine(0),
                                           lorentz::RP1::affine(1), lorentz::RP1::affine(1));
  const double k = boundary::qs_modulus(f, make_sampler(c.qs, c.seed));
  QsSpec coarse{std::max(1, c.qs.n_infinity / 2), std::max(1, c.qs.n_center / 2), c.qs.n_scale / 2};
  const double k_coarse = boundary::qs_modulus(f, make_sampler(coarse, c.seed));
  t.lap("modulus");
  const boundary::BoundaryCurve curve = boundary::lift_graph(f, c.boundary.samples);
  const hull::WidthReport w = hull::width(hull::convex_hull(curve));
  t.lap("width");
  R.diagnostics["modulus"] = num(k);
  R.diagnostics["modulus_coarse"] = num(k_coarse);
  R.diagnostics["width"] = width_json(w, curve);
  R.diagnostics["near_lightlike"] = w.width > half_pi - c.solver.width_warning;
  R.audits.push_back(audit("cross_ratio_harmonic", cr1, "==", 2.0));
  R.audits.push_back(audit("cross_ratio_degenerate", cr2, "==", 1.0));
  R.audits.push_back(audit("modulus", k, ">=", 1.0));
  R.audits.push_back(audit("raw_width", w.raw_width, "<=", half_pi + 1e-3));
  return R;
}

Report cmd_solve(const RunConfig& c) {
  Report R = start("solve", c);
  Timer t(R.timings);
  const boundary::BoundaryCurve curve = make_curve(c.boundary, c.seed);
  const solver::SolveResult S = solve_checked(R, c, curve);
  t.lap("solve");
  const surface::ShapeData sd = surface::shape_data(*S.S);
  audit_surface(R, c, *S.S, sd);
  t.lap("audit");
  curve_outputs(R, c, curve, nullptr);
  surface_outputs(R, c, *S.S, sd);
  write_output(R, c, "newton_history.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "iter,H_inf,energy,step,margin,hull_margin\n";
    for (const auto& h : S.history)
      os << h.iter << ',' << h.H_inf << ',' << h.energy << ',' << h.step << ',' << h.margin << ','
         << h.hull_margin << '\n';
  });
  return R;
}

Report cmd_flow(const RunConfig& c) {
  Report R = start("flow", c);
  Timer t(R.timings);
  const boundary::BoundaryCurve curve = make_curve(c.boundary, c.seed);
  const solver::FlowResult F = solver::flow_run(curve, c.solver);
  t.lap("flow");
  R.diagnostics["flow"] = {{"converged", F.converged},
                           {"steps", F.state.history.size()},
                           {"rejected", F.state.rejected},
                           {"s", F.state.s},
                           {"H_inf", F.state.H_inf},
                           {"h_bound_ratio", F.h_bound_ratio},
                           {"drift_excess", F.drift_excess},
                           {"min_hull_margin", F.min_hull_margin}};
  R.audits.push_back(audit("flow_H_inf", F.state.H_inf, "<", c.solver.tol_H));
  R.audits.push_back(audit_bool("h_bound", F.h_bound));
  R.audits.push_back(audit_bool("drift_bound", F.drift_bound));
  R.audits.push_back(audit("hull_margin_min", F.min_hull_margin, ">=", -c.solver.hull_tol));
  require_converged(R, F.converged, "flow");
  const surface::ShapeData sd = surface::shape_data(F.state.S);
  audit_surface(R, c, F.state.S, sd);
  t.lap("audit");
  surface_outputs(R, c, F.state.S, sd);
  write_output(R, c, "flow_history.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "s,ds,H_inf,drift,margin,hull_margin\n";
    for (const auto& h : F.state.history)
      os << h.s << ',' << h.ds << ',' << h.H_inf << ',' << h.drift << ',' << h.margin << ',' << h.hull_margin
         << '\n';
  });
  return R;
}

Report cmd_extract(const RunConfig& c) {
  Report R = start("extract-map", c);
  Timer t(R.timings);
  std::optional<surface::SpacelikeGraph> S;
  std::optional<boundary::CircleHomeo> f;
  const std::string& src = c.extract.surface;
  if (src == "solve") {
    const solver::SolveResult res = solve_checked(R, c, make_curve(c.boundary, c.seed));
    S = *res.S;
    if (has_homeo(c.boundary)) f = make_homeo(c.boundary, c.seed);
  } else {
    const auto mesh = surface::make_mesh(c.mesh.r, c.mesh.res[0], c.mesh.res[1]);
    if (src == "slice") {
      S.emplace(mesh, Eigen::VectorXd::Zero(mesh->size()));
      f = boundary::identity_homeo();
    } else if (src == "plane") {
      const lorentz::MobiusMap m = make_mobius(c.boundary);
      S = surface::plane_surface(mesh, lorentz::SpacelikePlane{lorentz::QuadricPoint(lorentz::from_matrix(m.inverse().matrix()))});
      f = boundary::mobius_boundary(m);
    } else {
      S = surface::horosphere_surface(mesh);
    }
  }
  t.lap("surface");

  const surface::ShapeData sd = surface::shape_data(*S);
  const surface::DiskMesh& m = S->mesh();
  const auto mask = m.interior_mask(c.extract.layers);
  const double thr = lagrangian::degenerate_threshold(sd, mask);
  const lagrangian::MuMetrics mu = lagrangian::mu_metrics(sd, thr);
  int interior = 0, flagged = 0;
  for (std::size_t v = 0; v < m.size(); ++v)
    if (mask[v]) {
      ++interior;
      flagged += mu.degenerate[v];
    }
  const bool degenerate = 2 * flagged > interior;
  R.diagnostics["degeneracy"] = {{"threshold", thr},
                                 {"flagged", flagged},
                                 {"interior", interior},
                                 {"degenerate", degenerate}};
  if (degenerate) {
    // det B = -1 almost everywhere: mu_l and mu_r collapse and there is no Phi_S
    R.diagnostics["phi_s"] = nullptr;
    t.lap("extract");
    return R;
  }

  lagrangian::MLMap ml = lagrangian::extract_projections(*S, sd, c.extract.layers);
  const double kl = median(collect(m.size(), ml.valid, [&, K = lagrangian::metric_curvature(m, mu.l)](std::size_t i) {
    return std::abs(K[i] + 1);
  }));
  const double kr = median(collect(m.size(), ml.valid, [&, K = lagrangian::metric_curvature(m, mu.r)](std::size_t i) {
    return std::abs(K[i] + 1);
  }));
  const lagrangian::PullbackReport pl = lagrangian::pullback_consistency(ml, ml.phi_l, mu.l);
  const lagrangian::PullbackReport pr = lagrangian::pullback_consistency(ml, ml.phi_r, mu.r);
  const lagrangian::PhiS P = lagrangian::phi_s(std::move(ml));
  t.lap("extract");

  R.diagnostics["phi_s"] = {{"valid", std::count(P.ml.valid.begin(), P.ml.valid.end(), true)},
                            {"flat", P.ml.flat},
                            {"max_det_residual", P.max_det_residual},
                            {"sup_dilatation", num(P.sup_dilatation)},
                            {"median_dilatation", num(P.median_dilatation)},
                            {"histogram", P.histogram},
                            {"flipped_l", P.flipped_l},
                            {"flipped_r", P.flipped_r},
                            {"mu_l_curvature_median", num(kl)},
                            {"mu_r_curvature_median", num(kr)},
                            {"pullback_l_median", pl.median},
                            {"pullback_r_median", pr.median}};
  R.audits.push_back(audit("det_dphi_s", P.max_det_residual, "<=", 1e-8));
  R.audits.push_back(audit("flipped_triangles", P.flipped_l + P.flipped_r, "==", 0));
  R.audits.push_back(audit("mu_l_curvature_median", kl, "<", 0.05));
  R.audits.push_back(audit("mu_r_curvature_median", kr, "<", 0.05));

  write_output(R, c, "phi_map.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "y1,y2,phi_l1,phi_l2,phi_r1,phi_r2,dilatation,valid\n";
    for (std::size_t v = 0; v < m.size(); ++v)
      os << m.vertices[v].x() << ',' << m.vertices[v].y() << ',' << P.ml.phi_l[v].x() << ',' << P.ml.phi_l[v].y()
         << ',' << P.ml.phi_r[v].x() << ',' << P.ml.phi_r[v].y() << ',' << P.ml.dilatation[v] << ','
         << P.ml.valid[v] << '\n';
  });
  if (f) {
    const auto trace = P.boundary_trace(*f, c.extract.trace_samples);
    double excess = -std::numeric_limits<double>::infinity(), worst = 0;
    for (const auto& s : trace) {
      excess = std::max(excess, s.error - s.tol);
      worst = std::max(worst, s.error);
    }
    R.diagnostics["trace"] = {{"samples", trace.size()}, {"max_error", worst}, {"max_excess", num(excess)}};
    R.audits.push_back(audit("trace_excess", excess, "<=", 0));
    write_output(R, c, "trace.csv", [&](std::ostream& os) {
      os.precision(17);
      os << "xi,expected,measured,error,tol\n";
      for (const auto& s : trace)
        os << s.xi << ',' << s.expected << ',' << s.measured << ',' << s.error << ',' << s.tol << '\n';
    });
  }
  return R;
}

Report cmd_export(const RunConfig& c) {
  Report R = start("export", c);
  Timer t(R.timings);
  const boundary::BoundaryCurve curve = make_curve(c.boundary, c.seed);
  const hull::ConvexHull3 h = hull::convex_hull(curve);
  R.diagnostics["width"] = width_json(hull::width(h), curve);
  curve_outputs(R, c, curve, &h);
  const auto pts = disk_grid(c.grid);
  const hull::Envelopes env = hull::dod_envelopes(curve, pts);
  write_output(R, c, "sheets.csv", [&](std::ostream& os) {
    os.precision(17);
    os << "y1,y2,hull_lower,hull_upper,dod_lower,dod_upper\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const hull::Heights z = h.heights(pts[i]);
      os << pts[i].x() << ',' << pts[i].y() << ',' << z.lower << ',' << z.upper << ',' << env.lower[i] << ','
         << env.upper[i] << '\n';
    }
  });
  if (has_homeo(c.boundary)) {
    const boundary::CircleHomeo f = make_homeo(c.boundary, c.seed);
    write_output(R, c, "homeo.csv", [&](std::ostream& os) {
      os.precision(17);
      os << "alpha,f,lift\n";
      for (int k = 0; k < c.boundary.samples; ++k) {
        const double a = two_pi * k / c.boundary.samples;
        os << a << ',' << f(a) << ',' << f.lift(a) << '\n';
      }
    });
  }
  t.lap("export");
  return R;
}

Report run_command(const std::string& name, const RunConfig& c, const VerifyOptions& opt) {
  Report R;
  try {
    if (name == "width")
      R = cmd_width(c);
    else if (name == "qs-check")
      R = cmd_qs_check(c);
    else if (name == "solve")
      R = cmd_solve(c);
    else if (name == "flow")
      R = cmd_flow(c);
    else if (name == "extract-map")
      R = cmd_extract(c);
    else if (name == "export")
      R = cmd_export(c);
    else if (name == "verify")
      R = cmd_verify(c, opt);
    else
      throw ValidationError("unknown command " + name);
  } catch (const ValidationError& e) {
    R = start(name, c);
    R.exit_code = exit_validation;
    R.error = e.what();
  } catch (const ConvergenceError& e) {
    R = start(name, c);
    R.exit_code = exit_convergence;
    R.error = e.what();
  } catch (const AuditError& e) {
    R = start(name, c);
    R.exit_code = exit_audit;
    R.error = e.what();
  }
  if (R.exit_code == exit_pass && !R.audits_pass()) R.exit_code = exit_audit;
  fs::create_directories(c.out);
  std::ofstream(fs::path(c.out) / "report.json") << R.to_json().dump(2) << '\n';
  return R;
}

}  // namespace adsmax::cli
