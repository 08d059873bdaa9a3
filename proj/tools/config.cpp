#include "config.hpp"

#include <fstream>
#include <random>
#include <set>

#include "adsmax/errors.hpp"
#include "adsmax/surface.hpp"

namespace adsmax::cli {

namespace {

// reads the keys of one JSON object, remembering which were consumed
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  template <class T>
  void get(const std::string& key, T& dst) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(at(key), "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(at(key), "expected an integer");
      if (std::is_unsigned_v<T> && v.get<long long>() < 0) fail(at(key), "expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(at(key), "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(at(key), "expected a string");
    } else if constexpr (requires { std::tuple_size<T>::value; }) {
      if (!v.is_array() || v.size() != std::tuple_size_v<T>)
        fail(at(key), "expected an array of " + std::to_string(std::tuple_size_v<T>));
    } else {
      if (!v.is_array()) fail(at(key), "expected an array");
    }
    try {
      dst = v.get<T>();
    } catch (const json::exception&) {
      fail(at(key), "wrong type");
    }
    // catches elements converted with loss, e.g. 10.5 read as an integer
    if (json(dst) != v) fail(at(key), "wrong element type");
  }

  const json* object(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(at(k), "unknown key");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ValidationError("config " + (path.empty() ? std::string("<root>") : path) + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Reader::fail(path, what);
}

const std::set<std::string> kFamilies{"identity", "step",  "bump",     "mobius",
                                      "random",   "knots", "two_step", "horosphere"};
const std::set<std::string> kSurfaces{"solve", "slice", "plane", "horosphere"};

lorentz::MobiusMap random_mobius(std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  for (;;) {
    lorentz::Mat2 m = lorentz::Mat2::Identity();
    m(0, 0) += n(rng);
    m(0, 1) += n(rng);
    m(1, 0) += n(rng);
    m(1, 1) += n(rng);
    if (m.determinant() > 0.2) return lorentz::MobiusMap(m);
  }
}

}  // namespace

RunConfig parse_config(const json& j, const Overrides& o) {
  RunConfig c;
  Reader root(j, "");
  root.get("seed", c.seed);
  root.get("out", c.out);

  if (const json* b = root.object("boundary")) {
    Reader r(*b, "boundary");
    r.get("family", c.boundary.family);
    r.get("kappa", c.boundary.kappa);
    r.get("amplitude", c.boundary.amplitude);
    r.get("mobius", c.boundary.mobius);
    r.get("alpha", c.boundary.alpha);
    r.get("f", c.boundary.f);
    r.get("samples", c.boundary.samples);
    r.get("knots", c.boundary.knots);
    r.finish();
  }
  if (const json* m = root.object("mesh")) {
    Reader r(*m, "mesh");
    r.get("r", c.mesh.r);
    r.get("res", c.mesh.res);
    r.finish();
  }
  if (const json* s = root.object("solver")) {
    Reader r(*s, "solver");
    solver::SolveConfig& v = c.solver;
    r.get("exhaustion", c.exhaustion);
    r.get("exhaustion_res", c.exhaustion_res);
    r.get("tol_H", v.tol_H);
    r.get("margin", v.margin);
    r.get("hull_tol", v.hull_tol);
    r.get("compare_radius", v.compare_radius);
    r.get("max_newton", v.max_newton);
    r.get("armijo", v.armijo);
    r.get("min_step", v.min_step);
    r.get("flow_fallback", v.flow_fallback);
    r.get("max_steps", v.max_steps);
    r.get("ds0", v.ds0);
    r.get("ds_growth", v.ds_growth);
    r.get("ds_max", v.ds_max);
    r.get("inflation", v.inflation);
    r.get("width_warning", v.width_warning);
    std::string sheet = solver::to_string(v.sheet);
    r.get("sheet", sheet);
    if (sheet == "upper")
      v.sheet = solver::DirichletSheet::upper;
    else if (sheet == "mid")
      v.sheet = solver::DirichletSheet::mid;
    else
      Reader::fail("solver.sheet", "expected \"upper\" or \"mid\"");
    r.get("sheet_fallback", v.sheet_fallback);
    r.finish();
  }
  if (const json* q = root.object("qs")) {
    Reader r(*q, "qs");
    r.get("n_infinity", c.qs.n_infinity);
    r.get("n_center", c.qs.n_center);
    r.get("n_scale", c.qs.n_scale);
    r.finish();
  }
  if (const json* g = root.object("grid")) {
    Reader r(*g, "grid");
    r.get("rings", c.grid.rings);
    r.get("per_ring", c.grid.per_ring);
    r.get("r_max", c.grid.r_max);
    r.finish();
  }
  if (const json* e = root.object("extract")) {
    Reader r(*e, "extract");
    r.get("surface", c.extract.surface);
    r.get("layers", c.extract.layers);
    r.get("trace_samples", c.extract.trace_samples);
    r.finish();
  }
  if (const json* v = root.object("verify")) {
    Reader r(*v, "verify");
    r.get("samples", c.verify.samples);
    r.finish();
  }
  root.finish();

  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.mesh_r) c.mesh.r = *o.mesh_r;
  if (o.mesh_res) c.mesh.res = *o.mesh_res;
  if (o.tol) c.solver.tol_H = *o.tol;

  const BoundarySpec& b = c.boundary;
  require(kFamilies.count(b.family), "boundary.family", "unknown family \"" + b.family + "\"");
  require(b.kappa >= 0 && b.kappa < 1, "boundary.kappa", "expected 0 <= kappa < 1");
  require(b.amplitude >= 0 && b.amplitude < 1, "boundary.amplitude", "expected 0 <= amplitude < 1");
  require(b.mobius[0] * b.mobius[3] - b.mobius[1] * b.mobius[2] > 0, "boundary.mobius",
          "expected positive determinant");
  require(b.samples >= 16, "boundary.samples", "expected at least 16");
  require(b.knots >= 8, "boundary.knots", "expected at least 8");
  if (b.family == "knots") {
    require(b.alpha.size() >= 3, "boundary.alpha", "expected at least 3 knots");
    require(b.alpha.size() == b.f.size(), "boundary.f", "expected one value per knot");
  }
  require(c.mesh.r > 0, "mesh.r", "expected a positive radius");
  require(c.exhaustion_res.empty() || c.exhaustion_res.size() == c.exhaustion.size(),
          "solver.exhaustion_res", "expected one resolution per exhaustion radius");
  require(c.qs.n_infinity > 0 && c.qs.n_center > 0 && c.qs.n_scale >= 0, "qs", "expected positive sizes");
  require(c.grid.rings > 0 && c.grid.per_ring > 0 && c.grid.r_max > 0 && c.grid.r_max < 1, "grid",
          "expected positive sizes and 0 < r_max < 1");
  require(kSurfaces.count(c.extract.surface), "extract.surface",
          "unknown surface \"" + c.extract.surface + "\"");
  require(c.extract.layers >= 1, "extract.layers", "expected at least 1");
  require(c.extract.trace_samples >= 1, "extract.trace_samples", "expected at least 1");
  require(c.verify.samples >= 1, "verify.samples", "expected at least 1");

  c.solver.radii = c.exhaustion;
  c.solver.radii.push_back(c.mesh.r);
  c.solver.mesh_res = c.mesh.res;
  c.solver.resolutions.clear();
  if (!c.exhaustion_res.empty()) {
    c.solver.resolutions = c.exhaustion_res;
    c.solver.resolutions.push_back(c.mesh.res);
  }
  c.solver.validate();
  return c;
}

RunConfig load_config(const std::string& path, const Overrides& o) {
  if (path.empty()) return parse_config(json::object(), o);
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read config " + path);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  return parse_config(j, o);
}

json to_json(const RunConfig& c) {
  const solver::SolveConfig& s = c.solver;
  return json{
      {"seed", c.seed},
      {"out", c.out},
      {"boundary",
       {{"family", c.boundary.family},
        {"kappa", c.boundary.kappa},
        {"amplitude", c.boundary.amplitude},
        {"mobius", c.boundary.mobius},
        {"alpha", c.boundary.alpha},
        {"f", c.boundary.f},
        {"samples", c.boundary.samples},
        {"knots", c.boundary.knots}}},
      {"mesh", {{"r", c.mesh.r}, {"res", c.mesh.res}}},
      {"solver",
       {{"exhaustion", c.exhaustion},
        {"exhaustion_res", c.exhaustion_res},
        {"tol_H", s.tol_H},
        {"margin", s.margin},
        {"hull_tol", s.hull_tol},
        {"compare_radius", s.compare_radius},
        {"max_newton", s.max_newton},
        {"armijo", s.armijo},
        {"min_step", s.min_step},
        {"flow_fallback", s.flow_fallback},
        {"max_steps", s.max_steps},
        {"ds0", s.ds0},
        {"ds_growth", s.ds_growth},
        {"ds_max", s.ds_max},
        {"inflation", s.inflation},
        {"width_warning", s.width_warning},
        {"sheet", solver::to_string(s.sheet)},
        {"sheet_fallback", s.sheet_fallback}}},
      {"qs", {{"n_infinity", c.qs.n_infinity}, {"n_center", c.qs.n_center}, {"n_scale", c.qs.n_scale}}},
      {"grid", {{"rings", c.grid.rings}, {"per_ring", c.grid.per_ring}, {"r_max", c.grid.r_max}}},
      {"extract",
       {{"surface", c.extract.surface},
        {"layers", c.extract.layers},
        {"trace_samples", c.extract.trace_samples}}},
      {"verify", {{"samples", c.verify.samples}}},
  };
}

bool has_homeo(const BoundarySpec& b) { return b.family != "two_step" && b.family != "horosphere"; }

lorentz::MobiusMap make_mobius(const BoundarySpec& b) {
  lorentz::Mat2 m;
  m << b.mobius[0], b.mobius[1], b.mobius[2], b.mobius[3];
  return lorentz::MobiusMap(m);
}

boundary::CircleHomeo make_homeo(const BoundarySpec& b, std::uint64_t seed) {
  if (b.family == "identity") return boundary::identity_homeo();
  if (b.family == "step") return boundary::step_family(b.kappa, b.knots);
  if (b.family == "bump") return boundary::bump_family(b.amplitude, b.knots);
  if (b.family == "mobius") return boundary::mobius_boundary(make_mobius(b));
  if (b.family == "knots") return boundary::CircleHomeo::from_knots(b.alpha, b.f);
  if (b.family == "random") {
    std::mt19937_64 rng(seed);
    const lorentz::MobiusMap m1 = random_mobius(rng, 0.4);
    const lorentz::MobiusMap m2 = random_mobius(rng, 0.4);
    return boundary::compose(m1, boundary::bump_family(b.amplitude, b.knots), m2);
  }
  throw ValidationError("boundary family \"" + b.family + "\" is not a circle homeomorphism");
}

boundary::BoundaryCurve make_curve(const BoundarySpec& b, std::uint64_t seed) {
  if (b.family == "two_step") return boundary::two_step_curve(std::max(4, b.samples / 16));
  if (b.family == "horosphere") {
    std::vector<double> th, ta;
    for (int i = 0; i < b.samples; ++i) {
      th.push_back(two_pi * i / b.samples);
      ta.push_back(surface::horosphere_boundary_tau(th.back()));
    }
    return boundary::BoundaryCurve(th, ta);
  }
  return boundary::lift_graph(make_homeo(b, seed), b.samples);
}

boundary::QsSampler make_sampler(const QsSpec& q, std::uint64_t seed) {
  boundary::QsSampler s;
  s.n_infinity = q.n_infinity;
  s.n_center = q.n_center;
  s.n_scale = q.n_scale;
  s.seed = seed;
  return s;
}

}  // namespace adsmax::cli
