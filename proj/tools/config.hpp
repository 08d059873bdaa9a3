#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "adsmax/boundary.hpp"
#include "adsmax/solver.hpp"

namespace adsmax::cli {

using nlohmann::json;

struct BoundarySpec {
  // identity, step, bump, mobius, random, knots, two_step, horosphere
  std::string family = "step";
  double kappa = 0.5;      // step
  double amplitude = 0.3;  // bump, random
  std::array<double, 4> mobius{1, 0, 0, 1};  // row-major, det > 0
  std::vector<double> alpha, f;              // knots
  int samples = 1024;                        // points of the lifted graph
  int knots = 512;
};

struct MeshSpec {
  double r = 3.0;
  std::array<int, 2> res{50, 200};
};

struct QsSpec {
  int n_infinity = 48, n_center = 48, n_scale = 16;
};

struct GridSpec {
  int rings = 8, per_ring = 32;
  double r_max = 0.95;
};

struct ExtractSpec {
  std::string surface = "solve";  // solve, slice, plane, horosphere
  int layers = 2;
  int trace_samples = 32;
};

struct VerifySpec {
  int samples = 1000;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out = "out";
  BoundarySpec boundary;
  MeshSpec mesh;
  solver::SolveConfig solver;  // radii and mesh_res follow mesh and exhaustion
  std::vector<double> exhaustion;                        // radii below mesh.r
  std::vector<std::array<int, 2>> exhaustion_res;        // one per exhaustion radius, or empty
  QsSpec qs;
  GridSpec grid;
  ExtractSpec extract;
  VerifySpec verify;
};

// command-line overrides, applied after the config file
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> mesh_r;
  std::optional<std::array<int, 2>> mesh_res;
  std::optional<double> tol;
};

// strict parse: unknown keys and wrong types throw ValidationError naming the path
RunConfig parse_config(const json& j, const Overrides& o = {});
RunConfig load_config(const std::string& path, const Overrides& o = {});
// full effective config, every default expanded
json to_json(const RunConfig& c);

bool has_homeo(const BoundarySpec& b);
boundary::CircleHomeo make_homeo(const BoundarySpec& b, std::uint64_t seed);
boundary::BoundaryCurve make_curve(const BoundarySpec& b, std::uint64_t seed);
lorentz::MobiusMap make_mobius(const BoundarySpec& b);
boundary::QsSampler make_sampler(const QsSpec& q, std::uint64_t seed);

}  // namespace adsmax::cli
