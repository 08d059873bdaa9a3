#pragma once

#include <array>
#include <optional>
#include <vector>

#include "adsmax/boundary.hpp"
#include "adsmax/constants.hpp"
#include "adsmax/hull.hpp"
#include "adsmax/surface.hpp"

namespace adsmax::solver {

using boundary::BoundaryCurve;
using surface::MeshPtr;
using surface::SpacelikeGraph;

// Dirichlet sheet: heights of the future boundary of the convex hull over the
// boundary circle, or the midpoint of the two hull boundaries. The future sheet
// can be nearly null for wide hulls and then admits no discrete spacelike
// extension; the midpoint sheet stays inside the hull and converges to the
// same curve as r grows.
enum class DirichletSheet { upper, mid };
const char* to_string(DirichletSheet s);

struct SolveConfig {
  std::vector<double> radii{3.0};              // exhaustion schedule, strictly increasing
  std::vector<std::array<int, 2>> resolutions;  // (n_rings, n_angular) per radius; empty: mesh_res
  std::array<int, 2> mesh_res{50, 200};
  double tol_H = tol::mean_curvature;
  double margin = tol::margin;  // spacelike margin restored by the slope limiter
  double hull_tol = 1e-3;       // allowed facet margin deficit
  double compare_radius = 0;    // exhaustion comparison disk, 0: half the first radius
  // Newton
  int max_newton = 60;
  double armijo = 1e-4;
  double min_step = 1e-10;
  bool flow_fallback = true;
  // flow
  int max_steps = 4000;
  double ds0 = 0;  // 0: h^2 / 4
  double ds_growth = 1.5;
  double ds_max = 1e3;
  double inflation = 1.5;
  double width_warning = 0.05;  // warn when the width exceeds pi/2 minus this
  DirichletSheet sheet = DirichletSheet::upper;
  bool sheet_fallback = true;  // retry the whole schedule on the midpoint sheet

  void validate() const;
  std::array<int, 2> resolution(std::size_t k) const;
};

// Dirichlet data over the boundary ring, zero elsewhere
Eigen::VectorXd dirichlet_values(const hull::ConvexHull3& hull, const surface::DiskMesh& m,
                                 DirichletSheet sheet = DirichletSheet::upper);

// hull midsurface with the Dirichlet ring after one damped Jacobi pass, blended
// towards the Dirichlet sheet until every triangle has spacelike margin >= eps;
// then local smoothing, then continuation in the boundary data. Throws
// ValidationError (with the hull width) when all fail.
SpacelikeGraph initial_graph(const hull::ConvexHull3& hull, MeshPtr mesh, double eps = tol::margin,
                             DirichletSheet sheet = DirichletSheet::upper);
SpacelikeGraph initial_graph(const BoundaryCurve& curve, MeshPtr mesh, double eps = tol::margin,
                             DirichletSheet sheet = DirichletSheet::upper);
// the same limiter applied to arbitrary heights; boundary values are kept
Eigen::VectorXd slope_limit(const surface::DiskMesh& m, Eigen::VectorXd u, double eps,
                            const hull::ConvexHull3* hull = nullptr);

// nodal mean curvature from an assembly; boundary vertices 0
Eigen::VectorXd residual_curvature(const surface::DiskMesh& m, const surface::Assembly& A);
// min over vertices of the hull facet margin
double hull_margin(const hull::ConvexHull3& hull, const SpacelikeGraph& S);

struct FlowRecord {
  double s, ds, H_inf, drift, margin, hull_margin;
};

struct FlowState {
  SpacelikeGraph S;
  Eigen::VectorXd u0;  // initial heights, for the drift bound
  double s = 0;
  double ds = 0;       // proposed next step
  double H_inf = 0;
  int rejected = 0;
  std::vector<FlowRecord> history;
};

FlowState flow_start(SpacelikeGraph S0, double ds0);
// one accepted semi-implicit step of size <= ds: (M_v + ds K_v) u' = M_v u with
// v and the lapse frozen at the step start. Halves ds on a margin failure or
// when ||H|| grows by more than `inflation`; throws ConvergenceError below 1e-12.
FlowState flow_step(const FlowState& F, double ds, double inflation = 1.5,
                    const hull::ConvexHull3* hull = nullptr);

struct FlowResult {
  FlowState state;
  bool converged = false;
  bool h_bound = true;      // H^2 <= 1.1 / s after the first 5% of steps
  bool drift_bound = true;  // max|u_s - u_0| <= sqrt(2 s) + 0.01 throughout
  bool hull_ok = true;      // every accepted state within hull_tol of the hull
  double h_bound_ratio = 0;      // max of s H^2 over the checked steps
  double drift_excess = -1e300;  // max of drift - sqrt(2 s)
  double min_hull_margin = 1e300;
};
FlowResult flow_run(FlowState F, const SolveConfig& cfg, const hull::ConvexHull3* hull = nullptr);
// flow on the last radius of the schedule from initial_graph
FlowResult flow_run(const BoundaryCurve& curve, const SolveConfig& cfg);

struct NewtonRecord {
  int iter;
  double H_inf, energy, step, margin, hull_margin;
};

struct RadiusReport {
  double r = 0;
  std::size_t vertices = 0;
  double h = 0;
  int newton_iterations = 0;
  bool used_flow = false;
  double H_inf = 0;
  double hull_margin = 0;
  double diff_previous = -1;  // sup over the comparison disk, -1 for the first radius
};

struct SolveResult {
  std::optional<SpacelikeGraph> S;
  bool converged = false;
  double width = 0;
  bool width_warning = false;
  DirichletSheet sheet = DirichletSheet::upper;  // sheet actually used
  std::vector<RadiusReport> radii;
  std::vector<NewtonRecord> history;  // all radii, in order
};

// damped Newton on the discrete area functional from S0 with its boundary values
struct NewtonResult {
  SpacelikeGraph S;
  bool converged = false;
  bool used_flow = false;
  std::vector<NewtonRecord> history;
};
NewtonResult newton_solve(SpacelikeGraph S0, const SolveConfig& cfg, const hull::ConvexHull3* hull = nullptr);

// exhaustion over cfg.radii with warm starts; rejects curves with lightlike
// segments (ValidationError carrying the width)
SolveResult solve_maximal(const BoundaryCurve& curve, const SolveConfig& cfg);

}  // namespace adsmax::solver
