#include "adsmax/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "adsmax/errors.hpp"
#include "adsmax/parallel.hpp"

namespace adsmax::solver {

namespace {

using Eigen::SparseMatrix;
using Eigen::Vector2d;
using Eigen::VectorXd;
using surface::Assembly;
using surface::DiskMesh;

struct DofMap {
  std::vector<int> index;  // vertex -> interior dof, -1 on the boundary
  int n = 0;
  explicit DofMap(const DiskMesh& m) : index(m.size(), -1) {
    for (std::size_t v = 0; v < m.size(); ++v)
      if (!m.boundary(static_cast<int>(v))) index[v] = n++;
  }
};

// interior block of a vertex matrix, plus the coupling to boundary values
SparseMatrix<double> interior_block(const SparseMatrix<double>& A, const DofMap& d) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      const int i = d.index[it.row()], j = d.index[it.col()];
      if (i >= 0 && j >= 0) t.emplace_back(i, j, it.value());
    }
  SparseMatrix<double> B(d.n, d.n);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

// symmetric positive definite solve; conjugate gradients with an incomplete
// Cholesky preconditioner, direct factorization if that stalls
VectorXd spd_solve(const SparseMatrix<double>& A, const VectorXd& b) {
  Eigen::ConjugateGradient<SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 4 * A.rows()));
  cg.compute(A);
  if (cg.info() == Eigen::Success) {
    VectorXd x = cg.solve(b);
    if (cg.info() == Eigen::Success) return x;
  }
  Eigen::SimplicialLDLT<SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("linear solve failed");
  return ldlt.solve(b);
}

Vector2d tri_gradient(const DiskMesh& m, std::size_t t, const VectorXd& u) {
  const auto& T = m.triangles[t];
  const surface::TriGeom& g = m.geom[t];
  return (u[T[0]] * g.grad.row(0) + u[T[1]] * g.grad.row(1) + u[T[2]] * g.grad.row(2)).transpose();
}

// stiffness K_ij = int phi^2 v grad psi_i . grad psi_j and lumped weights
// int phi^2 v a^2 psi_i, with v frozen at u
struct FlowMatrices {
  SparseMatrix<double> K;
  VectorXd M;
};

FlowMatrices flow_matrices(const DiskMesh& m, const VectorXd& u) {
  const std::size_t nt = m.triangles.size();
  std::vector<Eigen::Matrix3d> kl(nt);
  std::vector<Eigen::Vector3d> ml(nt);
  parallel_for(nt, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      const surface::TriGeom& G = m.geom[t];
      const double du2 = tri_gradient(m, t, u).squaredNorm();
      const double w = G.area / 3.0;
      kl[t].setZero();
      ml[t].setZero();
      for (int q = 0; q < 3; ++q) {
        const double v = 1.0 / std::sqrt(std::max(1e-300, 1.0 - G.c2[q] * du2));
        kl[t] += (w * G.phi2[q] * v) * (G.grad * G.grad.transpose());
        const double f = w * G.phi2[q] * v * G.a2[q];
        ml[t][(q + 1) % 3] += 0.5 * f;
        ml[t][(q + 2) % 3] += 0.5 * f;
      }
    }
  });
  FlowMatrices F;
  F.M = VectorXd::Zero(m.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& T = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      F.M[T[i]] += ml[t][i];
      for (int j = 0; j < 3; ++j) trip.emplace_back(T[i], T[j], kl[t](i, j));
    }
  }
  F.K.resize(m.size(), m.size());
  F.K.setFromTriplets(trip.begin(), trip.end());
  return F;
}

double min_margin(const DiskMesh& m, const VectorXd& u) {
  const auto mg = surface::triangle_margins(m, u);
  return *std::min_element(mg.begin(), mg.end());
}

double interior_max(const DiskMesh& m, const VectorXd& H) {
  double h = 0;
  for (std::size_t v = 0; v < m.size(); ++v)
    if (!m.boundary(static_cast<int>(v))) h = std::max(h, std::abs(H[v]));
  return h;
}

std::string width_note(const hull::ConvexHull3& hull) {
  std::ostringstream os;
  try {
    const hull::WidthReport w = hull::width(hull);
    os << "width " << w.raw_width << " (pi/2 = " << half_pi << ")";
  } catch (const std::exception& e) {
    os << "width unavailable: " << e.what();
  }
  return os.str();
}

}  // namespace

void SolveConfig::validate() const {
  if (radii.empty()) throw ValidationError("config: empty radius schedule");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0) || !std::isfinite(radii[k])) throw ValidationError("config: radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw ValidationError("config: radii must increase strictly");
  }
  if (!resolutions.empty() && resolutions.size() != radii.size())
    throw ValidationError("config: one resolution per radius");
  if (!(tol_H > 0) || !(margin > 0) || margin >= 1 || !(hull_tol >= 0))
    throw ValidationError("config: tolerances out of range");
  if (max_newton < 1 || max_steps < 1 || !(ds_growth >= 1) || !(inflation > 1) || !(ds_max > 0) || ds0 < 0)
    throw ValidationError("config: iteration controls out of range");
}

std::array<int, 2> SolveConfig::resolution(std::size_t k) const {
  return resolutions.empty() ? mesh_res : resolutions.at(k);
}

const char* to_string(DirichletSheet s) { return s == DirichletSheet::upper ? "upper" : "mid"; }

Eigen::VectorXd dirichlet_values(const hull::ConvexHull3& hull, const surface::DiskMesh& m,
                                 DirichletSheet sheet) {
  VectorXd u = VectorXd::Zero(m.size());
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (!m.boundary(static_cast<int>(v))) continue;
    const hull::Heights z = hull.heights(m.vertices[v]);
    u[v] = sheet == DirichletSheet::upper ? z.upper : 0.5 * (z.lower + z.upper);
  }
  return u;
}

Eigen::VectorXd slope_limit(const surface::DiskMesh& m, Eigen::VectorXd u, double eps,
                            const hull::ConvexHull3* hull) {
  for (int sweep = 0; sweep < 2000; ++sweep) {
    const auto mg = surface::triangle_margins(m, u);
    std::vector<char> mark(m.size(), 0);
    bool bad = false;
    for (std::size_t t = 0; t < mg.size(); ++t) {
      if (mg[t] >= eps) continue;
      bad = true;
      for (int v : m.triangles[t])
        if (!m.boundary(v)) mark[v] = 1;
    }
    if (!bad) return u;
    bool any = false;
    const VectorXd old = u;
    for (std::size_t v = 0; v < m.size(); ++v) {
      if (!mark[v]) continue;
      any = true;
      double s = 0;
      for (int w : m.neighbors[v]) s += old[w];
      u[v] = s / static_cast<double>(m.neighbors[v].size());
    }
    if (!any) break;  // the boundary ring itself violates the margin
  }
  std::string msg = "initial_graph: spacelike margin unrecoverable (curve nearly lightlike)";
  if (hull) msg += "; " + width_note(*hull);
  throw ValidationError(msg);
}

SpacelikeGraph initial_graph(const hull::ConvexHull3& hull, MeshPtr mesh, double eps, DirichletSheet sheet) {
  const DiskMesh& m = *mesh;
  // `upper` is the Dirichlet sheet over the whole disk
  VectorXd upper = dirichlet_values(hull, m, sheet), mid = upper;
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (m.boundary(static_cast<int>(v))) continue;
    const hull::Heights z = hull.heights(m.vertices[v]);
    mid[v] = 0.5 * (z.lower + z.upper);
    upper[v] = sheet == DirichletSheet::upper ? z.upper : mid[v];
  }
  // one damped Jacobi pass
  const VectorXd old = mid;
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (m.boundary(static_cast<int>(v))) continue;
    double s = 0;
    for (int w : m.neighbors[v]) s += old[w];
    mid[v] = 0.5 * old[v] + 0.5 * s / static_cast<double>(m.neighbors[v].size());
  }
  // the spacelike set is convex, so blend towards the upper sheet until the
  // margin holds; small disks need this, the ring sits far above the midsurface
  VectorXd best = mid;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (double w = 1.0; w >= 1.0 / 64; w *= 0.5) {
    const VectorXd u = w * mid + (1 - w) * upper;
    const double mg = min_margin(m, u);
    if (mg >= eps) return SpacelikeGraph(std::move(mesh), u);
    if (mg > best_margin) {
      best_margin = mg;
      best = u;
    }
  }
  const double mg = min_margin(m, upper);
  if (mg > best_margin) {
    best_margin = mg;
    best = upper;
  }
  try {
    return SpacelikeGraph(mesh, slope_limit(m, best, eps, &hull));
  } catch (const ValidationError&) {
  }
  // Continuation in the boundary data: lambda * best is spacelike for small
  // lambda, and a discrete maximal graph for data lambda * g scaled by rho stays
  // spacelike while rho^2 < 1 / (1 - margin).
  SolveConfig cfg;
  cfg.max_newton = 30;
  cfg.flow_fallback = false;
  double lambda = std::min(1.0, std::sqrt((1 - eps) / (1 - best_margin)));
  VectorXd u = lambda * best;
  for (int step = 0;; ++step) {
    std::optional<NewtonResult> nr;
    try {
      nr = newton_solve(SpacelikeGraph(mesh, u), cfg);
    } catch (const ConvergenceError& e) {
      throw ValidationError(std::string("initial_graph: continuation failed (") + e.what() + "); " +
                            width_note(hull));
    }
    if (lambda >= 1.0) return std::move(nr->S);
    const double rho = std::min(1.0 / lambda, std::sqrt((1 - eps) / (1 - nr->S.margin())));
    if (!nr->converged || rho < 1.002 || step >= 40)
      throw ValidationError("initial_graph: boundary data admit no spacelike extension on this mesh; " +
                            width_note(hull));
    lambda = std::min(1.0, lambda * rho);
    u = rho * nr->S.u();
    if (lambda == 1.0)
      for (std::size_t v = 0; v < m.size(); ++v)
        if (m.boundary(static_cast<int>(v))) u[v] = best[v];
  }
}

SpacelikeGraph initial_graph(const BoundaryCurve& curve, MeshPtr mesh, double eps, DirichletSheet sheet) {
  return initial_graph(hull::convex_hull(curve), std::move(mesh), eps, sheet);
}

Eigen::VectorXd residual_curvature(const surface::DiskMesh& m, const surface::Assembly& A) {
  const VectorXd M = surface::curvature_mass(m);
  VectorXd H = VectorXd::Zero(m.size());
  for (std::size_t v = 0; v < m.size(); ++v)
    if (!m.boundary(static_cast<int>(v))) H[v] = -A.gradient[v] / M[v];
  return H;
}

double hull_margin(const hull::ConvexHull3& hull, const SpacelikeGraph& S) {
  const DiskMesh& m = S.mesh();
  std::vector<double> mg(m.size());
  parallel_for(m.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t v = b; v < e; ++v) {
      try {
        mg[v] = hull::contains(hull, lorentz::CylPoint{m.vertices[v], S.u()[v]}).margin;
      } catch (const ValidationError&) {
        mg[v] = -std::numeric_limits<double>::infinity();
      }
    }
  });
  return *std::min_element(mg.begin(), mg.end());
}

FlowState flow_start(SpacelikeGraph S0, double ds0) {
  const Assembly A = surface::assemble(S0.mesh(), S0.u(), false);
  FlowState F{std::move(S0), {}, 0.0, ds0, 0.0, 0, {}};
  F.u0 = F.S.u();
  F.H_inf = interior_max(F.S.mesh(), residual_curvature(F.S.mesh(), A));
  if (!(F.ds > 0)) F.ds = 0.25 * F.S.mesh().h * F.S.mesh().h;
  return F;
}

FlowState flow_step(const FlowState& F, double ds, double inflation, const hull::ConvexHull3* hull) {
  const DiskMesh& m = F.S.mesh();
  const DofMap d(m);
  const VectorXd& u = F.S.u();
  const FlowMatrices fm = flow_matrices(m, u);
  const SparseMatrix<double> K = interior_block(fm.K, d);
  // boundary coupling -K_IB u_B
  VectorXd kb = VectorXd::Zero(d.n);
  for (int k = 0; k < fm.K.outerSize(); ++k)
    for (SparseMatrix<double>::InnerIterator it(fm.K, k); it; ++it) {
      const int i = d.index[it.row()];
      if (i >= 0 && d.index[it.col()] < 0) kb[i] -= it.value() * u[it.col()];
    }
  VectorXd Mi(d.n), ui(d.n);
  for (std::size_t v = 0; v < m.size(); ++v)
    if (d.index[v] >= 0) {
      Mi[d.index[v]] = fm.M[v];
      ui[d.index[v]] = u[v];
    }
  int rejected = F.rejected;
  for (;;) {
    if (ds < 1e-12) {
      std::ostringstream os;
      os << "flow_step: step size underflow at s = " << F.s << ", |H| = " << F.H_inf
         << ", margin = " << F.S.margin() << ", steps = " << F.history.size();
      throw ConvergenceError(os.str());
    }
    SparseMatrix<double> A = ds * K;
    for (int i = 0; i < d.n; ++i) A.coeffRef(i, i) += Mi[i];
    const VectorXd x = spd_solve(A, Mi.cwiseProduct(ui) + ds * kb);
    VectorXd un = u;
    for (std::size_t v = 0; v < m.size(); ++v)
      if (d.index[v] >= 0) un[v] = x[d.index[v]];
    const Assembly An = surface::assemble(m, un, false);
    bool ok = std::isfinite(An.energy) && min_margin(m, un) > 0;
    double Hn = 0;
    if (ok) {
      Hn = interior_max(m, residual_curvature(m, An));
      ok = Hn <= inflation * F.H_inf + 1e-12;
    }
    if (!ok) {
      ds *= 0.5;
      ++rejected;
      continue;
    }
    FlowState G{SpacelikeGraph(F.S.mesh_ptr(), un), F.u0, F.s + ds, ds, Hn, rejected, F.history};
    FlowRecord rec{G.s, ds, Hn, (un - F.u0).lpNorm<Eigen::Infinity>(), G.S.margin(),
                   hull ? hull_margin(*hull, G.S) : 0.0};
    G.history.push_back(rec);
    return G;
  }
}

FlowResult flow_run(FlowState F, const SolveConfig& cfg, const hull::ConvexHull3* hull) {
  cfg.validate();
  FlowResult R{std::move(F), false, true, true, true, 0, -1e300, 1e300};
  FlowState& S = R.state;
  if (hull) R.min_hull_margin = hull_margin(*hull, S.S);
  for (int step = 0; step < cfg.max_steps && S.H_inf >= cfg.tol_H; ++step) {
    const double ds = std::min(S.ds, cfg.ds_max);
    S = flow_step(S, ds, cfg.inflation, hull);
    // grow after an accepted step taken at the proposed size
    S.ds = S.history.back().ds >= ds ? std::min(cfg.ds_max, ds * cfg.ds_growth) : S.history.back().ds;
  }
  R.converged = S.H_inf < cfg.tol_H;
  const std::size_t n = S.history.size();
  const std::size_t skip = static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(n)));
  for (std::size_t k = 0; k < n; ++k) {
    const FlowRecord& h = S.history[k];
    R.drift_excess = std::max(R.drift_excess, h.drift - std::sqrt(2.0 * h.s));
    if (h.drift > std::sqrt(2.0 * h.s) + 0.01) R.drift_bound = false;
    if (k >= skip) {
      R.h_bound_ratio = std::max(R.h_bound_ratio, h.s * h.H_inf * h.H_inf);
      if (h.H_inf * h.H_inf > 1.1 / h.s) R.h_bound = false;
    }
    if (hull) R.min_hull_margin = std::min(R.min_hull_margin, h.hull_margin);
  }
  if (hull) R.hull_ok = R.min_hull_margin >= -cfg.hull_tol;
  return R;
}

FlowResult flow_run(const BoundaryCurve& curve, const SolveConfig& cfg) {
  cfg.validate();
  if (curve.has_lightlike_segments()) {
    const hull::ConvexHull3 h = hull::convex_hull(curve);
    throw ValidationError("flow: boundary curve has lightlike segments; " + width_note(h));
  }
  const hull::ConvexHull3 hull = hull::convex_hull(curve);
  const std::size_t k = cfg.radii.size() - 1;
  const auto res = cfg.resolution(k);
  MeshPtr mesh = surface::make_mesh(cfg.radii[k], res[0], res[1]);
  std::optional<SpacelikeGraph> S0;
  try {
    S0 = initial_graph(hull, mesh, cfg.margin, cfg.sheet);
  } catch (const ValidationError&) {
    if (!cfg.sheet_fallback || cfg.sheet == DirichletSheet::mid) throw;
    S0 = initial_graph(hull, mesh, cfg.margin, DirichletSheet::mid);
  }
  return flow_run(flow_start(std::move(*S0), cfg.ds0), cfg, &hull);
}

NewtonResult newton_solve(SpacelikeGraph S0, const SolveConfig& cfg, const hull::ConvexHull3* hull) {
  const DiskMesh& m = S0.mesh();
  const DofMap d(m);
  const VectorXd M = surface::curvature_mass(m);
  NewtonResult R{std::move(S0), false, false, {}};
  VectorXd u = R.S.u();
  double step = 0;
  for (int it = 0;; ++it) {
    const Assembly A = surface::assemble(m, u, true);
    VectorXd g(d.n);
    double H = 0;
    for (std::size_t v = 0; v < m.size(); ++v)
      if (d.index[v] >= 0) {
        g[d.index[v]] = A.gradient[v];
        H = std::max(H, std::abs(A.gradient[v] / M[v]));
      }
    R.S = SpacelikeGraph(R.S.mesh_ptr(), u);
    R.history.push_back({it, H, A.energy, step, R.S.margin(), hull ? hull_margin(*hull, R.S) : 0.0});
    if (H < cfg.tol_H) {
      R.converged = true;
      return R;
    }
    bool stalled = it >= cfg.max_newton;
    if (!stalled) {
      const VectorXd dir = spd_solve(interior_block(A.hessian, d), -g);
      const double slope = g.dot(dir);
      step = 1.0;
      for (;; step *= 0.5) {
        if (step < cfg.min_step) {
          stalled = true;
          break;
        }
        VectorXd un = u;
        for (std::size_t v = 0; v < m.size(); ++v)
          if (d.index[v] >= 0) un[v] += step * dir[d.index[v]];
        if (!(min_margin(m, un) > 0)) continue;
        const Assembly B = surface::assemble(m, un, false);
        if (!std::isfinite(B.energy)) continue;
        bool accept = B.energy <= A.energy + cfg.armijo * step * slope;
        // near convergence energy differences drown in round-off; accept on
        // a residual decrease instead
        if (!accept && std::abs(B.energy - A.energy) <= 1e-12 * std::abs(A.energy)) {
          double Hn = 0;
          for (std::size_t v = 0; v < m.size(); ++v)
            if (d.index[v] >= 0) Hn = std::max(Hn, std::abs(B.gradient[v] / M[v]));
          accept = Hn < H;
        }
        if (accept) {
          u = un;
          break;
        }
      }
    }
    if (stalled) {
      if (!cfg.flow_fallback) return R;
      FlowResult fr = flow_run(flow_start(R.S, cfg.ds0), cfg, hull);
      R.used_flow = true;
      R.S = fr.state.S;
      u = R.S.u();
      if (!fr.converged) return R;
      const Assembly B = surface::assemble(m, u, false);
      R.history.push_back({it + 1, fr.state.H_inf, B.energy, 0.0, R.S.margin(),
                           hull ? hull_margin(*hull, R.S) : 0.0});
      R.converged = true;
      return R;
    }
  }
}

namespace {

// exhaustion on one Dirichlet sheet; fills out.radii, out.history and out.S
void exhaust(const hull::ConvexHull3& hull, const SolveConfig& cfg, DirichletSheet sheet, SolveResult& out) {
  out.sheet = sheet;
  out.radii.clear();
  out.history.clear();
  const double rc = cfg.compare_radius > 0 ? cfg.compare_radius : 0.5 * cfg.radii.front();
  std::optional<SpacelikeGraph> prev;
  out.converged = true;
  for (std::size_t k = 0; k < cfg.radii.size(); ++k) {
    const double r = cfg.radii[k];
    const auto res = cfg.resolution(k);
    MeshPtr mesh = surface::make_mesh(r, res[0], res[1]);
    const DiskMesh& m = *mesh;
    SpacelikeGraph S0 = initial_graph(hull, mesh, cfg.margin, sheet);
    if (prev) {
      // warm start inside the previous disk, cold start if that is not spacelike
      VectorXd u = S0.u();
      const double R_prev = std::tanh(0.5 * prev->mesh().radius);
      for (std::size_t v = 0; v < m.size(); ++v)
        if (!m.boundary(static_cast<int>(v)) && m.vertices[v].norm() < R_prev)
          u[v] = surface::interpolate(prev->mesh(), prev->u(), m.vertices[v]);
      try {
        S0 = SpacelikeGraph(mesh, slope_limit(m, u, cfg.margin, &hull));
      } catch (const ValidationError&) {
      }
    }
    NewtonResult nr = newton_solve(std::move(S0), cfg, &hull);
    for (NewtonRecord rec : nr.history) out.history.push_back(rec);
    RadiusReport rep;
    rep.r = r;
    rep.vertices = m.size();
    rep.h = m.h;
    rep.newton_iterations = static_cast<int>(nr.history.size()) - 1;
    rep.used_flow = nr.used_flow;
    rep.H_inf = nr.history.back().H_inf;
    rep.hull_margin = nr.history.back().hull_margin;
    if (prev) {
      double diff = 0;
      for (std::size_t v = 0; v < m.size(); ++v)
        if (lorentz::hyperbolic_radius(m.vertices[v]) <= rc)
          diff = std::max(diff, std::abs(nr.S.u()[v] - surface::interpolate(prev->mesh(), prev->u(), m.vertices[v])));
      rep.diff_previous = diff;
    }
    out.radii.push_back(rep);
    out.converged = out.converged && nr.converged;
    prev = nr.S;
  }
  out.S = prev;
}

}  // namespace

SolveResult solve_maximal(const BoundaryCurve& curve, const SolveConfig& cfg) {
  cfg.validate();
  const hull::ConvexHull3 hull = hull::convex_hull(curve);
  SolveResult out;
  if (!hull.planar()) {
    const hull::WidthReport w = hull::width(hull);
    out.width = w.width;
    out.width_warning = w.raw_width > half_pi - cfg.width_warning;
  }
  if (curve.has_lightlike_segments())
    throw ValidationError("solve: boundary curve has lightlike segments; " + width_note(hull));
  try {
    exhaust(hull, cfg, cfg.sheet, out);
  } catch (const ValidationError&) {
    if (!cfg.sheet_fallback || cfg.sheet == DirichletSheet::mid) throw;
    exhaust(hull, cfg, DirichletSheet::mid, out);
  }
  return out;
}

}  // namespace adsmax::solver
