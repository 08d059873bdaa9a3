#include "adsmax/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "adsmax/angles.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/parallel.hpp"

namespace adsmax::surface {

namespace {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using lorentz::inner;

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double c2_at(const Vector2d& y) {
  const double s = 0.5 * (1.0 + y.squaredNorm());
  return s * s;
}

Vector2d tri_gradient(const DiskMesh& m, int t, const Eigen::VectorXd& u) {
  const auto& T = m.triangles[t];
  const TriGeom& g = m.geom[t];
  return (u[T[0]] * g.grad.row(0) + u[T[1]] * g.grad.row(1) + u[T[2]] * g.grad.row(2)).transpose();
}

// point, tangent frame and future unit normal of the graph at a vertex
struct Frame {
  Vec22 x, e1, e2, nu, T;
};

Frame vertex_frame(const Vector2d& y, double u, const Vector2d& g) {
  const double r2 = y.squaredNorm(), D = 1.0 - r2;
  const Eigen::Vector3d X = lorentz::hyperboloid(y);
  const double c = std::cos(u), s = std::sin(u);
  Frame f;
  f.x = {X[0], X[1], X[2] * c, X[2] * s};
  const Vec22 dt{0.0, 0.0, -X[2] * s, X[2] * c};
  f.T = dt / X[2];
  const double D2 = D * D;
  const Vec22 d1{2.0 / D + 4.0 * y.x() * y.x() / D2, 4.0 * y.x() * y.y() / D2, 4.0 * y.x() / D2 * c,
                 4.0 * y.x() / D2 * s};
  const Vec22 d2{4.0 * y.x() * y.y() / D2, 2.0 / D + 4.0 * y.y() * y.y() / D2, 4.0 * y.y() / D2 * c,
                 4.0 * y.y() / D2 * s};
  f.e1 = d1 + g.x() * dt;
  f.e2 = d2 + g.y() * dt;
  // Lorentz-orthogonal complement of (x, e1, e2)
  Eigen::Matrix<double, 3, 4> M;
  const Eigen::Vector4d eta(1, 1, -1, -1);
  M.row(0) = f.x.eigen().cwiseProduct(eta).transpose();
  M.row(1) = f.e1.eigen().cwiseProduct(eta).transpose();
  M.row(2) = f.e2.eigen().cwiseProduct(eta).transpose();
  Eigen::Vector4d n;
  for (int j = 0; j < 4; ++j) {
    Eigen::Matrix3d minor;
    for (int k = 0, col = 0; k < 4; ++k)
      if (k != j) minor.col(col++) = M.col(k);
    n[j] = ((j % 2) ? -1.0 : 1.0) * minor.determinant();
  }
  Vec22 nu = Vec22::from_eigen(n);
  const double nn = inner(nu, nu);
  if (!(nn < 0)) throw ValidationError("shape_data: tangent plane is not spacelike");
  nu = nu / std::sqrt(-nn);
  if (inner(nu, f.T) > 0) nu = -nu;
  f.nu = nu;
  return f;
}

// Euclidean triangle data from Lorentzian chord lengths of the graph
struct ChordTri {
  double area;
  std::array<double, 3> angle, cot;  // at each corner
};

ChordTri chord_triangle(const Vec22& a, const Vec22& b, const Vec22& c) {
  auto len = [](const Vec22& p, const Vec22& q) { return std::acosh(std::max(1.0, -inner(p, q))); };
  const std::array<Vec22, 3> P{a, b, c};
  std::array<double, 3> L;  // L[k] opposite corner k
  for (int k = 0; k < 3; ++k) L[k] = len(P[(k + 1) % 3], P[(k + 2) % 3]);
  const double s = 0.5 * (L[0] + L[1] + L[2]);
  ChordTri t;
  t.area = std::sqrt(std::max(0.0, s * (s - L[0]) * (s - L[1]) * (s - L[2])));
  for (int k = 0; k < 3; ++k) {
    const double A = L[k], B = L[(k + 1) % 3], C = L[(k + 2) % 3];
    const double cosk = std::clamp((B * B + C * C - A * A) / (2 * B * C), -1.0, 1.0);
    t.angle[k] = std::acos(cosk);
    t.cot[k] = (B * B + C * C - A * A) / (4.0 * t.area);
  }
  return t;
}

std::vector<Vec22> graph_points(const SpacelikeGraph& S) {
  std::vector<Vec22> x(S.mesh().size());
  for (std::size_t v = 0; v < x.size(); ++v) x[v] = S.point(static_cast<int>(v)).v();
  return x;
}

}  // namespace

std::vector<double> triangle_margins(const DiskMesh& m, const Eigen::VectorXd& u) {
  std::vector<double> out(m.triangles.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const auto& c2 = m.geom[t].c2;
    const double c = std::max({c2[0], c2[1], c2[2]});
    out[t] = 1.0 - c * tri_gradient(m, static_cast<int>(t), u).squaredNorm();
  }
  return out;
}

SpacelikeGraph::SpacelikeGraph(MeshPtr mesh, Eigen::VectorXd u) : mesh_(std::move(mesh)), u_(std::move(u)) {
  if (!mesh_) throw ValidationError("SpacelikeGraph: null mesh");
  if (u_.size() != static_cast<Eigen::Index>(mesh_->size()))
    throw ValidationError("SpacelikeGraph: height vector size mismatch");
  if (!u_.allFinite()) throw ValidationError("SpacelikeGraph: non-finite heights");
  const auto mg = triangle_margins(*mesh_, u_);
  margin_ = *std::min_element(mg.begin(), mg.end());
  if (!(margin_ > 0)) throw ValidationError("SpacelikeGraph: spacelike margin violated");
}

lorentz::QuadricPoint SpacelikeGraph::point(int v) const {
  return lorentz::chart_to_quadric({mesh_->vertices[v], u_[v]});
}

Assembly assemble(const DiskMesh& m, const Eigen::VectorXd& u, bool with_hessian) {
  const std::size_t nt = m.triangles.size();
  struct Local {
    double e = 0;
    bool ok = true;
    Eigen::Vector3d g = Eigen::Vector3d::Zero();
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  };
  std::vector<Local> loc(nt);
  parallel_for(nt, [&](std::size_t b, std::size_t e) {
    for (std::size_t t = b; t < e; ++t) {
      const TriGeom& G = m.geom[t];
      const Vector2d Du = tri_gradient(m, static_cast<int>(t), u);
      const Eigen::Vector3d dd = G.grad * Du;  // Du . grad psi_k
      const double du2 = Du.squaredNorm();
      const double w = G.area / 3.0;
      Local& L = loc[t];
      for (int q = 0; q < 3; ++q) {
        const double s = 1.0 - G.c2[q] * du2;
        if (!(s > 0)) {
          L.ok = false;
          break;
        }
        const double sq = std::sqrt(s), v = 1.0 / sq;
        L.e -= w * G.a2[q] * sq;
        L.g += (w * G.phi2[q] * v) * dd;
        if (with_hessian)
          L.h += w * G.phi2[q] * (v * G.grad * G.grad.transpose() + v * v * v * G.c2[q] * dd * dd.transpose());
      }
    }
  });
  Assembly A;
  A.gradient = Eigen::VectorXd::Zero(m.size());
  std::vector<Eigen::Triplet<double>> trip;
  if (with_hessian) trip.reserve(9 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const Local& L = loc[t];
    if (!L.ok) {
      A.energy = std::numeric_limits<double>::infinity();
      return A;
    }
    A.energy += L.e;
    const auto& T = m.triangles[t];
    for (int i = 0; i < 3; ++i) {
      A.gradient[T[i]] += L.g[i];
      if (with_hessian)
        for (int j = 0; j < 3; ++j) trip.emplace_back(T[i], T[j], L.h(i, j));
    }
  }
  if (with_hessian) {
    A.hessian.resize(m.size(), m.size());
    A.hessian.setFromTriplets(trip.begin(), trip.end());
  }
  return A;
}

Eigen::VectorXd curvature_mass(const DiskMesh& m) {
  Eigen::VectorXd M = Eigen::VectorXd::Zero(m.size());
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const TriGeom& G = m.geom[t];
    const auto& T = m.triangles[t];
    for (int q = 0; q < 3; ++q) {
      const double f = std::sqrt(G.phi2[q]) * G.a2[q] * G.area / 3.0;
      // basis values at the midpoint opposite corner q: 0 at q, 1/2 elsewhere
      M[T[(q + 1) % 3]] += 0.5 * f;
      M[T[(q + 2) % 3]] += 0.5 * f;
    }
  }
  return M;
}

Eigen::VectorXd gradient_function(const SpacelikeGraph& S) {
  const DiskMesh& m = S.mesh();
  Eigen::VectorXd v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Vector2d g = m.gradient(S.u(), static_cast<int>(i));
    const double s = 1.0 - c2_at(m.vertices[i]) * g.squaredNorm();
    if (!(s > 0)) throw ValidationError("gradient_function: spacelike margin violated");
    v[i] = 1.0 / std::sqrt(s);
  }
  return v;
}

Eigen::VectorXd mean_curvature(const SpacelikeGraph& S) {
  const DiskMesh& m = S.mesh();
  const Assembly A = assemble(m, S.u(), false);
  if (!std::isfinite(A.energy)) throw ValidationError("mean_curvature: spacelike margin violated");
  const Eigen::VectorXd M = curvature_mass(m);
  Eigen::VectorXd H(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) H[i] = m.boundary(static_cast<int>(i)) ? 0.0 : -A.gradient[i] / M[i];
  return H;
}

ShapeData shape_data(const SpacelikeGraph& S) {
  const DiskMesh& m = S.mesh();
  const std::size_t n = m.size();
  ShapeData sd;
  sd.nu.resize(n);
  sd.v.resize(n);
  sd.I.resize(n);
  sd.B.resize(n);
  sd.H.resize(n);
  sd.k1.resize(n);
  sd.k2.resize(n);
  sd.K.resize(n);
  sd.K_intrinsic = Eigen::VectorXd::Constant(n, nan);

  std::vector<Frame> F(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const int v = static_cast<int>(i);
      F[i] = vertex_frame(m.vertices[i], S.u()[v], m.gradient(S.u(), v));
    }
  });
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& st = m.stencil[i];
      Eigen::MatrixXd dn(st.size(), 4);
      for (std::size_t j = 0; j < st.size(); ++j) dn.row(j) = (F[st[j]].nu - F[i].nu).eigen().transpose();
      const Eigen::Matrix<double, 2, 4> Dnu = m.fit[i].topRows<2>() * dn;
      const Vec22 n1 = Vec22::from_eigen(Dnu.row(0).transpose());
      const Vec22 n2 = Vec22::from_eigen(Dnu.row(1).transpose());
      Matrix2d I, II;
      I << inner(F[i].e1, F[i].e1), inner(F[i].e1, F[i].e2), inner(F[i].e2, F[i].e1), inner(F[i].e2, F[i].e2);
      II << inner(F[i].e1, n1), inner(F[i].e1, n2), inner(F[i].e2, n1), inner(F[i].e2, n2);
      II = 0.5 * (II + II.transpose()).eval();
      const Matrix2d B = I.inverse() * II;
      sd.nu[i] = F[i].nu;
      sd.v[i] = -inner(F[i].nu, F[i].T);
      sd.I[i] = I;
      sd.B[i] = B;
      sd.H[i] = B.trace();
      Eigen::GeneralizedSelfAdjointEigenSolver<Matrix2d> es(II, I);
      sd.k1[i] = es.eigenvalues()[1];
      sd.k2[i] = es.eigenvalues()[0];
      sd.K[i] = -1.0 - B.determinant();
    }
  });

  // angle defect with Lorentzian chord lengths, averaged over the closed 1-ring
  const std::vector<Vec22> x = graph_points(S);
  Eigen::VectorXd defect = Eigen::VectorXd::Constant(n, two_pi), area = Eigen::VectorXd::Zero(n);
  for (const auto& T : m.triangles) {
    const ChordTri c = chord_triangle(x[T[0]], x[T[1]], x[T[2]]);
    for (int k = 0; k < 3; ++k) {
      defect[T[k]] -= c.angle[k];
      area[T[k]] += c.area / 3.0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m.boundary(static_cast<int>(i))) continue;
    bool ok = true;
    double d = defect[i], a = area[i];
    for (int j : m.neighbors[i]) {
      if (m.boundary(j)) {
        ok = false;
        break;
      }
      d += defect[j];
      a += area[j];
    }
    if (ok) sd.K_intrinsic[i] = d / a;
  }
  return sd;
}

Eigen::VectorXd laplace_beltrami(const SpacelikeGraph& S, const Eigen::VectorXd& f) {
  const DiskMesh& m = S.mesh();
  const std::vector<Vec22> x = graph_points(S);
  Eigen::VectorXd L = Eigen::VectorXd::Zero(m.size()), area = Eigen::VectorXd::Zero(m.size());
  for (const auto& T : m.triangles) {
    const ChordTri c = chord_triangle(x[T[0]], x[T[1]], x[T[2]]);
    for (int k = 0; k < 3; ++k) {
      const int i = T[(k + 1) % 3], j = T[(k + 2) % 3];  // edge opposite corner k
      const double w = 0.5 * c.cot[k];
      L[i] += w * (f[j] - f[i]);
      L[j] += w * (f[i] - f[j]);
      area[T[k]] += c.area / 3.0;
    }
  }
  for (std::size_t i = 0; i < m.size(); ++i) L[i] = m.boundary(static_cast<int>(i)) ? 0.0 : L[i] / area[i];
  return L;
}

ChiResidual chi_residual(const SpacelikeGraph& S, const ShapeData& sd) {
  const DiskMesh& m = S.mesh();
  const std::size_t n = m.size();
  ChiResidual out;
  out.chi = Eigen::VectorXd::Zero(n);
  out.residual = Eigen::VectorXd::Constant(n, nan);
  out.valid.assign(n, false);
  std::vector<bool> flat(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sd.B[i].determinant();
    flat[i] = !(d < -tol::flat_chi);
    if (!flat[i]) out.chi[i] = 0.25 * std::log(-d);
  }
  const Eigen::VectorXd L = laplace_beltrami(S, out.chi);
  for (std::size_t i = 0; i < n; ++i) {
    if (flat[i] || m.boundary(static_cast<int>(i))) continue;
    bool ok = true;
    for (int j : m.neighbors[i]) ok = ok && !flat[j];
    if (!ok) continue;
    out.valid[i] = true;
    out.residual[i] = L[i] - (std::exp(4.0 * out.chi[i]) - 1.0);
  }
  return out;
}

double equidistant_curvature(double k, double r) { return std::tan(std::atan(k) - r); }

Equidistant equidistant(const SpacelikeGraph& S, double r) {
  if (!(std::abs(r) < quarter_pi)) throw ValidationError("equidistant: |r| must be below pi/4");
  const DiskMesh& m = S.mesh();
  const std::size_t n = m.size();
  const ShapeData sd = shape_data(S);
  const auto inner_mask = m.interior_mask(2);
  for (std::size_t i = 0; i < n; ++i) {
    if (!inner_mask[i]) continue;
    if (!(std::abs(sd.k1[i]) < 1.0 && std::abs(sd.k2[i]) < 1.0))
      throw ValidationError("equidistant: principal curvatures outside (-1, 1)");
    for (double k : {sd.k1[i], sd.k2[i]})
      if (!(std::cos(r) + k * std::sin(r) > 0)) throw ValidationError("equidistant: focal point crossed");
  }
  std::vector<Vector2d> y(n);
  Eigen::VectorXd t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const lorentz::QuadricPoint q = lorentz::geodesic_exp(S.point(static_cast<int>(i)), sd.nu[i], r);
    const lorentz::CylPoint c = lorentz::quadric_to_chart(q, S.u()[static_cast<Eigen::Index>(i)]);
    y[i] = c.y;
    t[i] = c.t;
  }
  // resample on the original vertices by locating them in the moved mesh
  Eigen::VectorXd u(n);
  std::vector<bool> covered(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector2d& p = m.vertices[i];
    int best_t = -1;
    double best_w = -1e300;
    Eigen::Vector3d best_b = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < m.triangles.size(); ++k) {
      const auto& T = m.triangles[k];
      const Vector2d &a = y[T[0]], &b = y[T[1]], &c = y[T[2]];
      const double A = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
      if (!(A > 0)) continue;
      auto o = [](const Vector2d& P, const Vector2d& Q, const Vector2d& R) {
        return (Q - P).x() * (R - P).y() - (Q - P).y() * (R - P).x();
      };
      const Eigen::Vector3d w(o(p, b, c) / A, o(a, p, c) / A, o(a, b, p) / A);
      if (w.minCoeff() > best_w) {
        best_w = w.minCoeff();
        best_t = static_cast<int>(k);
        best_b = w;
        if (best_w >= -1e-12) break;
      }
    }
    const auto& T = m.triangles[best_t];
    u[i] = best_b[0] * t[T[0]] + best_b[1] * t[T[1]] + best_b[2] * t[T[2]];
    covered[i] = best_w >= -1e-12;
  }
  return {SpacelikeGraph(S.mesh_ptr(), u), covered};
}

SpacelikeGraph plane_surface(MeshPtr mesh, const lorentz::SpacelikePlane& P) {
  const Vec22& q = P.dual.v();
  const double rho = std::hypot(q.x3, q.x4), psi = std::atan2(q.x4, q.x3);
  // sheet with the smallest |t| at the center
  const double sigma = std::abs(wrap_pi(psi + half_pi)) <= std::abs(wrap_pi(psi - half_pi)) ? 1.0 : -1.0;
  const double base = wrap_pi(psi + sigma * half_pi) - sigma * half_pi;
  Eigen::VectorXd u(mesh->size());
  for (std::size_t i = 0; i < mesh->size(); ++i) {
    const Eigen::Vector3d X = lorentz::hyperboloid(mesh->vertices[i]);
    const double s = (X[0] * q.x1 + X[1] * q.x2) / X[2];
    u[i] = base + sigma * std::acos(std::clamp(s / rho, -1.0, 1.0));
  }
  return SpacelikeGraph(std::move(mesh), u);
}

SpacelikeGraph horosphere_surface(MeshPtr mesh, double psi, double c) {
  Eigen::VectorXd u(mesh->size());
  const double cp = std::cos(psi), sp = std::sin(psi);
  for (std::size_t i = 0; i < mesh->size(); ++i) {
    const Vector2d& y = mesh->vertices[i];
    const Vector2d z(cp * y.x() + sp * y.y(), -sp * y.x() + cp * y.y());
    const Eigen::Vector3d X = lorentz::hyperboloid(z);
    const double s = std::asinh(std::sqrt(2.0) * X[0]), w = std::asinh(std::sqrt(2.0) * X[1]);
    u[i] = std::atan2(std::cosh(w), std::cosh(s)) + c;
  }
  return SpacelikeGraph(std::move(mesh), u);
}

double horosphere_boundary_tau(double theta, double psi, double c) {
  const double a = theta - psi;
  return std::atan2(std::abs(std::sin(a)), std::abs(std::cos(a))) + c;
}

void write_csv(std::ostream& os, const SpacelikeGraph& S, const ShapeData& sd) {
  os << "y1,y2,t,u,v,H,K,k1,k2\n";
  os.precision(17);
  const DiskMesh& m = S.mesh();
  for (std::size_t i = 0; i < m.size(); ++i)
    os << m.vertices[i].x() << ',' << m.vertices[i].y() << ',' << S.u()[i] << ',' << S.u()[i] << ','
       << sd.v[i] << ',' << sd.H[i] << ',' << sd.K[i] << ',' << sd.k1[i] << ',' << sd.k2[i] << '\n';
}

void write_obj(std::ostream& os, const SpacelikeGraph& S) {
  const DiskMesh& m = S.mesh();
  os.precision(17);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Eigen::Vector3d z = lorentz::projective_chart(lorentz::CylPoint{m.vertices[i], S.u()[i]});
    os << "v " << z.x() << ' ' << z.y() << ' ' << z.z() << '\n';
  }
  for (const auto& T : m.triangles) os << "f " << T[0] + 1 << ' ' << T[1] + 1 << ' ' << T[2] + 1 << '\n';
}

}  // namespace adsmax::surface
