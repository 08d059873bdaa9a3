#include "adsmax/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adsmax/constants.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/lorentz.hpp"
#include "adsmax/parallel.hpp"

namespace adsmax::lagrangian {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> a) {
  if (a.empty()) return nan;
  std::nth_element(a.begin(), a.begin() + a.size() / 2, a.end());
  return a[a.size() / 2];
}

double cross2(const Vector2d& a, const Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

// principal square root of a symmetric positive definite matrix
Matrix2d spd_sqrt(const Matrix2d& g) {
  Eigen::SelfAdjointEigenSolver<Matrix2d> es(g);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// ratio of singular values of A between (R^2, g) and itself
double dilatation(const Matrix2d& A, const Matrix2d& g) {
  const Matrix2d s = spd_sqrt(g);
  const Eigen::JacobiSVD<Matrix2d> svd(s * A * s.inverse());
  const auto sv = svd.singularValues();
  return sv[0] / sv[1];
}

Eigen::VectorXd component(const std::vector<Matrix2d>& f, int i, int j) {
  Eigen::VectorXd c(f.size());
  for (std::size_t v = 0; v < f.size(); ++v) c[v] = f[v](i, j);
  return c;
}

double angle_of(const Vector2d& z) { return std::atan2(z.y(), z.x()); }

double circular_distance(double a, double b) { return std::abs(std::remainder(a - b, two_pi)); }

}  // namespace

Matrix2d complex_structure(const Matrix2d& I) {
  const double s = std::sqrt(I.determinant());
  Matrix2d J;
  J << I(0, 1), I(1, 1), -I(0, 0), -I(0, 1);
  return J / s;
}

MLMap extract_projections(const surface::SpacelikeGraph& S, const surface::ShapeData& sd, int layers) {
  const DiskMesh& m = S.mesh();
  const std::size_t n = m.size();
  MLMap ml;
  ml.mesh = S.mesh_ptr();
  ml.layers = layers;
  ml.phi_l.resize(n);
  ml.phi_r.resize(n);
  ml.jac_l.resize(n);
  ml.jac_r.resize(n);
  ml.dphi_s.resize(n);
  ml.dilatation.assign(n, nan);
  ml.valid = m.interior_mask(layers);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t v = b; v < e; ++v) {
      // tangent plane at x: dual point nu
      const lorentz::QuadricPoint x = S.point(static_cast<int>(v));
      const auto [to_l, to_r] = lorentz::leftright_to_P0(lorentz::SpacelikePlane{lorentz::QuadricPoint(sd.nu[v])});
      ml.phi_l[v] = lorentz::reference_plane_coords(lorentz::apply_isometry(to_l, x.v()));
      ml.phi_r[v] = lorentz::reference_plane_coords(lorentz::apply_isometry(to_r, x.v()));
    }
  });
  Eigen::VectorXd c[4] = {Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (std::size_t v = 0; v < n; ++v) {
    c[0][v] = ml.phi_l[v].x();
    c[1][v] = ml.phi_l[v].y();
    c[2][v] = ml.phi_r[v].x();
    c[3][v] = ml.phi_r[v].y();
  }
  for (std::size_t v = 0; v < n; ++v) {
    const int i = static_cast<int>(v);
    ml.jac_l[v].row(0) = m.gradient(c[0], i).transpose();
    ml.jac_l[v].row(1) = m.gradient(c[1], i).transpose();
    ml.jac_r[v].row(0) = m.gradient(c[2], i).transpose();
    ml.jac_r[v].row(1) = m.gradient(c[3], i).transpose();
    const Matrix2d JB = complex_structure(sd.I[v]) * sd.B[v];
    const Matrix2d E = Matrix2d::Identity();
    ml.dphi_s[v] = (E + JB).inverse() * (E - JB);
    if (std::abs(sd.B[v].determinant() + 1.0) < tol::degenerate_mu) {
      if (ml.valid[v]) ++ml.flat;
      ml.valid[v] = false;
    }
    if (ml.valid[v]) ml.dilatation[v] = dilatation(ml.dphi_s[v], sd.I[v]);
  }
  return ml;
}

MuMetrics mu_metrics(const surface::ShapeData& sd, double degenerate_tol) {
  const std::size_t n = sd.I.size();
  MuMetrics mu;
  mu.l.resize(n);
  mu.r.resize(n);
  mu.degenerate.assign(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    const Matrix2d JB = complex_structure(sd.I[v]) * sd.B[v];
    const Matrix2d P = Matrix2d::Identity() + JB, M = Matrix2d::Identity() - JB;
    mu.l[v] = P.transpose() * sd.I[v] * P;
    mu.r[v] = M.transpose() * sd.I[v] * M;
    if (std::abs(sd.B[v].determinant() + 1.0) < degenerate_tol) {
      mu.degenerate[v] = true;
      ++mu.degenerate_count;
    }
  }
  return mu;
}

double degenerate_threshold(const surface::ShapeData& sd, const std::vector<bool>& mask) {
  std::vector<double> t;
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v] && std::isfinite(sd.H[v])) t.push_back(std::abs(sd.H[v]));
  return tol::degenerate_mu + (t.empty() ? 0.0 : 4.0 * median(t));
}

Eigen::VectorXd metric_curvature(const DiskMesh& m, const std::vector<Matrix2d>& g) {
  const std::size_t n = m.size();
  Eigen::VectorXd defect = Eigen::VectorXd::Constant(n, two_pi), area = Eigen::VectorXd::Zero(n);
  for (const auto& T : m.triangles) {
    std::array<double, 3> L;  // opposite corner k
    for (int k = 0; k < 3; ++k) {
      const int a = T[(k + 1) % 3], b = T[(k + 2) % 3];
      const Vector2d d = m.vertices[b] - m.vertices[a];
      L[k] = std::sqrt(std::max(0.0, d.dot(0.5 * (g[a] + g[b]) * d)));
    }
    const double s = 0.5 * (L[0] + L[1] + L[2]);
    const double A = std::sqrt(std::max(0.0, s * (s - L[0]) * (s - L[1]) * (s - L[2])));
    for (int k = 0; k < 3; ++k) {
      const double a = L[k], b = L[(k + 1) % 3], c = L[(k + 2) % 3];
      defect[T[k]] -= std::acos(std::clamp((b * b + c * c - a * a) / (2 * b * c), -1.0, 1.0));
      area[T[k]] += A / 3.0;
    }
  }
  Eigen::VectorXd K = Eigen::VectorXd::Constant(n, nan);
  for (std::size_t i = 0; i < n; ++i) {
    if (m.boundary(static_cast<int>(i))) continue;
    double d = defect[i], a = area[i];
    bool ok = true;
    for (int j : m.neighbors[i]) {
      if (m.boundary(j)) {
        ok = false;
        break;
      }
      d += defect[j];
      a += area[j];
    }
    if (ok) K[i] = d / a;
  }
  return K;
}

PullbackReport pullback_consistency(const MLMap& ml, const std::vector<Vector2d>& phi,
                                    const std::vector<Matrix2d>& target) {
  const DiskMesh& m = *ml.mesh;
  std::vector<double> err;
  for (const auto& T : m.triangles) {
    if (!ml.valid[T[0]] || !ml.valid[T[1]] || !ml.valid[T[2]]) continue;
    Matrix2d dy, dz;
    dy.col(0) = m.vertices[T[1]] - m.vertices[T[0]];
    dy.col(1) = m.vertices[T[2]] - m.vertices[T[0]];
    dz.col(0) = phi[T[1]] - phi[T[0]];
    dz.col(1) = phi[T[2]] - phi[T[0]];
    const Matrix2d D = dz * dy.inverse();
    const double a = lorentz::conformal_factor((phi[T[0]] + phi[T[1]] + phi[T[2]]) / 3.0);
    const Matrix2d pull = a * a * D.transpose() * D;
    const Matrix2d g = (target[T[0]] + target[T[1]] + target[T[2]]) / 3.0;
    err.push_back((pull - g).norm() / g.norm());
  }
  PullbackReport r;
  r.triangles = static_cast<int>(err.size());
  if (!err.empty()) {
    r.max = *std::max_element(err.begin(), err.end());
    r.median = median(err);
  }
  return r;
}

PhiS phi_s(MLMap ml) {
  PhiS P;
  const DiskMesh& m = *ml.mesh;
  std::vector<double> dil, det;
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (!ml.valid[v]) continue;
    P.max_det_residual = std::max(P.max_det_residual, std::abs(ml.dphi_s[v].determinant() - 1.0));
    dil.push_back(ml.dilatation[v]);
  }
  if (!dil.empty()) {
    P.sup_dilatation = *std::max_element(dil.begin(), dil.end());
    P.median_dilatation = median(dil);
  }
  P.histogram.assign(11, 0);
  for (double d : dil) ++P.histogram[std::min<std::size_t>(10, static_cast<std::size_t>((d - 1.0) / 0.1))];
  for (const auto& T : m.triangles) {
    if (!ml.valid[T[0]] || !ml.valid[T[1]] || !ml.valid[T[2]]) continue;
    const double chart = cross2(m.vertices[T[1]] - m.vertices[T[0]], m.vertices[T[2]] - m.vertices[T[0]]);
    const double l = cross2(ml.phi_l[T[1]] - ml.phi_l[T[0]], ml.phi_l[T[2]] - ml.phi_l[T[0]]);
    const double r = cross2(ml.phi_r[T[1]] - ml.phi_r[T[0]], ml.phi_r[T[2]] - ml.phi_r[T[0]]);
    if (l * chart <= 0) ++P.flipped_l;
    if (r * chart <= 0) ++P.flipped_r;
  }
  P.ml = std::move(ml);
  return P;
}

std::optional<Vector2d> PhiS::operator()(const Vector2d& z) const {
  const DiskMesh& m = *ml.mesh;
  for (const auto& T : m.triangles) {
    if (!ml.valid[T[0]] || !ml.valid[T[1]] || !ml.valid[T[2]]) continue;
    const Vector2d a = ml.phi_l[T[0]], b = ml.phi_l[T[1]], c = ml.phi_l[T[2]];
    const double A = cross2(b - a, c - a);
    if (A == 0) continue;
    const double l1 = cross2(c - b, z - b) / A, l2 = cross2(a - c, z - c) / A, l3 = 1.0 - l1 - l2;
    const double eps = -1e-12;
    if (l1 >= eps && l2 >= eps && l3 >= eps) return l1 * ml.phi_r[T[0]] + l2 * ml.phi_r[T[1]] + l3 * ml.phi_r[T[2]];
  }
  return std::nullopt;
}

std::vector<TraceSample> PhiS::boundary_trace(const boundary::CircleHomeo& f, int samples) const {
  const DiskMesh& m = *ml.mesh;
  // outermost valid ring, ordered by the left angle
  struct Pt {
    double l, r, tol;
  };
  std::vector<Pt> ring;
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (!ml.valid[v] || m.depth[v] != ml.layers + 1) continue;
    // the image at hyperbolic radius rho determines its boundary point up to
    // the visual angle of a unit ball, 2 asin(sinh 1 / sinh rho)
    const double rho = std::min(lorentz::hyperbolic_radius(ml.phi_l[v]), lorentz::hyperbolic_radius(ml.phi_r[v]));
    const double tol = 2.0 * std::asin(std::min(1.0, std::sinh(1.0) / std::sinh(rho)));
    ring.push_back({angle_of(ml.phi_l[v]), angle_of(ml.phi_r[v]), tol});
  }
  if (ring.size() < 3) throw ValidationError("boundary_trace: no valid outer ring");
  std::sort(ring.begin(), ring.end(), [](const Pt& a, const Pt& b) { return a.l < b.l; });
  std::vector<TraceSample> out;
  for (int k = 0; k < samples; ++k) {
    const double xi = two_pi * k / samples;
    const double x = std::remainder(xi, two_pi);  // in [-pi, pi] like atan2
    std::size_t j = 0;
    while (j < ring.size() && ring[j].l < x) ++j;
    const Pt& a = ring[(j + ring.size() - 1) % ring.size()];
    const Pt& b = ring[j % ring.size()];
    const double span = std::remainder(b.l - a.l, two_pi);
    double w = span != 0 ? std::remainder(x - a.l, two_pi) / span : 0.0;
    w = std::clamp(w, 0.0, 1.0);
    const double measured = a.r + w * std::remainder(b.r - a.r, two_pi);
    TraceSample s;
    s.xi = xi;
    s.expected = f(xi);
    s.measured = std::fmod(measured + two_pi, two_pi);
    s.error = circular_distance(s.measured, s.expected);
    s.tol = std::max(a.tol, b.tol);
    out.push_back(s);
  }
  return out;
}

std::vector<Matrix2d> codazzi_field(const surface::ShapeData& sd) {
  std::vector<Matrix2d> b(sd.I.size());
  for (std::size_t v = 0; v < b.size(); ++v) {
    const Matrix2d JB = complex_structure(sd.I[v]) * sd.B[v];
    b[v] = (Matrix2d::Identity() - JB) * (Matrix2d::Identity() + JB).inverse();
  }
  return b;
}

MLResiduals ml_residuals(const DiskMesh& m, const std::vector<Matrix2d>& b, const std::vector<Matrix2d>& rho,
                         int layers) {
  const std::size_t n = m.size();
  if (b.size() != n || rho.size() != n) throw ValidationError("ml_residuals: field sizes do not match the mesh");
  for (std::size_t v = 0; v < n; ++v)
    if (std::abs(b[v].determinant() - 1.0) > 1e-6) throw ValidationError("ml_residuals: det b != 1");
  MLResiduals R;
  R.I.resize(n);
  R.B.resize(n);
  R.trace.resize(n);
  const Matrix2d E = Matrix2d::Identity();
  for (std::size_t v = 0; v < n; ++v) {
    R.I[v] = 0.25 * (E + b[v]).transpose() * rho[v] * (E + b[v]);
    const Matrix2d JB = (E + b[v]).inverse() * (E - b[v]);
    R.trace[v] = std::abs(JB.trace());
    // J of I squares to -E, so B = -J (JB)
    R.B[v] = -complex_structure(R.I[v]) * JB;
  }
  R.trace_max = R.trace.maxCoeff();

  // d^nabla b (d1, d2) = d1(b d2) - d2(b d1) + Gamma terms
  const std::vector<bool> mask = m.interior_mask(layers);
  Eigen::VectorXd g[2][2], bc[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      g[i][j] = component(rho, i, j);
      bc[i][j] = component(b, i, j);
    }
  R.codazzi = Eigen::VectorXd::Constant(n, nan);
  std::vector<double> cod;
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask[v]) continue;
    const int iv = static_cast<int>(v);
    double dg[2][2][2];  // dg[l][j][i] = d_i g_lj
    for (int l = 0; l < 2; ++l)
      for (int j = 0; j < 2; ++j) {
        const Vector2d d = m.gradient(g[l][j], iv);
        dg[l][j][0] = d.x();
        dg[l][j][1] = d.y();
      }
    const Matrix2d gi = rho[v].inverse();
    auto Gamma = [&](int k, int i, int j) {
      double s = 0;
      for (int l = 0; l < 2; ++l) s += 0.5 * gi(k, l) * (dg[l][j][i] + dg[l][i][j] - dg[i][j][l]);
      return s;
    };
    Vector2d w;
    for (int k = 0; k < 2; ++k) {
      double s = m.gradient(bc[k][1], iv).x() - m.gradient(bc[k][0], iv).y();
      for (int j = 0; j < 2; ++j) s += Gamma(k, 0, j) * b[v](j, 1) - Gamma(k, 1, j) * b[v](j, 0);
      w[k] = s;
    }
    R.codazzi[v] = std::sqrt(w.dot(rho[v] * w)) / std::sqrt(rho[v].determinant());
    cod.push_back(R.codazzi[v]);
  }
  R.codazzi_median = median(cod);

  const Eigen::VectorXd K = metric_curvature(m, R.I);
  R.gauss = Eigen::VectorXd::Constant(n, nan);
  std::vector<double> gs;
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask[v] || !std::isfinite(K[v])) continue;
    R.gauss[v] = K[v] + 4.0 / (2.0 + b[v].trace());
    gs.push_back(std::abs(R.gauss[v]));
  }
  R.gauss_median = median(gs);
  return R;
}

}  // namespace adsmax::lagrangian
