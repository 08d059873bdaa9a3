#include "adsmax/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include "adsmax/angles.hpp"
#include "adsmax/constants.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/lorentz.hpp"

namespace adsmax::surface {

namespace {

using Eigen::Vector2d;
using Tri = std::array<int, 3>;

double cross2(const Vector2d& a, const Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Vector2d& a, const Vector2d& b, const Vector2d& c) {
  return cross2(b - a, c - a);
}

// > 0 when d lies inside the circumcircle of the counter-clockwise (a, b, c)
double incircle(const Vector2d& a, const Vector2d& b, const Vector2d& c, const Vector2d& d) {
  const Vector2d ad = a - d, bd = b - d, cd = c - d;
  return (ad.squaredNorm() * cross2(bd, cd) - bd.squaredNorm() * cross2(ad, cd) +
          cd.squaredNorm() * cross2(ad, bd));
}

using EdgeMap = std::unordered_map<std::uint64_t, int>;

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// sweep triangulation of points sorted by distance from the first one,
// which must be interior: every new point lies outside the current hull
std::vector<Tri> sweep_triangulation(const std::vector<Vector2d>& V, double tol) {
  std::vector<int> order(V.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return V[a].squaredNorm() < V[b].squaredNorm(); });
  // seed triangle: the two nearest points that are not collinear with the first
  std::size_t k = 2;
  while (k < order.size() && std::abs(orient(V[order[0]], V[order[1]], V[order[k]])) <= tol) ++k;
  if (k == order.size()) throw ValidationError("make_mesh: collinear points");
  std::rotate(order.begin() + 2, order.begin() + k, order.begin() + k + 1);
  std::vector<int> hull{order[0], order[1], order[2]};
  if (orient(V[hull[0]], V[hull[1]], V[hull[2]]) < 0) std::swap(hull[1], hull[2]);
  std::vector<Tri> T{{hull[0], hull[1], hull[2]}};

  for (std::size_t i = 3; i < order.size(); ++i) {
    const int p = order[i];
    const int n = static_cast<int>(hull.size());
    std::vector<char> vis(n);
    int any = -1;
    for (int e = 0; e < n; ++e) {
      vis[e] = orient(V[hull[e]], V[hull[(e + 1) % n]], V[p]) < -tol;
      if (vis[e] && any < 0) any = e;
    }
    if (any < 0) throw ValidationError("make_mesh: point inside the sweep hull");
    // visible edges form one circular run [first, last]
    int first = any, last = any;
    while (vis[(first + n - 1) % n] && (first + n - 1) % n != any) first = (first + n - 1) % n;
    while (vis[(last + 1) % n] && (last + 1) % n != first) last = (last + 1) % n;
    for (int e = first;; e = (e + 1) % n) {
      T.push_back({hull[(e + 1) % n], hull[e], p});
      if (e == last) break;
    }
    // replace the hull vertices strictly inside the run by p
    std::vector<int> next;
    next.reserve(n + 1);
    for (int j = (last + 1) % n;; j = (j + 1) % n) {
      next.push_back(hull[j]);
      if (j == first) break;
    }
    next.push_back(p);
    hull.swap(next);
  }
  return T;
}

// Lawson flips to the Delaunay triangulation
void delaunay_flips(const std::vector<Vector2d>& V, std::vector<Tri>& T) {
  EdgeMap E;
  E.reserve(4 * T.size());
  std::vector<std::pair<int, int>> stack;
  for (int t = 0; t < static_cast<int>(T.size()); ++t)
    for (int k = 0; k < 3; ++k) {
      E[edge_key(T[t][k], T[t][(k + 1) % 3])] = t;
      stack.emplace_back(T[t][k], T[t][(k + 1) % 3]);
    }
  auto third = [&](int t, int a, int b) {
    for (int v : T[t])
      if (v != a && v != b) return v;
    return -1;
  };
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    const auto i1 = E.find(edge_key(a, b)), i2 = E.find(edge_key(b, a));
    if (i1 == E.end() || i2 == E.end()) continue;
    const int t1 = i1->second, t2 = i2->second;
    const int c = third(t1, a, b), d = third(t2, a, b);
    const double s2 = (V[a] - V[b]).squaredNorm();
    if (incircle(V[a], V[b], V[c], V[d]) <= 1e-12 * s2 * s2) continue;
    if (orient(V[a], V[d], V[c]) <= 0 || orient(V[d], V[b], V[c]) <= 0) continue;
    E.erase(i1);
    E.erase(edge_key(b, a));
    T[t1] = {a, d, c};
    T[t2] = {d, b, c};
    for (int t : {t1, t2})
      for (int k = 0; k < 3; ++k) E[edge_key(T[t][k], T[t][(k + 1) % 3])] = t;
    stack.insert(stack.end(), {{a, d}, {d, b}, {b, c}, {c, a}});
  }
}

// triangular lattice points of spacing s strictly inside radius lim
std::vector<Vector2d> lattice_points(double s, double lim) {
  std::vector<Vector2d> out;
  const int J = static_cast<int>(lim / (s * half_sqrt3)) + 1;
  for (int j = -J; j <= J; ++j) {
    const double y = j * s * half_sqrt3;
    const double off = 0.5 * (j & 1);
    for (int i = -J - 1; i <= J + 1; ++i) {
      const Vector2d p((i + off) * s, y);
      if (p.norm() < lim) out.push_back(p);
    }
  }
  return out;
}

TriGeom triangle_geometry(const std::array<Vector2d, 3>& p) {
  TriGeom g;
  g.area = 0.5 * orient(p[0], p[1], p[2]);
  for (int k = 0; k < 3; ++k) {
    const Vector2d e = p[(k + 2) % 3] - p[(k + 1) % 3];
    g.grad.row(k) = Eigen::RowVector2d(-e.y(), e.x()) / (2.0 * g.area);
    g.qp[k] = 0.5 * (p[(k + 1) % 3] + p[(k + 2) % 3]);
    const double phi = lorentz::lapse(g.qp[k]);
    const double a = lorentz::conformal_factor(g.qp[k]);
    g.phi2[k] = phi * phi;
    g.a2[k] = a * a;
    g.c2[k] = (phi / a) * (phi / a);
  }
  return g;
}

}  // namespace

std::vector<bool> DiskMesh::interior_mask(int layers) const {
  std::vector<bool> m(size());
  for (std::size_t v = 0; v < size(); ++v) m[v] = depth[v] > layers;
  return m;
}

Eigen::Vector2d DiskMesh::gradient(const Eigen::VectorXd& f, int v) const {
  const auto& s = stencil[v];
  Eigen::VectorXd d(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) d[j] = f[s[j]] - f[v];
  return fit[v].topRows<2>() * d;
}

std::shared_ptr<const DiskMesh> make_mesh(double r, int n_rings, int n_angular) {
  if (!(r > 0) || !std::isfinite(r)) throw ValidationError("make_mesh: radius must be positive");
  if (n_rings < 2 || n_angular < 6) throw ValidationError("make_mesh: degenerate resolution");
  auto m = std::make_shared<DiskMesh>();
  m->radius = r;
  m->euclid_radius = std::tanh(0.5 * r);
  m->n_rings = n_rings;
  const int total = 1 + n_rings * n_angular;
  const double R = m->euclid_radius;

  // lattice spacing s with lattice points + boundary points (spacing ~ s) = total
  constexpr double gap = 0.55;
  auto excess = [&](double s) { return static_cast<double>(lattice_points(s, R - gap * s).size()) + two_pi * R / s - total; };
  double lo = 1e-6 * R, hi = R;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (excess(mid) > 0 ? lo : hi) = mid;
  }
  // lattice counts jump, so pick the nearby spacing whose boundary ring is
  // closest to spacing s
  double s = hi, best = 1e9;
  for (int k = -100; k <= 100; ++k) {
    const double sk = hi * (1.0 + 0.001 * k);
    const int nb = total - static_cast<int>(lattice_points(sk, R - gap * sk).size());
    const double dev = std::abs(nb * sk / (two_pi * R) - 1.0);
    if (nb >= 6 && dev < best) {
      best = dev;
      s = sk;
    }
  }
  if (best > 0.3) throw ValidationError("make_mesh: degenerate resolution");

  m->vertices = lattice_points(s, R - gap * s);
  // center first
  std::stable_sort(m->vertices.begin(), m->vertices.end(),
                   [](const Vector2d& a, const Vector2d& b) { return a.squaredNorm() < b.squaredNorm(); });
  const int n_lattice = static_cast<int>(m->vertices.size());
  const int n_boundary = total - n_lattice;
  if (n_lattice < 1 || n_boundary < 6) throw ValidationError("make_mesh: degenerate resolution");
  for (int j = 0; j < n_boundary; ++j) {
    const double a = two_pi * j / n_boundary;
    m->vertices.emplace_back(R * std::cos(a), R * std::sin(a));
  }
  const std::size_t N = m->vertices.size();
  m->triangles = sweep_triangulation(m->vertices, 1e-12 * s * s);
  delaunay_flips(m->vertices, m->triangles);

  std::vector<std::set<int>> nb(N);
  for (const Tri& t : m->triangles) {
    if (orient(m->vertices[t[0]], m->vertices[t[1]], m->vertices[t[2]]) <= 0)
      throw ValidationError("make_mesh: inverted triangle");
    for (int k = 0; k < 3; ++k) {
      nb[t[k]].insert(t[(k + 1) % 3]);
      nb[t[k]].insert(t[(k + 2) % 3]);
    }
  }
  m->depth.assign(N, -1);
  std::queue<int> bfs;
  for (std::size_t v = n_lattice; v < N; ++v) {
    m->depth[v] = 0;
    bfs.push(static_cast<int>(v));
  }
  while (!bfs.empty()) {
    const int v = bfs.front();
    bfs.pop();
    for (int w : nb[v])
      if (m->depth[w] < 0) {
        m->depth[w] = m->depth[v] + 1;
        bfs.push(w);
      }
  }
  m->neighbors.resize(N);
  m->stencil.resize(N);
  m->fit.resize(N);
  for (std::size_t v = 0; v < N; ++v) {
    m->neighbors[v].assign(nb[v].begin(), nb[v].end());
    std::set<int> s2(nb[v].begin(), nb[v].end());
    for (int w : nb[v]) s2.insert(nb[w].begin(), nb[w].end());
    s2.erase(static_cast<int>(v));
    m->stencil[v].assign(s2.begin(), s2.end());

    const auto& S = m->stencil[v];
    Eigen::MatrixXd A(S.size(), 5);
    double scale = 0;
    for (int w : S) scale = std::max(scale, (m->vertices[w] - m->vertices[v]).norm());
    Eigen::VectorXd W(S.size());
    for (std::size_t j = 0; j < S.size(); ++j) {
      const Vector2d d = (m->vertices[S[j]] - m->vertices[v]) / scale;
      A.row(j) << d.x(), d.y(), 0.5 * d.x() * d.x(), d.x() * d.y(), 0.5 * d.y() * d.y();
      W[j] = 1.0 / d.squaredNorm();
    }
    const Eigen::MatrixXd AtW = A.transpose() * W.asDiagonal();
    Eigen::MatrixXd F = (AtW * A).ldlt().solve(AtW);
    F.topRows<2>() /= scale;
    F.bottomRows<3>() /= scale * scale;
    m->fit[v] = F;
  }

  m->geom.reserve(m->triangles.size());
  for (const Tri& t : m->triangles) {
    m->geom.push_back(triangle_geometry({m->vertices[t[0]], m->vertices[t[1]], m->vertices[t[2]]}));
    for (int k = 0; k < 3; ++k)
      m->h = std::max(m->h, lorentz::hyperbolic_distance(m->vertices[t[k]], m->vertices[t[(k + 1) % 3]]));
  }

  m->grid_n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(m->triangles.size())) / 2));
  m->buckets.assign(static_cast<std::size_t>(m->grid_n) * m->grid_n, {});
  auto cell = [&](double x) {
    return std::clamp(static_cast<int>((x + R) / (2 * R) * m->grid_n), 0, m->grid_n - 1);
  };
  for (int t = 0; t < static_cast<int>(m->triangles.size()); ++t) {
    const auto& T = m->triangles[t];
    double x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9;
    for (int k : T) {
      x0 = std::min(x0, m->vertices[k].x());
      x1 = std::max(x1, m->vertices[k].x());
      y0 = std::min(y0, m->vertices[k].y());
      y1 = std::max(y1, m->vertices[k].y());
    }
    for (int i = cell(x0); i <= cell(x1); ++i)
      for (int j = cell(y0); j <= cell(y1); ++j) m->buckets[i * m->grid_n + j].push_back(t);
  }
  return m;
}

double min_angle_deg(const DiskMesh& m) {
  double best = 180.0;
  for (const Tri& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vector2d a = m.vertices[t[(k + 1) % 3]] - m.vertices[t[k]];
      const Vector2d b = m.vertices[t[(k + 2) % 3]] - m.vertices[t[k]];
      best = std::min(best, std::atan2(std::abs(cross2(a, b)), a.dot(b)) * 180.0 / pi);
    }
  }
  return best;
}

Location locate(const DiskMesh& m, const Eigen::Vector2d& y) {
  const double R = m.euclid_radius;
  if (std::abs(y.x()) > R || std::abs(y.y()) > R) return {};
  const int i = std::clamp(static_cast<int>((y.x() + R) / (2 * R) * m.grid_n), 0, m.grid_n - 1);
  const int j = std::clamp(static_cast<int>((y.y() + R) / (2 * R) * m.grid_n), 0, m.grid_n - 1);
  for (int t : m.buckets[i * m.grid_n + j]) {
    const auto& T = m.triangles[t];
    const Vector2d &a = m.vertices[T[0]], &b = m.vertices[T[1]], &c = m.vertices[T[2]];
    const double A = orient(a, b, c);
    const Eigen::Vector3d w(orient(y, b, c) / A, orient(a, y, c) / A, orient(a, b, y) / A);
    if (w.minCoeff() >= -1e-12) return {t, w};
  }
  return {};
}

double interpolate(const DiskMesh& m, const Eigen::VectorXd& f, const Eigen::Vector2d& y) {
  Location loc = locate(m, y);
  if (loc.tri < 0) {
    // outside: pull back onto the boundary circle along the ray
    const double n = y.norm();
    const Vector2d p = n > 0 ? Vector2d(y * (m.euclid_radius * (1 - 1e-13) / n)) : y;
    loc = locate(m, p);
    if (loc.tri < 0) {
      int best = 0;
      for (std::size_t v = 1; v < m.size(); ++v)
        if ((m.vertices[v] - p).norm() < (m.vertices[best] - p).norm()) best = static_cast<int>(v);
      return f[best];
    }
  }
  const auto& T = m.triangles[loc.tri];
  return loc.bary[0] * f[T[0]] + loc.bary[1] * f[T[1]] + loc.bary[2] * f[T[2]];
}

}  // namespace adsmax::surface
