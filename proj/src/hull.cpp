#include "adsmax/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

#include "adsmax/angles.hpp"
#include "adsmax/constants.hpp"
#include "adsmax/errors.hpp"
#include "adsmax/parallel.hpp"

namespace adsmax::hull {

using lorentz::inner;

const char* to_string(FacetLabel l) {
  switch (l) {
    case FacetLabel::past: return "past";
    case FacetLabel::future: return "future";
    case FacetLabel::vertical: return "vertical";
  }
  return "?";
}

namespace {

// Quickhull with conflict lists. Points that lie on the plane of a facet
// count as visible from it, so collinear runs (lightlike segments) never
// produce degenerate triangles.
class Quickhull {
 public:
  struct F {
    std::array<int, 3> v;
    std::array<int, 3> nbr;  // across edge (v[i], v[i+1])
    Eigen::Vector3d n;
    double d;
    std::vector<int> outside;
    bool alive = true;
    int mark = 0;
  };

  Quickhull(const std::vector<Eigen::Vector3d>& p, double eps) : p_(p), eps_(eps) {}

  // false when the points are coplanar
  bool run() {
    std::array<int, 4> s{};
    if (!initial(s)) return false;
    std::vector<int> rest;
    for (int i = 0; i < static_cast<int>(p_.size()); ++i)
      if (i != s[0] && i != s[1] && i != s[2] && i != s[3]) rest.push_back(i);
    std::vector<int> all(f_.size());
    for (std::size_t i = 0; i < f_.size(); ++i) all[i] = static_cast<int>(i);
    assign(rest, all);

    std::vector<int> work = all;
    while (!work.empty()) {
      const int fi = work.back();
      work.pop_back();
      if (!f_[fi].alive || f_[fi].outside.empty()) continue;
      const std::vector<int> created = add_point(fi);
      for (int c : created)
        if (!f_[c].outside.empty()) work.push_back(c);
    }
    return true;
  }

  std::vector<F> facets() const {
    std::vector<F> out;
    for (const F& f : f_)
      if (f.alive) out.push_back(f);
    return out;
  }

 private:
  double dist(const F& f, int i) const { return f.n.dot(p_[i]) - f.d; }

  int make(int a, int b, int c) {
    F f;
    f.v = {a, b, c};
    f.nbr = {-1, -1, -1};
    const Eigen::Vector3d n = (p_[b] - p_[a]).cross(p_[c] - p_[a]);
    f.n = n / n.norm();
    f.d = f.n.dot(p_[a]);
    f_.push_back(std::move(f));
    return static_cast<int>(f_.size()) - 1;
  }

  bool initial(std::array<int, 4>& s) {
    const int n = static_cast<int>(p_.size());
    // two points far apart along a coordinate axis
    int best_a = 0, best_b = 0;
    double best = -1;
    for (int ax = 0; ax < 3; ++ax) {
      int lo = 0, hi = 0;
      for (int i = 1; i < n; ++i) {
        if (p_[i][ax] < p_[lo][ax]) lo = i;
        if (p_[i][ax] > p_[hi][ax]) hi = i;
      }
      const double d = (p_[hi] - p_[lo]).norm();
      if (d > best) best = d, best_a = lo, best_b = hi;
    }
    if (best <= eps_) return false;
    const Eigen::Vector3d dir = (p_[best_b] - p_[best_a]).normalized();
    int c = -1;
    best = eps_;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d w = p_[i] - p_[best_a];
      const double d = (w - w.dot(dir) * dir).norm();
      if (d > best) best = d, c = i;
    }
    if (c < 0) return false;
    const Eigen::Vector3d nrm = (p_[best_b] - p_[best_a]).cross(p_[c] - p_[best_a]).normalized();
    int e = -1;
    best = 0;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(nrm.dot(p_[i] - p_[best_a]));
      if (d > best) best = d, e = i;
    }
    if (best <= 1e3 * eps_) return false;
    int a = best_a, b = best_b;
    if (nrm.dot(p_[e] - p_[a]) > 0) std::swap(a, b);
    s = {a, b, c, e};
    // base (a,b,c) faces away from e
    make(a, b, c);
    make(b, a, e);
    make(c, b, e);
    make(a, c, e);
    link_all();
    return true;
  }

  void link_all() {
    std::map<std::pair<int, int>, std::pair<int, int>> edge;
    for (int fi = 0; fi < static_cast<int>(f_.size()); ++fi)
      for (int i = 0; i < 3; ++i) edge[{f_[fi].v[i], f_[fi].v[(i + 1) % 3]}] = {fi, i};
    for (int fi = 0; fi < static_cast<int>(f_.size()); ++fi)
      for (int i = 0; i < 3; ++i) f_[fi].nbr[i] = edge.at({f_[fi].v[(i + 1) % 3], f_[fi].v[i]}).first;
  }

  void assign(const std::vector<int>& pts, const std::vector<int>& cand) {
    for (int i : pts) {
      for (int c : cand) {
        if (dist(f_[c], i) > eps_) {
          f_[c].outside.push_back(i);
          break;
        }
      }
    }
  }

  std::vector<int> add_point(int fi) {
    int eye = -1;
    double far = -1;
    for (int i : f_[fi].outside) {
      const double d = dist(f_[fi], i);
      if (d > far) far = d, eye = i;
    }
    ++stamp_;
    // visible region, coplanar facets included
    std::vector<int> visible{fi}, stack{fi};
    f_[fi].mark = stamp_;
    struct Horizon {
      int a, b, outside;
    };
    std::vector<Horizon> horizon;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      for (int i = 0; i < 3; ++i) {
        const int g = f_[cur].nbr[i];
        if (f_[g].mark == stamp_) continue;
        if (dist(f_[g], eye) > -eps_) {
          f_[g].mark = stamp_;
          visible.push_back(g);
          stack.push_back(g);
        }
      }
    }
    for (int cur : visible)
      for (int i = 0; i < 3; ++i) {
        const int g = f_[cur].nbr[i];
        if (f_[g].mark != stamp_) horizon.push_back({f_[cur].v[i], f_[cur].v[(i + 1) % 3], g});
      }

    std::vector<int> orphans;
    for (int cur : visible) {
      f_[cur].alive = false;
      for (int i : f_[cur].outside)
        if (i != eye) orphans.push_back(i);
      f_[cur].outside.clear();
    }

    std::unordered_map<int, int> starts, ends;
    std::vector<int> created;
    for (const Horizon& h : horizon) {
      const int nf = make(h.a, h.b, eye);
      created.push_back(nf);
      starts[h.a] = nf;
      ends[h.b] = nf;
      f_[nf].nbr[0] = h.outside;
      F& o = f_[h.outside];
      for (int i = 0; i < 3; ++i)
        if (o.v[i] == h.b && o.v[(i + 1) % 3] == h.a) o.nbr[i] = nf;
    }
    for (int nf : created) {
      F& f = f_[nf];
      // (b, eye) borders the facet starting at b; (eye, a) the one ending at a
      f.nbr[1] = starts.at(f.v[1]);
      f.nbr[2] = ends.at(f.v[0]);
    }
    assign(orphans, created);
    return created;
  }

  const std::vector<Eigen::Vector3d>& p_;
  double eps_;
  std::vector<F> f_;
  int stamp_ = 0;
};

double clamp1(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace

int ConvexHull3::count(FacetLabel l) const {
  return static_cast<int>(
      std::count_if(facets_.begin(), facets_.end(), [l](const Facet& f) { return f.label == l; }));
}

Vec22 ConvexHull3::vertex(int k) const {
  const double ta = shifted_.tau(k), th = shifted_.theta(k);
  const double c = std::cos(ta);
  return {std::cos(th) / c, std::sin(th) / c, 1.0, std::tan(ta)};
}

Eigen::Vector3d ConvexHull3::chart(const CylPoint& p) const {
  return lorentz::projective_chart(CylPoint{p.y, p.t + offset_});
}

double ConvexHull3::facet_height(const Facet& f, const Eigen::Vector3d& X) const {
  const double s = (X[0] * f.dual.x1 + X[1] * f.dual.x2) / X[2];
  return f.base + f.sigma * std::acos(clamp1(s / f.rho)) - offset_;
}

Heights ConvexHull3::heights(const Eigen::Vector2d& y) const {
  const Eigen::Vector3d X = lorentz::hyperboloid(y);
  if (planar_) {
    Facet f;
    f.dual = plane_dual_;
    f.rho = std::hypot(plane_dual_.x3, plane_dual_.x4);
    const double psi = std::atan2(plane_dual_.x4, plane_dual_.x3);
    // sheet through the chart: the one closest to t = 0
    const double s = (X[0] * f.dual.x1 + X[1] * f.dual.x2) / X[2];
    const double A = std::acos(clamp1(s / f.rho));
    const double t1 = wrap_pi(psi + A), t2 = wrap_pi(psi - A);
    const double t = (std::abs(t1) < std::abs(t2) ? t1 : t2) - offset_;
    return {t, t};
  }
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const Facet& f : facets_) {
    if (f.label == FacetLabel::vertical) continue;
    const double t = facet_height(f, X);
    if (f.label == FacetLabel::future)
      hi = std::min(hi, t);
    else
      lo = std::max(lo, t);
  }
  return {lo, hi};
}

void ConvexHull3::write_csv(std::ostream& os) const {
  os << "facet,v0,v1,v2,n1,n2,n3,c,label\n";
  os.precision(17);
  for (std::size_t i = 0; i < facets_.size(); ++i) {
    const Facet& f = facets_[i];
    os << i << ',' << f.v[0] << ',' << f.v[1] << ',' << f.v[2] << ',' << f.n[0] << ',' << f.n[1]
       << ',' << f.n[2] << ',' << f.c << ',' << to_string(f.label) << '\n';
  }
}

ConvexHull3 convex_hull(const BoundaryCurve& curve) {
  const std::size_t n = curve.size();
  if (n < 4) throw ValidationError("convex_hull: need at least 4 curve samples");
  ConvexHull3 h;
  h.curve_ = curve;
  const double tmin = curve.tau_min(), tmax = curve.tau_max();
  if (!(tmax - tmin < pi - 1e-9))
    throw ValidationError("convex_hull: curve does not fit in one projective chart");
  h.offset_ = -0.5 * (tmin + tmax);
  h.shifted_ = curve.time_shifted(h.offset_);
  h.points_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec22 v = h.vertex(static_cast<int>(k));
    h.points_[k] = Eigen::Vector3d(v.x1, v.x2, v.x4);
  }
  double scale = 0;
  for (const auto& p : h.points_) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  h.scale_ = scale;

  // planarity by the smallest singular value of the centered cloud
  Eigen::MatrixXd M(n, 3);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : h.points_) mean += p;
  mean /= static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) M.row(k) = (h.points_[k] - mean).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinV);
  const Eigen::Vector3d sv = svd.singularValues();
  auto set_planar = [&]() {
    h.planar_ = true;
    const Eigen::Vector3d nn = svd.matrixV().col(2);
    const double c = nn.dot(mean);
    Vec22 q{nn[0], nn[1], c, -nn[2]};
    const double qq = inner(q, q);
    if (!(qq < 0)) throw ValidationError("convex_hull: planar curve does not span a spacelike plane");
    h.plane_dual_ = q / std::sqrt(-qq);
  };
  if (sv[2] <= 1e-9 * sv[0]) {
    set_planar();
    return h;
  }

  Quickhull qh(h.points_, 1e-11 * std::max(1.0, scale));
  if (!qh.run()) {
    set_planar();
    return h;
  }
  for (const auto& qf : qh.facets()) {
    Facet f;
    f.v = qf.v;
    f.n = qf.n;
    f.c = qf.d;
    f.label = f.n[2] > tol::vertical_facet    ? FacetLabel::future
              : f.n[2] < -tol::vertical_facet ? FacetLabel::past
                                              : FacetLabel::vertical;
    Vec22 q{f.n[0], f.n[1], f.c, -f.n[2]};
    const double qq = inner(q, q);
    const double qn = q.euclidean_norm();
    if (qq > 1e-12 * qn * qn) {
      // timelike support plane: no height sheet
      f.label = FacetLabel::vertical;
      f.dual = q;
    } else {
      // lightlike supports (planes through lightlike segments) keep their
      // side and are scaled to unit Euclidean norm
      f.lightlike = qq > -1e-12 * qn * qn;
      q = f.lightlike ? q / qn : q / std::sqrt(-qq);
      f.dual = q;
      f.rho = std::hypot(q.x3, q.x4);
      const double psi = std::atan2(q.x4, q.x3);
      const Eigen::Vector3d zc = (h.points_[f.v[0]] + h.points_[f.v[1]] + h.points_[f.v[2]]) / 3.0;
      const CylPoint cc = lorentz::quadric_to_chart(lorentz::projective_lift(zc));
      const Eigen::Vector3d X = lorentz::hyperboloid(cc.y);
      const double A = std::acos(clamp1((X[0] * q.x1 + X[1] * q.x2) / X[2] / f.rho));
      const double e_plus = std::abs(wrap_pi(psi + A - cc.t));
      const double e_minus = std::abs(wrap_pi(psi - A - cc.t));
      f.sigma = e_plus <= e_minus ? 1.0 : -1.0;
      const double t0 = psi + f.sigma * A;
      f.base = psi + (cc.t + wrap_pi(t0 - cc.t) - t0);
    }
    h.facets_.push_back(f);
  }
  return h;
}

ContainResult contains(const ConvexHull3& hull, const QuadricPoint& p, double tol) {
  // lift to the sheet of the cover around the chart center
  return contains(hull, lorentz::quadric_to_chart(p, -hull.time_offset()), tol);
}

ContainResult contains(const ConvexHull3& hull, const CylPoint& p, double tol) {
  if (!(std::abs(p.t + hull.time_offset()) < half_pi))
    throw ValidationError("contains: point outside the projective chart");
  const Eigen::Vector3d z = hull.chart(p);
  if (hull.planar()) {
    const Vec22& q = hull.plane_dual();
    // Euclidean chart distance to the plane q1 z1 + q2 z2 - q4 z3 = q3
    const Eigen::Vector3d nn(q.x1, q.x2, -q.x4);
    const double m = -std::abs(nn.dot(z) - q.x3) / nn.norm();
    return {m >= -tol, m};
  }
  double m = std::numeric_limits<double>::infinity();
  for (const Facet& f : hull.facets()) m = std::min(m, f.c - f.n.dot(z));
  return {m >= -tol, m};
}

WidthReport width(const ConvexHull3& hull) {
  WidthReport rep;
  rep.planar = hull.planar();
  if (hull.planar()) return rep;

  // undirected edges of each cap
  auto edges_of = [&](FacetLabel l) {
    std::vector<std::array<int, 2>> e;
    for (const Facet& f : hull.facets()) {
      if (f.label != l) continue;
      for (int i = 0; i < 3; ++i) {
        int a = f.v[i], b = f.v[(i + 1) % 3];
        if (a > b) std::swap(a, b);
        e.push_back({a, b});
      }
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
  };
  const auto lower = edges_of(FacetLabel::past);
  const auto upper = edges_of(FacetLabel::future);
  if (lower.empty() || upper.empty()) throw ValidationError("width: empty past or future boundary");

  std::vector<Vec22> V(hull.points().size());
  for (std::size_t k = 0; k < V.size(); ++k) V[k] = hull.vertex(static_cast<int>(k));
  auto chord = [&](const std::array<int, 2>& e) {
    const double c = -inner(V[e[0]], V[e[1]]);
    const double s = V[e[0]].euclidean_norm() * V[e[1]].euclidean_norm();
    return c > 1e-12 * s ? c : 0.0;  // 0 marks a lightlike edge
  };
  std::vector<double> Cl(lower.size()), Cu(upper.size());
  for (std::size_t i = 0; i < lower.size(); ++i) Cl[i] = chord(lower[i]);
  for (std::size_t j = 0; j < upper.size(); ++j) Cu[j] = chord(upper[j]);

  struct Best {
    double cosd = 2.0;
    int j = -1;
  };
  std::vector<Best> best(lower.size());
  parallel_for(lower.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      if (Cl[i] == 0.0) continue;
      const Vec22 &a1 = V[lower[i][0]], &b1 = V[lower[i][1]];
      for (std::size_t j = 0; j < upper.size(); ++j) {
        if (Cu[j] == 0.0) continue;
        const Vec22 &a2 = V[upper[j][0]], &b2 = V[upper[j][1]];
        const double A11 = std::max(0.0, -inner(a1, a2)), A12 = std::max(0.0, -inner(a1, b2));
        const double A21 = std::max(0.0, -inner(b1, a2)), A22 = std::max(0.0, -inner(b1, b2));
        const double cd = (std::sqrt(A11 * A22) + std::sqrt(A12 * A21)) / std::sqrt(Cl[i] * Cu[j]);
        if (cd < best[i].cosd) best[i] = {cd, static_cast<int>(j)};
      }
    }
  });

  // optimal points on an edge pair; positive weights on each null endpoint
  auto optimal = [&](std::size_t i, int j, Vec22& x, Vec22& y) {
    const Vec22 &a1 = V[lower[i][0]], &b1 = V[lower[i][1]];
    const Vec22 &a2 = V[upper[j][0]], &b2 = V[upper[j][1]];
    const double tiny = 1e-300;
    const double A11 = std::max(tiny, -inner(a1, a2)), A12 = std::max(tiny, -inner(a1, b2));
    const double A21 = std::max(tiny, -inner(b1, a2)), A22 = std::max(tiny, -inner(b1, b2));
    const double w = std::clamp(-0.5 * std::log(A11 / A22), -30.0, 30.0);
    const double z = std::clamp(-0.5 * std::log(A12 / A21), -30.0, 30.0);
    const double a = 0.5 * (w + z), b = 0.5 * (w - z);
    x = std::exp(a) * a1 + std::exp(-a) * b1;
    y = std::exp(b) * a2 + std::exp(-b) * b2;
    x = x / std::sqrt(-inner(x, x));
    y = y / std::sqrt(-inner(y, y));
  };

  double best_cos = 2.0;
  std::size_t bi = 0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (best[i].j < 0) continue;
    const double cd = std::clamp(best[i].cosd, -1.0, 1.0);
    rep.table.push_back({lower[i], upper[best[i].j], std::acos(cd)});
    if (best[i].cosd < best_cos) {
      // time orientation: the upper point must lie in the future
      Vec22 x, y;
      optimal(i, best[i].j, x, y);
      const double tx = std::atan2(x.x4, x.x3), ty = std::atan2(y.x4, y.x3);
      if (ty + 1e-12 < tx) continue;
      best_cos = best[i].cosd;
      bi = i;
    }
  }
  if (best_cos > 1.0) return rep;  // no timelike pair
  rep.raw_width = std::acos(std::max(-1.0, best_cos));
  rep.width = std::min(rep.raw_width, half_pi);
  Vec22 x, y;
  optimal(bi, best[bi].j, x, y);
  // back to the input time coordinate
  const lorentz::Isometry3 back = lorentz::time_translation(-hull.time_offset());
  rep.lower_point = lorentz::apply_isometry(back, x);
  rep.upper_point = lorentz::apply_isometry(back, y);
  const double tx = std::atan2(x.x4, x.x3), ty = std::atan2(y.x4, y.x3);
  rep.lower_cyl = lorentz::quadric_to_chart(QuadricPoint(x));
  rep.lower_cyl.t = tx - hull.time_offset();
  rep.upper_cyl = lorentz::quadric_to_chart(QuadricPoint(y));
  rep.upper_cyl.t = ty - hull.time_offset();
  return rep;
}

Envelopes dod_envelopes(const BoundaryCurve& curve, const std::vector<Eigen::Vector2d>& points) {
  Envelopes env;
  env.touches = curve.has_lightlike_segments();
  const std::size_t n = points.size(), m = curve.size();
  env.lower.assign(n, 0.0);
  env.upper.assign(n, 0.0);
  std::vector<double> ct(m), st(m);
  for (std::size_t k = 0; k < m; ++k) {
    ct[k] = std::cos(curve.theta(k));
    st[k] = std::sin(curve.theta(k));
  }
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Eigen::Vector3d X = lorentz::hyperboloid(points[i]);
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < m; ++k) {
        const double a = std::acos(clamp1((X[0] * ct[k] + X[1] * st[k]) / X[2]));
        hi = std::min(hi, curve.tau(k) + a);
        lo = std::max(lo, curve.tau(k) - a);
      }
      env.lower[i] = lo;
      env.upper[i] = hi;
    }
  });
  return env;
}

double regularity_margin(const ConvexHull3& hull, const Envelopes& env,
                         const std::vector<Eigen::Vector2d>& points) {
  const std::size_t n = points.size();
  if (env.lower.size() != n) throw ValidationError("regularity_margin: envelope size mismatch");
  std::vector<Vec22> ys(n), xs(n);
  std::vector<double> tys(n), txs(n);
  for (std::size_t i = 0; i < n; ++i) {
    tys[i] = hull.heights(points[i]).lower;
    txs[i] = env.lower[i];
    ys[i] = lorentz::chart_to_quadric({points[i], tys[i]}).v();
    xs[i] = lorentz::chart_to_quadric({points[i], txs[i]}).v();
  }
  std::vector<double> best(n, 0.0);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double c_min = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (txs[j] >= tys[i]) continue;
        const double c = -inner(xs[j], ys[i]);
        // timelike pair inside one period
        if (c > -1.0 && c < c_min) c_min = c;
      }
      best[i] = std::acos(std::clamp(c_min, -1.0, 1.0));
    }
  });
  double eps = half_pi;
  for (double v : best) eps = std::min(eps, v);
  return eps;
}

}  // namespace adsmax::hull
