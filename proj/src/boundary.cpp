#include "adsmax/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "adsmax/angles.hpp"
#include "adsmax/errors.hpp"

namespace adsmax::boundary {

namespace {

// lift of a circle map given mod 2pi, anchored at 0 and pi so that the
// branch choice never happens near a reference point
std::function<double(double)> lift_of(std::function<double(double)> f) {
  const double f0 = f(0.0);
  const double fpi = f0 + wrap_2pi(f(pi) - f0);
  return [f = std::move(f), f0, fpi](double a) {
    if (a < pi) return f0 + wrap_2pi(f(a) - f0);
    return fpi + wrap_2pi(f(a) - fpi);
  };
}

std::vector<double> uniform_knots(int n) {
  std::vector<double> a(n);
  for (int k = 0; k < n; ++k) a[k] = two_pi * k / n;
  return a;
}

// alpha positions at equal arclength along the graph of a lift over [0, 2pi)
std::vector<double> arclength_knots(const std::function<double(double)>& F, int n) {
  const int m = 32 * n;
  std::vector<double> s(m + 1, 0.0);
  double prev = F(0.0);
  for (int k = 1; k <= m; ++k) {
    const double a = two_pi * k / m;
    const double cur = k == m ? F(0.0) + two_pi : F(a);
    s[k] = s[k - 1] + std::hypot(two_pi / m, cur - prev);
    prev = cur;
  }
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) {
    const double target = s[m] * j / n;
    const auto it = std::upper_bound(s.begin(), s.end(), target);
    const int k = std::clamp(static_cast<int>(it - s.begin()) - 1, 0, m - 1);
    const double w = (target - s[k]) / (s[k + 1] - s[k]);
    out[j] = two_pi * (k + w) / m;
  }
  return out;
}

constexpr double kMinGap = 1e-3;

double circle_gap(double a, double b) { return std::abs(wrap_pi(a - b)); }

}  // namespace

CircleHomeo CircleHomeo::from_knots(const std::vector<double>& alpha, const std::vector<double>& f) {
  const std::size_t n = alpha.size();
  if (n < 3 || f.size() != n) throw ValidationError("CircleHomeo: need >= 3 knot pairs");
  CircleHomeo h;
  h.alpha_ = alpha;
  h.lift_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(alpha[k]) || !std::isfinite(f[k]))
      throw ValidationError("CircleHomeo: non-finite knot");
    if (alpha[k] < 0 || alpha[k] >= two_pi)
      throw ValidationError("CircleHomeo: knot angle outside [0, 2pi)");
    if (k > 0 && !(alpha[k] > alpha[k - 1]))
      throw ValidationError("CircleHomeo: knot angles must increase");
  }
  h.lift_[0] = wrap_2pi(f[0]);
  for (std::size_t k = 1; k < n; ++k) {
    const double step = wrap_2pi(f[k] - h.lift_[k - 1]);
    if (step == 0.0) throw ValidationError("CircleHomeo: knot values not strictly monotone");
    h.lift_[k] = h.lift_[k - 1] + step;
  }
  if (!(h.lift_[n - 1] < h.lift_[0] + two_pi))
    throw ValidationError("CircleHomeo: knot values not monotone of degree 1");
  h.build_slopes();
  return h;
}

CircleHomeo CircleHomeo::from_lift(std::function<double(double)> lift,
                                   const std::vector<double>& knot_alpha, std::string name) {
  std::vector<double> vals(knot_alpha.size());
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = lift(knot_alpha[k]);
  CircleHomeo h = from_knots(knot_alpha, vals);
  h.lift_ = vals;
  h.build_slopes();
  h.exact_ = std::move(lift);
  h.name_ = std::move(name);
  return h;
}

CircleHomeo CircleHomeo::from_function(std::function<double(double)> f, int n_knots,
                                       std::string name) {
  if (n_knots < 3) throw ValidationError("CircleHomeo: need >= 3 knots");
  return from_lift(lift_of(std::move(f)), uniform_knots(n_knots), std::move(name));
}

void CircleHomeo::build_slopes() {
  const std::size_t n = alpha_.size();
  std::vector<double> h(n), d(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a1 = k + 1 < n ? alpha_[k + 1] : alpha_[0] + two_pi;
    const double f1 = k + 1 < n ? lift_[k + 1] : lift_[0] + two_pi;
    h[k] = a1 - alpha_[k];
    d[k] = (f1 - lift_[k]) / h[k];
  }
  slope_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t km = (k + n - 1) % n;
    // weighted harmonic mean keeps the interpolant monotone
    slope_[k] = 3.0 * (h[km] + h[k]) / ((2.0 * h[k] + h[km]) / d[km] + (h[k] + 2.0 * h[km]) / d[k]);
  }
}

double CircleHomeo::interpolate(double a) const {
  const std::size_t n = alpha_.size();
  std::size_t k = std::upper_bound(alpha_.begin(), alpha_.end(), a) - alpha_.begin();
  k = k == 0 ? 0 : k - 1;
  const double a0 = alpha_[k], f0 = lift_[k];
  const double a1 = k + 1 < n ? alpha_[k + 1] : alpha_[0] + two_pi;
  const double f1 = k + 1 < n ? lift_[k + 1] : lift_[0] + two_pi;
  const double m0 = slope_[k], m1 = slope_[(k + 1) % n];
  const double h = a1 - a0, t = (a - a0) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * m1;
}

double CircleHomeo::lift(double alpha) const {
  const double base = exact_ ? 0.0 : alpha_[0];
  const double turns = std::floor((alpha - base) / two_pi);
  double a = alpha - two_pi * turns;
  if (a >= base + two_pi) a = base;  // round-off at the seam
  const double v = exact_ ? exact_(a) : interpolate(a);
  return v + two_pi * turns;
}

double CircleHomeo::operator()(double alpha) const { return wrap_2pi(lift(alpha)); }

RP1 CircleHomeo::apply(const RP1& p) const { return RP1::from_angle(lift(p.angle())); }

CircleHomeo identity_homeo() {
  return CircleHomeo::from_lift([](double a) { return a; }, uniform_knots(64), "identity");
}

CircleHomeo mobius_boundary(const MobiusMap& m) {
  return CircleHomeo::from_function([m](double a) { return m.apply_angle(a); }, 256, "mobius");
}

CircleHomeo step_family(double kappa, int n_knots) {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw ValidationError("step_family: kappa must lie in [0,1)");
  const double r = (1.0 + kappa) / (1.0 - kappa);
  const double p = r * r;
  auto half = [kappa, p](double a) {
    const double x = (a - half_pi) / half_pi;
    const double s = (1.0 - kappa) * x + kappa * std::copysign(std::pow(std::abs(x), p), x);
    return half_pi + half_pi * s;
  };
  auto F = [half](double a) { return a < pi ? half(a) : pi + half(a - pi); };
  return CircleHomeo::from_lift(F, arclength_knots(F, n_knots), "step");
}

CircleHomeo bump_family(double amplitude, int n_knots) {
  if (!(std::abs(amplitude) < 1.0)) throw ValidationError("bump_family: |amplitude| must be < 1");
  auto F = [amplitude](double a) { return a + amplitude * std::sin(a); };
  return CircleHomeo::from_lift(F, uniform_knots(n_knots), "bump");
}

CircleHomeo compose(const MobiusMap& m, const CircleHomeo& f, const MobiusMap& mp) {
  return CircleHomeo::from_function(
      [m, f, mp](double a) { return m.apply_angle(f(mp.apply_angle(a))); },
      static_cast<int>(f.knot_alpha().size()), f.name() + "-composed");
}

double cross_ratio(const RP1& a, const RP1& b, const RP1& c, const RP1& d) {
  const double num = lorentz::bracket(a, c) * lorentz::bracket(b, d);
  const double den = lorentz::bracket(b, c) * lorentz::bracket(a, d);
  if (den == 0.0) {
    if (num == 0.0) throw ValidationError("cross_ratio: undefined coincidence pattern");
    return std::numeric_limits<double>::infinity();
  }
  return num / den;
}

double qs_modulus(const CircleHomeo& f, const QsSampler& sampler) {
  std::mt19937_64 rng(sampler.seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  const double log2v = std::log(2.0);
  double worst = 1.0;
  for (int i = 0; i < sampler.n_infinity; ++i) {
    const double ad = two_pi * (i + jitter(rng)) / sampler.n_infinity;
    const RP1 pd = RP1::from_angle(ad);
    const RP1 fd = f.apply(pd);
    for (int j = 0; j < sampler.n_center; ++j) {
      const double arc = two_pi * (j + 0.05 + 0.9 * jitter(rng)) / sampler.n_center;
      const double ab = ad + arc;
      const RP1 pb = RP1::from_angle(ab);
      const RP1 pm = RP1::from_angle(ab + 0.5 * (two_pi - arc));
      // chart with pd at infinity, pb at 0 and pm at 1
      const double kap = lorentz::bracket(pm, pb) / lorentz::bracket(pm, pd);
      const RP1 fb = f.apply(pb);
      const double sj = jitter(rng) - 0.5;
      for (int k = -sampler.n_scale; k <= sampler.n_scale; ++k) {
        const double lam = std::exp2(k + sj);
        // points with affine coordinates -lam, +lam
        const RP1 pa{pb.a + lam * kap * pd.a, pb.b + lam * kap * pd.b};
        const RP1 pc{pb.a - lam * kap * pd.a, pb.b - lam * kap * pd.b};
        // very close points only measure round-off
        const double aa = pa.angle(), ac = pc.angle();
        if (circle_gap(aa, ab) < kMinGap || circle_gap(ac, ab) < kMinGap ||
            circle_gap(aa, ad) < kMinGap || circle_gap(ac, ad) < kMinGap)
          continue;
        const double cr = cross_ratio(f.apply(pa), fb, f.apply(pc), fd);
        if (!(cr > 1.0) || !std::isfinite(cr)) return std::numeric_limits<double>::infinity();
        const double dv = std::log(cr) / log2v;
        worst = std::max(worst, std::max(dv, 1.0 / dv));
      }
    }
  }
  return worst;
}

BoundaryCurve::BoundaryCurve(std::vector<double> theta, std::vector<double> tau)
    : theta_(std::move(theta)), tau_(std::move(tau)) {
  const std::size_t n = theta_.size();
  if (n < 3 || tau_.size() != n) throw ValidationError("BoundaryCurve: need >= 3 samples");
  if (!(theta_.back() < theta_.front() + two_pi))
    throw ValidationError("BoundaryCurve: theta must wind exactly once");
  for (std::size_t k = 0; k < n; ++k) {
    const double th1 = k + 1 < n ? theta_[k + 1] : theta_[0] + two_pi;
    const double ta1 = k + 1 < n ? tau_[k + 1] : tau_[0];
    const double dth = th1 - theta_[k], dta = std::abs(ta1 - tau_[k]);
    if (!(dth > 0)) throw ValidationError("BoundaryCurve: theta must increase");
    if (dta > dth + 1e-9) throw ValidationError("BoundaryCurve: timelike pair of adjacent samples");
    if (dth - dta <= 1e-12 * std::max(1.0, dth)) ++lightlike_count_;
    max_slope_ = std::max(max_slope_, dta / dth);
  }
}

Vec22 BoundaryCurve::point(std::size_t k) const {
  return lorentz::boundary_point(theta_[k], tau_[k]);
}

lorentz::Ruling BoundaryCurve::ruling(std::size_t k) const { return lorentz::ruling_coords(point(k)); }

double BoundaryCurve::tau_at(double th) const {
  const double base = theta_.front();
  double a = th - two_pi * std::floor((th - base) / two_pi);
  if (a >= base + two_pi) a = base;
  const std::size_t n = theta_.size();
  std::size_t k = std::upper_bound(theta_.begin(), theta_.end(), a) - theta_.begin();
  k = k == 0 ? 0 : k - 1;
  const double t1 = k + 1 < n ? theta_[k + 1] : base + two_pi;
  const double v1 = k + 1 < n ? tau_[k + 1] : tau_[0];
  const double w = (a - theta_[k]) / (t1 - theta_[k]);
  return (1 - w) * tau_[k] + w * v1;
}

double BoundaryCurve::tau_min() const { return *std::min_element(tau_.begin(), tau_.end()); }
double BoundaryCurve::tau_max() const { return *std::max_element(tau_.begin(), tau_.end()); }

BoundaryCurve BoundaryCurve::time_shifted(double c) const {
  std::vector<double> t = tau_;
  for (double& v : t) v += c;
  return BoundaryCurve(theta_, std::move(t));
}

void BoundaryCurve::write_csv(std::ostream& os) const {
  os << "theta,tau,xi,eta,x1,x2,x3,x4\n";
  os.precision(17);
  for (std::size_t k = 0; k < size(); ++k) {
    const Vec22 v = point(k);
    os << theta_[k] << ',' << tau_[k] << ',' << wrap_2pi(theta_[k] - tau_[k]) << ','
       << wrap_2pi(theta_[k] + tau_[k]) << ',' << v.x1 << ',' << v.x2 << ',' << v.x3 << ','
       << v.x4 << '\n';
  }
}

BoundaryCurve lift_graph_samples(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t n = alpha.size();
  if (n < 3 || beta.size() != n) throw ValidationError("lift_graph: need >= 3 samples");
  for (std::size_t k = 0; k < n; ++k) {
    const double a1 = k + 1 < n ? alpha[k + 1] : alpha[0] + two_pi;
    const double b1 = k + 1 < n ? beta[k + 1] : beta[0] + two_pi;
    if (a1 - alpha[k] < -1e-12 || b1 - beta[k] < -1e-12)
      throw ValidationError("lift_graph: boundary map is not monotone (timelike pair)");
  }
  std::vector<double> theta(n), tau(n);
  for (std::size_t k = 0; k < n; ++k) {
    theta[k] = 0.5 * (alpha[k] + beta[k]);
    tau[k] = 0.5 * (beta[k] - alpha[k]);
  }
  return BoundaryCurve(std::move(theta), std::move(tau));
}

BoundaryCurve lift_graph(const CircleHomeo& f, int n_samples) {
  if (n_samples < 4) throw ValidationError("lift_graph: need >= 4 samples");
  auto F = [&f](double a) { return f.lift(a); };
  const std::vector<double> alpha = arclength_knots(F, n_samples);
  std::vector<double> beta(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) beta[k] = f.lift(alpha[k]);
  return lift_graph_samples(alpha, beta);
}

BoundaryCurve apply_isometry(const lorentz::Isometry3& g, const BoundaryCurve& c) {
  const std::size_t n = c.size();
  std::vector<double> theta(n), tau(n);
  Vec22 prev;
  for (std::size_t k = 0; k < n; ++k) {
    Vec22 v = lorentz::apply_isometry(g, c.point(k));
    v = v / std::hypot(v.x1, v.x2);
    if (k > 0 && v.x1 * prev.x1 + v.x2 * prev.x2 + v.x3 * prev.x3 + v.x4 * prev.x4 < 0) v = -v;
    prev = v;
    double th = std::atan2(v.x2, v.x1), ta = std::atan2(v.x4, v.x3);
    if (k > 0) {
      th = theta[k - 1] + wrap_pi(th - theta[k - 1]);
      ta = tau[k - 1] + wrap_pi(ta - tau[k - 1]);
    }
    theta[k] = th;
    tau[k] = ta;
  }
  // closure must return to the first sample without a sign flip
  Vec22 first = lorentz::apply_isometry(g, c.point(0));
  first = first / std::hypot(first.x1, first.x2);
  const double dot = first.x1 * prev.x1 + first.x2 * prev.x2 + first.x3 * prev.x3 + first.x4 * prev.x4;
  const double th_end = theta[n - 1] + wrap_pi(theta[0] - theta[n - 1]);
  const double ta_end = tau[n - 1] + wrap_pi(tau[0] - tau[n - 1]);
  if (dot < 0 || std::abs(th_end - theta[0] - two_pi) > 1e-6 || std::abs(ta_end - tau[0]) > 1e-6)
    throw ValidationError("apply_isometry: image curve is not a closed winding-one curve");
  return BoundaryCurve(std::move(theta), std::move(tau));
}

BoundaryCurve two_step_curve(int n_per_segment) {
  if (n_per_segment < 2) throw ValidationError("two_step_curve: need >= 2 points per segment");
  // corners in ruling angles
  const double ca[5] = {0.0, 0.0, pi, pi, two_pi};
  const double cb[5] = {-half_pi, half_pi, half_pi, 3 * half_pi, 3 * half_pi};
  std::vector<double> alpha, beta;
  for (int s = 0; s < 4; ++s) {
    for (int j = 0; j < n_per_segment; ++j) {
      const double w = static_cast<double>(j) / n_per_segment;
      alpha.push_back((1 - w) * ca[s] + w * ca[s + 1]);
      beta.push_back((1 - w) * cb[s] + w * cb[s + 1]);
    }
  }
  return lift_graph_samples(alpha, beta);
}

}  // namespace adsmax::boundary
