#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "adsmax/lorentz.hpp"

namespace adsmax::boundary {

using lorentz::MobiusMap;
using lorentz::RP1;
using lorentz::Vec22;

// Orientation-preserving circle homeomorphism in the double-angle parameter
// of RP^1. Stored as knots of the lift F (F(a + 2pi) = F(a) + 2pi) with a
// periodic monotone cubic interpolant. Parametric families also keep their
// closed form, which takes precedence for evaluation.
class CircleHomeo {
 public:
  // knots alpha_k in [0, 2pi) strictly increasing, values f_k taken mod 2pi
  static CircleHomeo from_knots(const std::vector<double>& alpha, const std::vector<double>& f);
  // map given by a function of the angle (mod 2pi values), sampled into n knots
  static CircleHomeo from_function(std::function<double(double)> f, int n_knots,
                                   std::string name);
  // closed-form lift on [0, 2pi) with F(2pi-) = F(0) + 2pi, knots for export
  static CircleHomeo from_lift(std::function<double(double)> lift,
                               const std::vector<double>& knot_alpha, std::string name);

  // lift value, defined for every real alpha
  double lift(double alpha) const;
  // value in [0, 2pi)
  double operator()(double alpha) const;
  RP1 apply(const RP1& p) const;

  const std::vector<double>& knot_alpha() const { return alpha_; }
  const std::vector<double>& knot_lift() const { return lift_; }
  bool exact() const { return static_cast<bool>(exact_); }
  const std::string& name() const { return name_; }

 private:
  double interpolate(double a) const;  // a in [alpha_0, alpha_0 + 2pi)
  void build_slopes();

  std::vector<double> alpha_, lift_, slope_;
  std::function<double(double)> exact_;  // lift on [0, 2pi)
  std::string name_ = "knots";
};

CircleHomeo identity_homeo();
CircleHomeo mobius_boundary(const MobiusMap& m);
// smooth family with step_family(0) = id and the 2-step map as kappa -> 1
CircleHomeo step_family(double kappa, int n_knots = 512);
// alpha -> alpha + A sin(alpha), |A| < 1
CircleHomeo bump_family(double amplitude, int n_knots = 256);
// m o f o mp
CircleHomeo compose(const MobiusMap& m, const CircleHomeo& f, const MobiusMap& mp);

// cr(a,b;c,d) = ((a-c)(b-d)) / ((b-c)(a-d)), +inf when only the denominator vanishes
double cross_ratio(const RP1& a, const RP1& b, const RP1& c, const RP1& d);

struct QsSampler {
  int n_infinity = 48;    // positions of the fourth point
  int n_center = 48;      // positions of the middle point
  int n_scale = 16;       // scale ladder 2^k, |k| <= n_scale
  std::uint64_t seed = 1;
};
// sup over sampled cross-ratio-2 quadruples of max(d, 1/d), d = log cr(f.) / log 2
double qs_modulus(const CircleHomeo& f, const QsSampler& sampler = {});

// Closed achronal curve in the boundary of the universal cover, stored as
// cylinder coordinates with theta increasing over one turn.
class BoundaryCurve {
 public:
  BoundaryCurve() = default;
  // theta strictly increasing with theta.back() < theta.front() + 2pi,
  // tau periodic; throws when an adjacent pair is timelike
  BoundaryCurve(std::vector<double> theta, std::vector<double> tau);

  std::size_t size() const { return theta_.size(); }
  double theta(std::size_t k) const { return theta_[k]; }
  double tau(std::size_t k) const { return tau_[k]; }
  const std::vector<double>& thetas() const { return theta_; }
  const std::vector<double>& taus() const { return tau_; }
  Vec22 point(std::size_t k) const;
  lorentz::Ruling ruling(std::size_t k) const;
  // piecewise-linear tau over theta, periodic
  double tau_at(double theta) const;
  // segments with |dtau| = |dtheta|
  bool has_lightlike_segments() const { return lightlike_count_ > 0; }
  int lightlike_segment_count() const { return lightlike_count_; }
  // largest |dtau/dtheta| over segments
  double max_slope() const { return max_slope_; }
  double tau_min() const;
  double tau_max() const;
  BoundaryCurve time_shifted(double c) const;

  void write_csv(std::ostream& os) const;

 private:
  std::vector<double> theta_, tau_;
  int lightlike_count_ = 0;
  double max_slope_ = 0;
};

// graph {(xi, f(xi))} in ruling coordinates, sampled at n points of equal
// arclength along the graph
BoundaryCurve lift_graph(const CircleHomeo& f, int n_samples = 1024);
// raw samples of a graph (alpha_k, beta_k); throws on a decreasing pair
BoundaryCurve lift_graph_samples(const std::vector<double>& alpha, const std::vector<double>& beta);
// image of a curve under an isometry, lifted continuously
BoundaryCurve apply_isometry(const lorentz::Isometry3& g, const BoundaryCurve& c);
// limit of step_family: four lightlike segments, n points per segment
BoundaryCurve two_step_curve(int n_per_segment = 64);

}  // namespace adsmax::boundary
