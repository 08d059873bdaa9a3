#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "adsmax/boundary.hpp"
#include "adsmax/surface.hpp"

namespace adsmax::lagrangian {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using surface::DiskMesh;
using surface::MeshPtr;

// complex structure of a metric: rotation by -pi/2 in the orientation of the
// chart (y1, y2). With B = D nu for the future normal this is the orientation
// in which phi_l pulls back the hyperbolic metric to mu_l.
Matrix2d complex_structure(const Matrix2d& I);

// Projections of a spacelike graph to the reference plane P0 along the left
// and right rulings, through the tangent plane at each vertex.
struct MLMap {
  MeshPtr mesh;
  std::vector<Vector2d> phi_l, phi_r;  // Poincare coordinates on P0
  std::vector<Matrix2d> jac_l, jac_r;  // d phi / dy from the stencil fit
  std::vector<Matrix2d> dphi_s;        // (E + JB)^{-1} (E - JB), chart basis
  std::vector<double> dilatation;      // singular value ratio of dphi_s, NaN if masked
  std::vector<bool> valid;             // interior (beyond the boundary layers) and not flat
  int flat = 0;                        // interior vertices with |det B + 1| < tol::degenerate_mu
  int layers = 2;
};
MLMap extract_projections(const surface::SpacelikeGraph& S, const surface::ShapeData& sd, int layers = 2);

// mu_l = I((E + JB)., (E + JB).), mu_r = I((E - JB)., (E - JB).) in the chart basis
struct MuMetrics {
  std::vector<Matrix2d> l, r;
  std::vector<bool> degenerate;  // |det B + 1| < degenerate_tol
  int degenerate_count = 0;
};
MuMetrics mu_metrics(const surface::ShapeData& sd, double degenerate_tol = tol::degenerate_mu);
// threshold for |det B + 1| that accounts for the error of the discrete shape
// operator: tol::degenerate_mu + 4 median |tr B| over the mask, since tr B
// vanishes on a maximal surface
double degenerate_threshold(const surface::ShapeData& sd, const std::vector<bool>& mask);

// Gaussian curvature of a per-vertex metric field: angle defect with edge
// lengths from the endpoint-averaged metric, averaged over the closed 1-ring.
// NaN where the 1-ring touches the boundary.
Eigen::VectorXd metric_curvature(const DiskMesh& m, const std::vector<Matrix2d>& g);

// pull-back of the hyperbolic metric of P0 by the P1 map y -> phi on each
// triangle, against the vertex-averaged target metric; relative Frobenius error
struct PullbackReport {
  double median = 0, max = 0;
  int triangles = 0;
};
PullbackReport pullback_consistency(const MLMap& ml, const std::vector<Vector2d>& phi,
                                    const std::vector<Matrix2d>& target);

// Phi_S as the map whose graph is {(phi_l(x), phi_r(x))}: piecewise linear over
// the image of the mesh under phi_l
struct TraceSample {
  double xi;        // left coordinate (double-angle parameter)
  double expected;  // f(xi)
  double measured;  // right coordinate of the trace on the outer ring
  double error;     // circular distance
  double tol;       // extrapolation tolerance at that angle
};
struct PhiS {
  MLMap ml;
  int flipped_l = 0, flipped_r = 0;  // image triangles with reversed orientation
  double max_det_residual = 0;       // max |det dphi_s - 1| over valid vertices
  double sup_dilatation = 1, median_dilatation = 1;
  std::vector<int> histogram;        // dilatation counts over [1, 1.1), [1.1, 1.2), ..., last bin open

  // image of a point of P0, nullopt outside the sampled region
  std::optional<Vector2d> operator()(const Vector2d& z) const;
  // boundary values read off the outermost valid ring
  std::vector<TraceSample> boundary_trace(const boundary::CircleHomeo& f, int samples = 32) const;
};
PhiS phi_s(MLMap ml);

// Inverse direction: from a Codazzi field b (self-adjoint for rho, det b = 1)
// and a hyperbolic metric rho, I = rho((E + b)., (E + b).) / 4 and
// JB = (E + b)^{-1} (E - b)
struct MLResiduals {
  std::vector<Matrix2d> I, B;
  Eigen::VectorXd codazzi;  // |d^nabla b (e1, e2)|_rho for a rho-orthonormal pair, NaN if masked
  Eigen::VectorXd trace;    // |tr JB|
  Eigen::VectorXd gauss;    // K(I) + 4 / (2 + tr b), NaN if masked
  double codazzi_median = 0, trace_max = 0, gauss_median = 0;
};
// throws ValidationError when some |det b - 1| exceeds 1e-6
MLResiduals ml_residuals(const DiskMesh& m, const std::vector<Matrix2d>& b, const std::vector<Matrix2d>& rho,
                         int layers = 2);

// the Codazzi field of a maximal surface in the chart of S: rho = mu_l and
// b = (E - JB)(E + JB)^{-1}
std::vector<Matrix2d> codazzi_field(const surface::ShapeData& sd);

}  // namespace adsmax::lagrangian
