#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "adsmax/constants.hpp"
#include "adsmax/lorentz.hpp"
#include "adsmax/mesh.hpp"

namespace adsmax::surface {

using lorentz::Vec22;
using MeshPtr = std::shared_ptr<const DiskMesh>;

// per-triangle spacelike margin 1 - (phi/a)^2 |grad u|^2, minimum over the
// quadrature points of the triangle, so the energy is finite iff all are > 0
std::vector<double> triangle_margins(const DiskMesh& m, const Eigen::VectorXd& u);

// Piecewise-linear spacelike graph t = u(y) over a disk mesh.
class SpacelikeGraph {
 public:
  // throws ValidationError unless every triangle is spacelike
  SpacelikeGraph(MeshPtr mesh, Eigen::VectorXd u);

  const DiskMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& u() const { return u_; }
  double margin() const { return margin_; }
  lorentz::QuadricPoint point(int v) const;

 private:
  MeshPtr mesh_;
  Eigen::VectorXd u_;
  double margin_ = 0;
};

// Discrete area functional E(u) = -Area(graph) and its derivatives, P1
// elements with the edge-midpoint rule. Maximal graphs are the critical
// points of E; E is convex on the spacelike cone.
struct Assembly {
  double energy = 0;
  Eigen::VectorXd gradient;            // dE/du_i, all vertices
  Eigen::SparseMatrix<double> hessian;  // all vertices, only when requested
};
// energy +inf when some quadrature point is not spacelike
Assembly assemble(const DiskMesh& m, const Eigen::VectorXd& u, bool with_hessian);
// lumped weights of the mean curvature: integral of phi a^2 psi_i
Eigen::VectorXd curvature_mass(const DiskMesh& m);

// v = 1 / sqrt(1 - phi^2 |grad u|^2) at the vertices
Eigen::VectorXd gradient_function(const SpacelikeGraph& S);
// nodal mean curvature H = -(dE/du_i) / integral(phi a^2 psi_i); boundary
// vertices are set to 0
Eigen::VectorXd mean_curvature(const SpacelikeGraph& S);

struct ShapeData {
  std::vector<Vec22> nu;  // future unit normal
  Eigen::VectorXd v;      // gradient function
  std::vector<Eigen::Matrix2d> I, B;  // in the chart basis d/dy1, d/dy2
  Eigen::VectorXd H;      // trace of B
  Eigen::VectorXd k1, k2; // principal curvatures, k1 >= k2
  Eigen::VectorXd K;      // -1 - det B
  Eigen::VectorXd K_intrinsic;  // angle defect of the induced metric, 1-ring averaged
};
ShapeData shape_data(const SpacelikeGraph& S);

// Delta_I chi - (e^{4 chi} - 1), chi = log(-det B) / 4; masked vertices are
// flat (det B > -1e-8), have a masked neighbor or touch the boundary
struct ChiResidual {
  Eigen::VectorXd chi, residual;
  std::vector<bool> valid;
};
ChiResidual chi_residual(const SpacelikeGraph& S, const ShapeData& sd);

// discrete Laplace-Beltrami of the induced metric (cotangent weights on the
// polyhedral surface with Lorentzian chord lengths); boundary rows are zero
Eigen::VectorXd laplace_beltrami(const SpacelikeGraph& S, const Eigen::VectorXd& f);

// normal flow by signed distance r, resampled as a graph over the same mesh
struct Equidistant {
  SpacelikeGraph graph;
  std::vector<bool> covered;  // vertex inside the image of the moved mesh
};
Equidistant equidistant(const SpacelikeGraph& S, double r);
// predicted principal curvature after moving by r along the future normal
double equidistant_curvature(double k, double r);

// closed-form surfaces
SpacelikeGraph plane_surface(MeshPtr mesh, const lorentz::SpacelikePlane& P);
// flat maximal surface at timelike distance pi/4 from the geodesic
// {(sinh s, 0, cosh s, 0)}, rotated by psi and shifted in time by c
SpacelikeGraph horosphere_surface(MeshPtr mesh, double psi = 0.0, double c = -quarter_pi);
// its boundary at infinity: four lightlike segments
double horosphere_boundary_tau(double theta, double psi = 0.0, double c = -quarter_pi);

void write_csv(std::ostream& os, const SpacelikeGraph& S, const ShapeData& sd);
// triangle mesh of the projective chart image, 1-based faces
void write_obj(std::ostream& os, const SpacelikeGraph& S);

}  // namespace adsmax::surface
