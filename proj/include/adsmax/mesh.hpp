#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace adsmax::surface {

// per-triangle P1 data with a three-point edge-midpoint rule
struct TriGeom {
  double area = 0;
  Eigen::Matrix<double, 3, 2> grad;   // gradients of the barycentric basis
  std::array<Eigen::Vector2d, 3> qp;  // midpoint of the edge opposite vertex k
  std::array<double, 3> phi2{}, a2{}, c2{};  // lapse^2, conformal^2, (lapse/conformal)^2
};

// Triangulated hyperbolic disk of radius r in the Poincare model: a uniform
// triangular lattice in the chart, closed by a ring of vertices on the
// boundary circle. Vertex 0 is the center.
struct DiskMesh {
  double radius = 0;         // hyperbolic
  double euclid_radius = 0;  // tanh(r/2)
  int n_rings = 0;           // resolution as requested
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<int> depth;                     // edge distance to the boundary ring
  std::vector<std::vector<int>> neighbors;    // 1-ring, sorted
  std::vector<std::vector<int>> stencil;      // 2-ring used by fits
  // quadratic least-squares fit on the stencil: rows 0-1 gradient,
  // rows 2-4 second derivatives (f11, f12, f22), applied to f(stencil) - f(i)
  std::vector<Eigen::MatrixXd> fit;
  std::vector<TriGeom> geom;
  double h = 0;  // longest edge, hyperbolic length
  // uniform bucket grid over [-R, R]^2 for point location
  int grid_n = 0;
  std::vector<std::vector<int>> buckets;

  std::size_t size() const { return vertices.size(); }
  bool boundary(int v) const { return depth[v] == 0; }
  // vertices more than `layers` edges away from the boundary ring
  std::vector<bool> interior_mask(int layers) const;
  // gradient of a vertex field from the stencil fit
  Eigen::Vector2d gradient(const Eigen::VectorXd& f, int v) const;
};

// Delaunay mesh with exactly 1 + n_rings * n_angular vertices; boundary
// vertices lie on the circle of hyperbolic radius r
std::shared_ptr<const DiskMesh> make_mesh(double r, int n_rings, int n_angular);

// smallest interior angle over all triangles, degrees (Euclidean chart,
// which is conformal to the hyperbolic metric)
double min_angle_deg(const DiskMesh& m);

// locate a point: triangle index and barycentric coordinates, -1 if outside
struct Location {
  int tri = -1;
  Eigen::Vector3d bary = Eigen::Vector3d::Zero();
};
Location locate(const DiskMesh& m, const Eigen::Vector2d& y);

// P1 interpolation of a vertex field; points outside the mesh use the
// nearest boundary vertex
double interpolate(const DiskMesh& m, const Eigen::VectorXd& f, const Eigen::Vector2d& y);

}  // namespace adsmax::surface
