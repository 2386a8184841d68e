#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pstokes/basis.hpp"
#include "pstokes/mesh.hpp"

namespace pstokes {

/// Exact boundary geometry used for node projection and for the
/// nodes-consistent realization of the exact map.
class ExactGeometry {
 public:
  static ExactGeometry sphere(const Eigen::Vector3d& center, double radius);
  static ExactGeometry cube_minus_sphere(const Eigen::Vector3d& center, double radius);
  static ExactGeometry identity();
  static ExactGeometry from_mesh(const StraightMesh& mesh);

  BoundaryGeometryKind kind() const { return kind_; }
  const Eigen::Vector3d& center() const { return center_; }
  double radius() const { return radius_; }

  /// Radial projection onto the sphere patch.
  Eigen::Vector3d project(const Eigen::Vector3d& x) const;
  /// True when x is on the curved (spherical) part of the boundary.
  bool on_sphere_patch(const Eigen::Vector3d& x, double tol = 1e-8) const;

 private:
  BoundaryGeometryKind kind_ = BoundaryGeometryKind::None;
  Eigen::Vector3d center_ = Eigen::Vector3d::Zero();
  double radius_ = 0.0;
};

struct JacobianData {
  Eigen::Matrix3d J;
  Eigen::Matrix3d J_inv;
  double J_det = 0.0;
  /// second[i](j,k) = d^2 x_i / (dxhat_j dxhat_k)
  std::array<Eigen::Matrix3d, 3> second;
  /// det_grad(j) = d J_det / dxhat_j
  Eigen::Vector3d det_grad;
};

/// Degree-k Lagrange geometry map of one element, evaluated analytically.
class CurvedElementMap {
 public:
  CurvedElementMap(int degree, Eigen::Matrix3Xd nodes, bool is_affine);

  int degree() const { return degree_; }
  bool is_affine() const { return is_affine_; }
  const Eigen::Matrix3Xd& nodes() const { return nodes_; }

  Eigen::Vector3d map(const Eigen::Vector3d& xhat) const;
  JacobianData jacobian(const Eigen::Vector3d& xhat) const;

  /// ds = factor * d(shat) on local face lface at face coordinates (s,t);
  /// equals J_det * |J^{-T} nhat| with the unit reference outward normal.
  double surface_measure_factor(int lface, const Eigen::Vector2d& st) const;

 private:
  int degree_;
  bool is_affine_;
  Eigen::Matrix3Xd nodes_;
  Eigen::Matrix3d affine_J_, affine_Jinv_;
  double affine_det_ = 0.0;
};

/// Geometry map for one element: interior elements are affine, boundary
/// elements carry Lagrange nodes projected onto the exact boundary wherever
/// the node lies on a boundary edge or face of the curved patch.
CurvedElementMap build_curved_map(int element, const StraightMesh& mesh,
                                  const ExactGeometry& geometry, int degree);

/// All element maps of a mesh plus the nodes-consistent exact-map blend.
class GeometryMaps {
 public:
  GeometryMaps(const StraightMesh& mesh, const ExactGeometry& geometry, int degree);

  int degree() const { return degree_; }
  const ExactGeometry& geometry() const { return geometry_; }
  const StraightMesh& mesh() const { return *mesh_; }
  const CurvedElementMap& map(int element) const { return maps_[element]; }
  bool element_is_curved(int element) const { return curved_[element] != 0; }

  /// Nodes-consistent realization of the exact map M on an element: equals
  /// the Lagrange map plus a blend that snaps curved boundary faces/edges
  /// onto the exact surface. Coincides with the Lagrange map at all Lagrange
  /// nodes and on non-curved elements.
  Eigen::Vector3d exact_map(int element, const Eigen::Vector3d& xhat) const;

 private:
  const StraightMesh* mesh_;
  ExactGeometry geometry_;
  int degree_;
  std::vector<CurvedElementMap> maps_;
  std::vector<int8_t> curved_;
  std::vector<std::array<int8_t, 4>> sphere_face_;  // local faces on the curved patch
  std::vector<std::array<int8_t, 6>> sphere_edge_;  // curved edges not inside such a face
};

/// Local edges of the reference tet as vertex pairs.
inline constexpr std::array<std::array<int, 2>, 6> kTetEdgeVertices = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

struct JacobianBoundsReport {
  double min_det = 0.0;
  double max_det = 0.0;
  int nonpositive_det_count = 0;
  double max_affine_deviation = 0.0;   // max ||J - J_affine||_F on curved elements
  double max_boundary_gap = 0.0;       // max |M - M_h| at sample points
  double max_second_derivative = 0.0;  // map curvature magnitude
  std::string to_json() const;
};

/// Samples Jacobian data over all elements (quadrature points of the given
/// degree plus vertices) and reports positivity and deviation bounds.
JacobianBoundsReport verify_jacobian_bounds(const GeometryMaps& maps,
                                            int sample_degree = 4);

}  // namespace pstokes
