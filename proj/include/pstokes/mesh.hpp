#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <unordered_set>
#include <vector>

#include "pstokes/common.hpp"

namespace pstokes {

struct Vertex {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  bool on_boundary = false;
};

struct Tetrahedron {
  std::array<int, 4> v{-1, -1, -1, -1};
  int boundary_vertex_count = 0;
};

enum class FaceKind { Interior, Boundary };

/// Local face l of a tetrahedron is the face opposite local vertex l (see
/// kRefTetFaceVertices in common.hpp).
inline constexpr auto& kTetFaceVertices = kRefTetFaceVertices;

struct FaceRecord {
  std::array<int, 3> v{-1, -1, -1};  // global vertex ids, ascending
  std::array<int, 2> tet{-1, -1};    // adjacent tets; tet[0] owns the orientation
  std::array<int, 2> local_face{-1, -1};
  FaceKind kind = FaceKind::Interior;
  double diameter = 0.0;  // straight face diameter h_F
};

enum class BoundaryGeometryKind { None, Sphere, CubeMinusSphere };

/// Analytic description of the exact boundary, carried by generated meshes so
/// refinement can re-project new boundary vertices.
struct BoundaryGeometryDesc {
  BoundaryGeometryKind kind = BoundaryGeometryKind::None;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Straight body-fitted tetrahedral mesh with full face topology.
/// Immutable after construction.
class StraightMesh {
 public:
  StraightMesh() = default;

  /// Builds face topology, boundary flags and derived sizes. Does not check
  /// invariants beyond basic index validity; see validate_topology().
  StraightMesh(std::vector<Vertex> vertices, std::vector<Tetrahedron> tets,
               BoundaryGeometryDesc geometry = {});

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_tets() const { return static_cast<int>(tets_.size()); }
  int n_faces() const { return static_cast<int>(faces_.size()); }
  int n_boundary_faces() const { return n_boundary_faces_; }
  int n_interior_faces() const { return n_faces() - n_boundary_faces_; }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Tetrahedron>& tets() const { return tets_; }
  const std::vector<FaceRecord>& faces() const { return faces_; }
  const Eigen::Vector3d& point(int v) const { return vertices_[v].x; }
  const Tetrahedron& tet(int t) const { return tets_[t]; }
  const FaceRecord& face(int f) const { return faces_[f]; }

  /// Global face id of local face l of tet t.
  int tet_face(int t, int l) const { return tet_faces_[t][l]; }

  const Eigen::Vector3d& tet_point(int t, int i) const {
    return vertices_[tets_[t].v[i]].x;
  }

  double signed_volume(int t) const;
  double tet_diameter(int t) const;
  double mesh_size() const { return mesh_size_; }
  double min_tet_diameter() const { return min_tet_diameter_; }

  const BoundaryGeometryDesc& geometry() const { return geometry_; }

  bool is_boundary_edge(int a, int b) const {
    return boundary_edges_.count(edge_key(a, b)) > 0;
  }

 private:
  static long long edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<long long>(a) << 32) | static_cast<unsigned int>(b);
  }
  void build_topology();

  std::vector<Vertex> vertices_;
  std::vector<Tetrahedron> tets_;
  std::vector<FaceRecord> faces_;
  std::vector<std::array<int, 4>> tet_faces_;
  std::unordered_set<long long> boundary_edges_;
  BoundaryGeometryDesc geometry_;
  double mesh_size_ = 0.0;
  double min_tet_diameter_ = 0.0;
  int n_boundary_faces_ = 0;
};

enum class MeshFormat { Native, GmshV2 };

/// Reads a mesh file. Native format is the line-oriented "tetmesh 1" format;
/// GmshV2 reads the ASCII MSH 2.2 subset (nodes + 4-node tetrahedra).
/// Throws MeshError with line/element diagnostics on parse or topology errors.
StraightMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Native);

/// Writes the native format.
void save_mesh(const StraightMesh& mesh, const std::string& path);

/// Body-fitted mesh of the ball {|x| < radius}. Level 0 has 48 tets; each
/// additional level applies uniform_refine (8x growth). Boundary vertices lie
/// on the sphere to within 1e-12 and every tet has at most three boundary
/// vertices.
StraightMesh generate_ball_mesh(double radius, int level);

/// Body-fitted mesh of (0,1)^3 minus the ball of given center/radius, built
/// from radial prism layers between the sphere and the cube surface.
/// target_tets selects the resolution; the actual count is the closest
/// attainable by the construction.
StraightMesh generate_cavity_mesh(const Eigen::Vector3d& ball_center,
                                  double ball_radius, int target_tets);

/// 1:8 red refinement. New vertices on boundary edges are projected onto the
/// exact boundary geometry carried by the mesh.
StraightMesh uniform_refine(const StraightMesh& mesh);

struct TopologyReport {
  std::vector<std::string> issues;
  double min_signed_volume = 0.0;
  double min_shape_regularity = 0.0;  // inradius / diameter
  double max_boundary_distance = 0.0; // deviation of boundary vertices from the exact boundary
  double size_ratio = 0.0;            // max tet diameter / min tet diameter
  bool ok() const { return issues.empty(); }
};

/// Checks conformity, orientation, boundary-vertex counts, shape regularity
/// (floor 0.05), boundary fit and the Euler face-count identity.
TopologyReport validate_topology(const StraightMesh& mesh);

}  // namespace pstokes
