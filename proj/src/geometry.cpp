#include "pstokes/geometry.hpp"

#include <cmath>
#include <sstream>

#include "pstokes/quadrature.hpp"

namespace pstokes {

// ---------------------------------------------------------------------------
// ExactGeometry
// ---------------------------------------------------------------------------

ExactGeometry ExactGeometry::sphere(const Eigen::Vector3d& center, double radius) {
  ExactGeometry g;
  g.kind_ = BoundaryGeometryKind::Sphere;
  g.center_ = center;
  g.radius_ = radius;
  return g;
}

ExactGeometry ExactGeometry::cube_minus_sphere(const Eigen::Vector3d& center,
                                               double radius) {
  ExactGeometry g;
  g.kind_ = BoundaryGeometryKind::CubeMinusSphere;
  g.center_ = center;
  g.radius_ = radius;
  return g;
}

ExactGeometry ExactGeometry::identity() { return ExactGeometry(); }

ExactGeometry ExactGeometry::from_mesh(const StraightMesh& mesh) {
  const auto& d = mesh.geometry();
  switch (d.kind) {
    case BoundaryGeometryKind::Sphere: return sphere(d.center, d.radius);
    case BoundaryGeometryKind::CubeMinusSphere: return cube_minus_sphere(d.center, d.radius);
    default: return identity();
  }
}

Eigen::Vector3d ExactGeometry::project(const Eigen::Vector3d& x) const {
  if (kind_ == BoundaryGeometryKind::None) return x;
  const Eigen::Vector3d w = x - center_;
  const double n = w.norm();
  PSTOKES_REQUIRE(n > 0.0, "ExactGeometry::project: point at sphere center");
  return center_ + (radius_ / n) * w;
}

bool ExactGeometry::on_sphere_patch(const Eigen::Vector3d& x, double tol) const {
  if (kind_ == BoundaryGeometryKind::None) return false;
  return std::abs((x - center_).norm() - radius_) <= tol * std::max(1.0, radius_);
}

// ---------------------------------------------------------------------------
// CurvedElementMap
// ---------------------------------------------------------------------------

CurvedElementMap::CurvedElementMap(int degree, Eigen::Matrix3Xd nodes, bool is_affine)
    : degree_(degree), is_affine_(is_affine), nodes_(std::move(nodes)) {
  const auto& basis = LagrangeSimplexBasis::get(degree_);
  PSTOKES_REQUIRE(nodes_.cols() == basis.size(), "CurvedElementMap: node count mismatch");
  if (is_affine_) {
    // Vertices are the nodes with barycentric weight `degree` on one corner.
    Eigen::Matrix3d V;
    Eigen::Vector3d v0;
    for (int i = 0; i < basis.size(); ++i) {
      const auto& b = basis.node_bary()[i];
      for (int c = 0; c < 4; ++c) {
        if (b[c] == degree_) {
          if (c == 0)
            v0 = nodes_.col(i);
          else
            V.col(c - 1) = nodes_.col(i);
        }
      }
    }
    affine_J_ = V.colwise() - v0;
    affine_det_ = affine_J_.determinant();
    if (affine_det_ <= 0.0)
      throw GeometryError("CurvedElementMap: affine map has non-positive Jacobian");
    affine_Jinv_ = affine_J_.inverse();
  }
}

Eigen::Vector3d CurvedElementMap::map(const Eigen::Vector3d& xhat) const {
  const auto& basis = LagrangeSimplexBasis::get(degree_);
  Eigen::VectorXd phi;
  basis.eval(xhat, phi);
  return nodes_ * phi;
}

JacobianData CurvedElementMap::jacobian(const Eigen::Vector3d& xhat) const {
  JacobianData out;
  if (is_affine_) {
    out.J = affine_J_;
    out.J_inv = affine_Jinv_;
    out.J_det = affine_det_;
    for (auto& m : out.second) m.setZero();
    out.det_grad.setZero();
    return out;
  }
  const auto& basis = LagrangeSimplexBasis::get(degree_);
  Eigen::Matrix3Xd grads;
  basis.eval_grad(xhat, grads);  // 3 x n
  out.J = nodes_ * grads.transpose();
  out.J_det = out.J.determinant();
  if (out.J_det <= 0.0) {
    std::ostringstream os;
    os << "CurvedElementMap: non-positive Jacobian determinant " << out.J_det
       << " at reference point (" << xhat.transpose() << ")";
    throw GeometryError(os.str());
  }
  out.J_inv = out.J.inverse();

  std::vector<Eigen::Matrix3d> hess;
  basis.eval_hessian(xhat, hess);
  for (auto& m : out.second) m.setZero();
  for (int n = 0; n < static_cast<int>(hess.size()); ++n)
    for (int i = 0; i < 3; ++i) out.second[i] += nodes_(i, n) * hess[n];

  // Jacobi's formula: d(det J)/dxhat_j = det(J) tr(J^{-1} dJ/dxhat_j),
  // (dJ/dxhat_j)(r,c) = second[r](c,j).
  for (int j = 0; j < 3; ++j) {
    Eigen::Matrix3d dJ;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) dJ(r, c) = out.second[r](c, j);
    out.det_grad(j) = out.J_det * (out.J_inv * dJ).trace();
  }
  return out;
}

double CurvedElementMap::surface_measure_factor(int lface, const Eigen::Vector2d& st) const {
  const Eigen::Vector3d xhat = BdmReferenceBasis::face_point(lface, st[0], st[1]);
  const JacobianData jd = jacobian(xhat);
  const Eigen::Vector3d nhat = BdmReferenceBasis::face_unit_normal(lface);
  return jd.J_det * (jd.J_inv.transpose() * nhat).norm();
}

// ---------------------------------------------------------------------------
// Map construction
// ---------------------------------------------------------------------------

namespace {

// Classifies a lattice node by its barycentric zero pattern and decides
// whether it must be projected. Vertices are never moved.
bool node_needs_projection(const std::array<int, 4>& bary, int element,
                           const StraightMesh& mesh, const ExactGeometry& geometry) {
  if (geometry.kind() == BoundaryGeometryKind::None) return false;
  const auto& tet = mesh.tet(element);

  int nonzero = 0;
  for (int c = 0; c < 4; ++c)
    if (bary[c] > 0) ++nonzero;
  if (nonzero <= 1 || nonzero == 4) return false;

  if (nonzero == 2) {  // edge node
    int a = -1, b = -1;
    for (int c = 0; c < 4; ++c)
      if (bary[c] > 0) (a < 0 ? a : b) = c;
    const int ga = tet.v[a], gb = tet.v[b];
    if (!mesh.is_boundary_edge(ga, gb)) return false;
    if (geometry.kind() == BoundaryGeometryKind::Sphere) return true;
    return geometry.on_sphere_patch(mesh.point(ga)) &&
           geometry.on_sphere_patch(mesh.point(gb));
  }

  // face node: the face opposite the zero barycentric entry
  int zero = -1;
  for (int c = 0; c < 4; ++c)
    if (bary[c] == 0) zero = c;
  const FaceRecord& f = mesh.face(mesh.tet_face(element, zero));
  if (f.kind != FaceKind::Boundary) return false;
  if (geometry.kind() == BoundaryGeometryKind::Sphere) return true;
  for (int i = 0; i < 3; ++i)
    if (!geometry.on_sphere_patch(mesh.point(f.v[i]))) return false;
  return true;
}

}  // namespace

CurvedElementMap build_curved_map(int element, const StraightMesh& mesh,
                                  const ExactGeometry& geometry, int degree) {
  PSTOKES_REQUIRE(degree >= 1 && degree <= 3, "build_curved_map: degree must be in 1..3");
  const auto& basis = LagrangeSimplexBasis::get(degree);
  const auto& tet = mesh.tet(element);

  Eigen::Matrix3Xd nodes(3, basis.size());
  bool any_projected = false;
  for (int i = 0; i < basis.size(); ++i) {
    const auto& b = basis.node_bary()[i];
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    for (int c = 0; c < 4; ++c)
      x += (static_cast<double>(b[c]) / degree) * mesh.point(tet.v[c]);
    if (degree >= 2 && node_needs_projection(b, element, mesh, geometry)) {
      x = geometry.project(x);
      any_projected = true;
    }
    nodes.col(i) = x;
  }
  return CurvedElementMap(degree, std::move(nodes), !any_projected);
}

GeometryMaps::GeometryMaps(const StraightMesh& mesh, const ExactGeometry& geometry,
                           int degree)
    : mesh_(&mesh), geometry_(geometry), degree_(degree) {
  maps_.reserve(mesh.n_tets());
  curved_.resize(mesh.n_tets(), 0);
  sphere_face_.assign(mesh.n_tets(), {0, 0, 0, 0});
  sphere_edge_.assign(mesh.n_tets(), {0, 0, 0, 0, 0, 0});

  for (int e = 0; e < mesh.n_tets(); ++e) {
    maps_.push_back(build_curved_map(e, mesh, geometry, degree));
    curved_[e] = maps_.back().is_affine() ? 0 : 1;
    if (!curved_[e]) continue;

    const auto& tet = mesh.tet(e);
    for (int l = 0; l < 4; ++l) {
      const FaceRecord& f = mesh.face(mesh.tet_face(e, l));
      if (f.kind != FaceKind::Boundary) continue;
      bool on_patch = geometry.kind() == BoundaryGeometryKind::Sphere;
      if (geometry.kind() == BoundaryGeometryKind::CubeMinusSphere) {
        on_patch = true;
        for (int i = 0; i < 3; ++i)
          on_patch = on_patch && geometry.on_sphere_patch(mesh.point(f.v[i]));
      }
      if (on_patch) sphere_face_[e][l] = 1;
    }
    for (int k = 0; k < 6; ++k) {
      const int a = kTetEdgeVertices[k][0], b = kTetEdgeVertices[k][1];
      const int ga = tet.v[a], gb = tet.v[b];
      if (!mesh.is_boundary_edge(ga, gb)) continue;
      if (geometry.kind() == BoundaryGeometryKind::CubeMinusSphere &&
          !(geometry.on_sphere_patch(mesh.point(ga)) &&
            geometry.on_sphere_patch(mesh.point(gb))))
        continue;
      // Skip edges already contained in a curved boundary face of this element.
      bool inside_face = false;
      for (int l = 0; l < 4 && !inside_face; ++l)
        inside_face = sphere_face_[e][l] && l != a && l != b;
      if (!inside_face) sphere_edge_[e][k] = 1;
    }
  }
}

Eigen::Vector3d GeometryMaps::exact_map(int element, const Eigen::Vector3d& xhat) const {
  const CurvedElementMap& m = maps_[element];
  Eigen::Vector3d x = m.map(xhat);
  if (!curved_[element]) return x;

  const Eigen::Vector4d lambda(1.0 - xhat.sum(), xhat[0], xhat[1], xhat[2]);
  const auto& V = ref_tet_vertices();

  // Blend that snaps the curved boundary faces/edges onto the exact surface;
  // the correction vanishes at all Lagrange nodes.
  for (int l = 0; l < 4; ++l) {
    if (!sphere_face_[element][l]) continue;
    const double w = 1.0 - lambda[l];
    if (w <= 1e-14) continue;
    Eigen::Vector3d yhat = Eigen::Vector3d::Zero();
    for (int c = 0; c < 4; ++c)
      if (c != l) yhat += (lambda[c] / w) * V.col(c);
    const Eigen::Vector3d my = m.map(yhat);
    x += w * (geometry_.project(my) - my);
  }
  for (int k = 0; k < 6; ++k) {
    if (!sphere_edge_[element][k]) continue;
    const int a = kTetEdgeVertices[k][0], b = kTetEdgeVertices[k][1];
    const double w = lambda[a] + lambda[b];
    if (w <= 1e-14) continue;
    const Eigen::Vector3d ehat = (lambda[a] * V.col(a) + lambda[b] * V.col(b)) / w;
    const Eigen::Vector3d me = m.map(ehat);
    x += w * (geometry_.project(me) - me);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Bounds report
// ---------------------------------------------------------------------------

std::string JacobianBoundsReport::to_json() const {
  std::ostringstream os;
  os.precision(16);
  os << "{\n"
     << "  \"min_det\": " << min_det << ",\n"
     << "  \"max_det\": " << max_det << ",\n"
     << "  \"nonpositive_det_count\": " << nonpositive_det_count << ",\n"
     << "  \"max_affine_deviation\": " << max_affine_deviation << ",\n"
     << "  \"max_boundary_gap\": " << max_boundary_gap << ",\n"
     << "  \"max_second_derivative\": " << max_second_derivative << "\n"
     << "}";
  return os.str();
}

JacobianBoundsReport verify_jacobian_bounds(const GeometryMaps& maps, int sample_degree) {
  const StraightMesh& mesh = maps.mesh();
  JacobianBoundsReport rep;
  rep.min_det = std::numeric_limits<double>::max();
  rep.max_det = std::numeric_limits<double>::lowest();

  QuadratureRule rule = tet_quadrature(sample_degree);
  std::vector<Eigen::Vector3d> pts;
  for (int q = 0; q < rule.size(); ++q) pts.push_back(rule.points.row(q).transpose());
  pts.emplace_back(0, 0, 0);
  pts.emplace_back(1, 0, 0);
  pts.emplace_back(0, 1, 0);
  pts.emplace_back(0, 0, 1);

  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& m = maps.map(e);

    Eigen::Matrix3d Ja;
    {
      const Eigen::Vector3d v0 = mesh.tet_point(e, 0);
      for (int c = 0; c < 3; ++c) Ja.col(c) = mesh.tet_point(e, c + 1) - v0;
    }

    for (const auto& p : pts) {
      JacobianData jd;
      try {
        jd = m.jacobian(p);
      } catch (const GeometryError&) {
        ++rep.nonpositive_det_count;
        continue;
      }
      rep.min_det = std::min(rep.min_det, jd.J_det);
      rep.max_det = std::max(rep.max_det, jd.J_det);
      if (!m.is_affine()) {
        rep.max_affine_deviation =
            std::max(rep.max_affine_deviation, (jd.J - Ja).norm());
        double sec = 0.0;
        for (const auto& s : jd.second) sec += s.squaredNorm();
        rep.max_second_derivative = std::max(rep.max_second_derivative, std::sqrt(sec));
        rep.max_boundary_gap = std::max(
            rep.max_boundary_gap, (maps.exact_map(e, p) - m.map(p)).norm());
      }
    }
  }
  if (rep.max_det < rep.min_det) rep.min_det = rep.max_det = 0.0;
  return rep;
}

}  // namespace pstokes
