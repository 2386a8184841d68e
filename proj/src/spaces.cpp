#include "pstokes/spaces.hpp"

#include <algorithm>
#include <map>

namespace pstokes {

namespace {

int default_quad(int degree, int requested) { return requested > 0 ? requested : 2 * degree + 2; }

}  // namespace

// ---------------------------------------------------------------------------
// DofMap
// ---------------------------------------------------------------------------

DofMap::DofMap(const StraightMesh& mesh, int degree) : degree_(degree) {
  PSTOKES_REQUIRE(degree >= 1 && degree <= 3, "DofMap: degree must be in 1..3");
  const BdmReferenceBasis& basis = BdmReferenceBasis::get(degree);
  nfd_ = basis.face_dof_count();
  nint_ = basis.interior_dof_count();
  nps_ = simplex_poly_dim(degree - 1);

  n_velocity_ = mesh.n_faces() * nfd_ + mesh.n_tets() * nint_;
  n_pressure_ = mesh.n_tets() * nps_;

  const auto& fmi = basis.face_multi_indices();
  std::map<std::array<int, 3>, int> slot_of;
  for (int m = 0; m < nfd_; ++m) slot_of[fmi[m]] = m;

  const int nloc = n_local_velocity();
  vel_idx_.resize(mesh.n_tets() * nloc);
  vel_sign_.resize(mesh.n_tets() * nloc);

  for (int e = 0; e < mesh.n_tets(); ++e) {
    const auto& tet = mesh.tet(e);
    for (int l = 0; l < 4; ++l) {
      const int f = mesh.tet_face(e, l);
      const FaceRecord& rec = mesh.face(f);
      const double sign = (rec.tet[0] == e) ? 1.0 : -1.0;

      // Local face vertices in ascending local order and their global ids.
      const auto& lv = kTetFaceVertices[l];
      std::array<int, 3> g = {tet.v[lv[0]], tet.v[lv[1]], tet.v[lv[2]]};
      // rank[i] = position of g[i] among the sorted global ids of the face
      std::array<int, 3> rank;
      for (int i = 0; i < 3; ++i)
        rank[i] = static_cast<int>(std::count_if(g.begin(), g.end(),
                                                 [&](int x) { return x < g[i]; }));
      for (int m = 0; m < nfd_; ++m) {
        const auto& e_loc = fmi[m];
        std::array<int, 3> e_can{};
        for (int i = 0; i < 3; ++i) e_can[rank[i]] = e_loc[i];
        const int mc = slot_of.at(e_can);
        vel_idx_[e * nloc + l * nfd_ + m] = f * nfd_ + mc;
        vel_sign_[e * nloc + l * nfd_ + m] = sign;
      }
    }
    for (int j = 0; j < nint_; ++j) {
      vel_idx_[e * nloc + 4 * nfd_ + j] = mesh.n_faces() * nfd_ + e * nint_ + j;
      vel_sign_[e * nloc + 4 * nfd_ + j] = 1.0;
    }
  }

  for (int f = 0; f < mesh.n_faces(); ++f)
    if (mesh.face(f).kind == FaceKind::Boundary)
      for (int m = 0; m < nfd_; ++m) bnd_dofs_.push_back(f * nfd_ + m);
}

Eigen::VectorXd DofMap::local_velocity(const Eigen::VectorXd& u, int e) const {
  const int n = n_local_velocity();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out(i) = vel_sign(e, i) * u(vel_global(e, i));
  return out;
}

Eigen::VectorXd DofMap::local_pressure(const Eigen::VectorXd& p, int e) const {
  return p.segment(e * nps_, nps_);
}

// ---------------------------------------------------------------------------
// Piola evaluation
// ---------------------------------------------------------------------------

Eigen::Matrix3d piola_gradient(const JacobianData& jd, const Eigen::Vector3d& vhat,
                               const Eigen::Matrix3d& ghat) {
  Eigen::Matrix3d D;
  for (int i = 0; i < 3; ++i) D.row(i) = (jd.second[i] * vhat).transpose();
  const Eigen::Matrix3d C = vhat * jd.det_grad.transpose();
  return ((jd.J * ghat - (jd.J * C) / jd.J_det + D) * jd.J_inv) / jd.J_det;
}

Eigen::Vector3d eval_velocity_physical(const DofMap& dofs, const BdmReferenceBasis& basis,
                                       const Eigen::VectorXd& u, int element,
                                       const CurvedElementMap& map,
                                       const Eigen::Vector3d& xhat) {
  const Eigen::VectorXd c = dofs.local_velocity(u, element);
  Eigen::MatrixX3d vals;
  basis.eval(xhat, vals);
  const Eigen::Vector3d vhat = vals.transpose() * c;
  return piola_value(map.jacobian(xhat), vhat);
}

Eigen::Matrix3d eval_velocity_gradient_physical(const DofMap& dofs,
                                                const BdmReferenceBasis& basis,
                                                const Eigen::VectorXd& u, int element,
                                                const CurvedElementMap& map,
                                                const Eigen::Vector3d& xhat) {
  const Eigen::VectorXd c = dofs.local_velocity(u, element);
  Eigen::MatrixX3d vals;
  basis.eval(xhat, vals);
  std::vector<Eigen::Matrix3d> grads;
  basis.eval_grad(xhat, grads);
  const Eigen::Vector3d vhat = vals.transpose() * c;
  Eigen::Matrix3d ghat = Eigen::Matrix3d::Zero();
  for (int i = 0; i < c.size(); ++i) ghat += c(i) * grads[i];
  return piola_gradient(map.jacobian(xhat), vhat, ghat);
}

double eval_divergence_physical(const DofMap& dofs, const BdmReferenceBasis& basis,
                                const Eigen::VectorXd& u, int element,
                                const CurvedElementMap& map, const Eigen::Vector3d& xhat) {
  const Eigen::VectorXd c = dofs.local_velocity(u, element);
  Eigen::VectorXd divs;
  basis.eval_div(xhat, divs);
  return piola_divergence(map.jacobian(xhat), divs.dot(c));
}

double eval_pressure(const DofMap& dofs, const PressureReferenceBasis& basis,
                     const Eigen::VectorXd& p, int element, const Eigen::Vector3d& xhat) {
  Eigen::VectorXd vals;
  basis.eval(xhat, vals);
  return vals.dot(dofs.local_pressure(p, element));
}

// ---------------------------------------------------------------------------
// Interpolation / projection / constraints
// ---------------------------------------------------------------------------

namespace {

// Samples the Piola pullback of a physical field on the owner's reference
// face: vhat = J_d J^-1 v(M_h(xhat)).
Eigen::Matrix3Xd pullback_on_face(const VectorField& field, const CurvedElementMap& map,
                                  int lface, const QuadratureRule& tri) {
  Eigen::Matrix3Xd vhat(3, tri.size());
  for (int q = 0; q < tri.size(); ++q) {
    const Eigen::Vector3d xhat =
        BdmReferenceBasis::face_point(lface, tri.points(q, 0), tri.points(q, 1));
    const JacobianData jd = map.jacobian(xhat);
    vhat.col(q) = jd.J_det * (jd.J_inv * field(map.map(xhat)));
  }
  return vhat;
}

}  // namespace

Eigen::VectorXd bdm_interpolate(const VectorField& field, const StraightMesh& mesh,
                                const GeometryMaps& maps, const DofMap& dofs,
                                const BdmReferenceBasis& basis, int quad_degree) {
  const int deg = default_quad(dofs.degree(), quad_degree);
  const QuadratureRule tri = tri_quadrature(deg);
  const QuadratureRule tet = tet_quadrature(deg);
  const int nfd = dofs.n_face_dofs();
  const int nint = basis.interior_dof_count();
  const int nloc = dofs.n_local_velocity();

  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs.n_velocity());
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = maps.map(e);
    for (int l = 0; l < 4; ++l) {
      const int f = mesh.tet_face(e, l);
      if (mesh.face(f).tet[0] != e) continue;  // owner computes the face DOFs
      const Eigen::VectorXd local =
          basis.face_dofs_from_trace(l, tri, pullback_on_face(field, map, l, tri));
      for (int m = 0; m < nfd; ++m) u(dofs.vel_global(e, l * nfd + m)) = local(m);
    }
    if (nint > 0) {
      Eigen::Matrix3Xd vhat(3, tet.size());
      for (int q = 0; q < tet.size(); ++q) {
        const Eigen::Vector3d xhat = tet.points.row(q).transpose();
        const JacobianData jd = map.jacobian(xhat);
        vhat.col(q) = jd.J_det * (jd.J_inv * field(map.map(xhat)));
      }
      const Eigen::VectorXd local = basis.interior_dofs_from_values(tet, vhat);
      for (int j = 0; j < nint; ++j) u(dofs.vel_global(e, 4 * nfd + j)) = local(j);
    }
    (void)nloc;
  }
  return u;
}

Eigen::VectorXd pressure_project(const ScalarField& field, const StraightMesh& mesh,
                                 const GeometryMaps& maps, const DofMap& dofs,
                                 const PressureReferenceBasis& basis, int quad_degree) {
  const int deg = default_quad(dofs.degree(), quad_degree);
  const QuadratureRule tet = tet_quadrature(deg);
  const int n = dofs.n_local_pressure();

  Eigen::VectorXd p(dofs.n_pressure());
  Eigen::VectorXd psi;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = maps.map(e);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int q = 0; q < tet.size(); ++q) {
      const Eigen::Vector3d xhat = tet.points.row(q).transpose();
      const JacobianData jd = map.jacobian(xhat);
      basis.eval(xhat, psi);
      const double w = tet.weights(q) * jd.J_det;
      M.noalias() += w * (psi * psi.transpose());
      b.noalias() += (w * field(map.map(xhat))) * psi;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    PSTOKES_REQUIRE(llt.info() == Eigen::Success,
                    "pressure_project: weighted mass matrix not SPD");
    p.segment(e * n, n) = llt.solve(b);
  }
  shift_pressure_to_zero_mean(mesh, maps, dofs, basis, p, quad_degree);
  return p;
}

double domain_volume(const StraightMesh& mesh, const GeometryMaps& maps, int quad_degree) {
  const int deg = default_quad(maps.degree(), quad_degree);
  const QuadratureRule tet = tet_quadrature(deg);
  double vol = 0.0;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = maps.map(e);
    for (int q = 0; q < tet.size(); ++q)
      vol += tet.weights(q) * map.jacobian(tet.points.row(q).transpose()).J_det;
  }
  return vol;
}

double pressure_mean(const StraightMesh& mesh, const GeometryMaps& maps,
                     const DofMap& dofs, const PressureReferenceBasis& basis,
                     const Eigen::VectorXd& p, int quad_degree) {
  const int deg = default_quad(dofs.degree(), quad_degree);
  const QuadratureRule tet = tet_quadrature(deg);
  double integral = 0.0, vol = 0.0;
  Eigen::VectorXd psi;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = maps.map(e);
    const Eigen::VectorXd c = dofs.local_pressure(p, e);
    for (int q = 0; q < tet.size(); ++q) {
      const Eigen::Vector3d xhat = tet.points.row(q).transpose();
      const double w = tet.weights(q) * map.jacobian(xhat).J_det;
      basis.eval(xhat, psi);
      integral += w * psi.dot(c);
      vol += w;
    }
  }
  return integral / vol;
}

void shift_pressure_to_zero_mean(const StraightMesh& mesh, const GeometryMaps& maps,
                                 const DofMap& dofs, const PressureReferenceBasis& basis,
                                 Eigen::VectorXd& p, int quad_degree) {
  const double mean = pressure_mean(mesh, maps, dofs, basis, p, quad_degree);
  const double c0 = mean * basis.constant_coefficient();
  for (int e = 0; e < mesh.n_tets(); ++e) p(e * dofs.n_local_pressure()) -= c0;
}

NormalTraceConstraints normal_trace_constraints(const StraightMesh& mesh,
                                                const GeometryMaps& maps,
                                                const DofMap& dofs,
                                                const BdmReferenceBasis& basis,
                                                const VectorField* g, int quad_degree) {
  NormalTraceConstraints out;
  out.dofs = dofs.boundary_normal_dofs();
  out.values = Eigen::VectorXd::Zero(out.dofs.size());
  if (g == nullptr) return out;

  const int deg = default_quad(dofs.degree(), quad_degree);
  const QuadratureRule tri = tri_quadrature(deg);
  const int nfd = dofs.n_face_dofs();

  std::map<int, int> slot;  // global dof -> index in out.dofs
  for (size_t i = 0; i < out.dofs.size(); ++i) slot[out.dofs[i]] = static_cast<int>(i);

  for (int e = 0; e < mesh.n_tets(); ++e) {
    for (int l = 0; l < 4; ++l) {
      const int f = mesh.tet_face(e, l);
      if (mesh.face(f).kind != FaceKind::Boundary) continue;
      const Eigen::VectorXd local = basis.face_dofs_from_trace(
          l, tri, pullback_on_face(*g, maps.map(e), l, tri));
      for (int m = 0; m < nfd; ++m)
        out.values(slot.at(dofs.vel_global(e, l * nfd + m))) = local(m);
    }
  }
  return out;
}

}  // namespace pstokes
