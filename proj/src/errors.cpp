#include "pstokes/errors.hpp"

namespace pstokes {

double energy_norm_error(const StokesDiscretization& d, const VectorField& u_exact,
                         const MatrixField& grad_exact, const Eigen::VectorXd& u) {
  const StraightMesh& mesh = *d.mesh;
  double acc = 0.0;

  const QuadratureRule tet = tet_quadrature(d.error_quad());
  Eigen::MatrixX3d vals;
  std::vector<Eigen::Matrix3d> ghat;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    const Eigen::VectorXd c = d.dofmap->local_velocity(u, e);
    for (int q = 0; q < tet.size(); ++q) {
      const Eigen::Vector3d xhat = tet.points.row(q).transpose();
      const JacobianData jd = map.jacobian(xhat);
      d.vbasis->eval(xhat, vals);
      d.vbasis->eval_grad(xhat, ghat);
      Eigen::Matrix3d gh = Eigen::Matrix3d::Zero();
      for (int i = 0; i < c.size(); ++i) gh += c(i) * ghat[i];
      const Eigen::Matrix3d G = piola_gradient(jd, vals.transpose() * c, gh);
      const Eigen::Matrix3d diff = grad_exact(map.map(xhat)) - G;
      acc += tet.weights(q) * jd.J_det * diff.squaredNorm();
    }
  }

  const QuadratureRule tri = tri_quadrature(d.error_quad());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const FaceContext ctx = build_face_context(d, f, tri);
    const int nsides = ctx.boundary ? 1 : 2;
    std::array<SideTrace, 2> tr;
    std::array<Eigen::VectorXd, 2> c;
    for (int s = 0; s < nsides; ++s) {
      tr[s] = build_side_trace(d, ctx, s);
      c[s] = d.dofmap->local_velocity(u, ctx.element[s]);
    }
    double jterm = 0.0;
    for (int q = 0; q < ctx.nq; ++q) {
      Eigen::Vector3d w0 = u_exact(ctx.xphys[q]) - tr[0].values[q] * c[0];
      if (ctx.boundary) {
        jterm += ctx.wds[q] * w0.squaredNorm();
      } else {
        const Eigen::Vector3d w1 = u_exact(ctx.xphys[q]) - tr[1].values[q] * c[1];
        jterm += ctx.wds[q] * (w0 - w1).squaredNorm();
      }
    }
    acc += jterm / ctx.h_penalty;
  }
  return std::sqrt(acc);
}

double pressure_l2_error(const StokesDiscretization& d, const ScalarField& p_exact,
                         const Eigen::VectorXd& p) {
  const StraightMesh& mesh = *d.mesh;
  const QuadratureRule tet = tet_quadrature(d.error_quad());

  // mean of the exact pressure and of p_h over Omega_h
  double mean_pe = 0.0, mean_ph = 0.0, vol = 0.0;
  Eigen::VectorXd psi;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    const Eigen::VectorXd c = d.dofmap->local_pressure(p, e);
    for (int q = 0; q < tet.size(); ++q) {
      const Eigen::Vector3d xhat = tet.points.row(q).transpose();
      const double w = tet.weights(q) * map.jacobian(xhat).J_det;
      d.pbasis->eval(xhat, psi);
      mean_pe += w * p_exact(map.map(xhat));
      mean_ph += w * psi.dot(c);
      vol += w;
    }
  }
  mean_pe /= vol;
  mean_ph /= vol;

  double acc = 0.0;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    const Eigen::VectorXd c = d.dofmap->local_pressure(p, e);
    for (int q = 0; q < tet.size(); ++q) {
      const Eigen::Vector3d xhat = tet.points.row(q).transpose();
      const double w = tet.weights(q) * map.jacobian(xhat).J_det;
      d.pbasis->eval(xhat, psi);
      const double diff = (p_exact(map.map(xhat)) - mean_pe) - (psi.dot(c) - mean_ph);
      acc += w * diff * diff;
    }
  }
  return std::sqrt(acc);
}

double divergence_l2(const StokesDiscretization& d, const Eigen::VectorXd& u) {
  const StraightMesh& mesh = *d.mesh;
  const QuadratureRule tet = tet_quadrature(d.volume_quad());
  double acc = 0.0;
  Eigen::VectorXd divs;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    const Eigen::VectorXd c = d.dofmap->local_velocity(u, e);
    for (int q = 0; q < tet.size(); ++q) {
      const Eigen::Vector3d xhat = tet.points.row(q).transpose();
      const JacobianData jd = map.jacobian(xhat);
      d.vbasis->eval_div(xhat, divs);
      const double dv = divs.dot(c) / jd.J_det;
      acc += tet.weights(q) * jd.J_det * dv * dv;
    }
  }
  return std::sqrt(acc);
}

double max_pointwise_divergence(const StokesDiscretization& d, const Eigen::VectorXd& u) {
  const StraightMesh& mesh = *d.mesh;
  const QuadratureRule tet = tet_quadrature(d.volume_quad());
  double worst = 0.0;
  Eigen::VectorXd divs;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    const Eigen::VectorXd c = d.dofmap->local_velocity(u, e);
    for (int q = 0; q < tet.size(); ++q) {
      const Eigen::Vector3d xhat = tet.points.row(q).transpose();
      d.vbasis->eval_div(xhat, divs);
      worst = std::max(worst, std::abs(divs.dot(c) / map.jacobian(xhat).J_det));
    }
  }
  return worst;
}

double boundary_flux(const StokesDiscretization& d, const Eigen::VectorXd& u) {
  const StraightMesh& mesh = *d.mesh;
  const QuadratureRule tri = tri_quadrature(d.face_quad());
  double flux = 0.0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.face(f).kind != FaceKind::Boundary) continue;
    const FaceContext ctx = build_face_context(d, f, tri);
    const SideTrace tr = build_side_trace(d, ctx, 0);
    const Eigen::VectorXd c = d.dofmap->local_velocity(u, ctx.element[0]);
    for (int q = 0; q < ctx.nq; ++q)
      flux += ctx.wds[q] * ctx.normal[q].dot(tr.values[q] * c);
  }
  return flux;
}

double cut_plane_flux(const StokesDiscretization& d, const Eigen::VectorXd& u, int axis,
                      double threshold) {
  const StraightMesh& mesh = *d.mesh;
  const QuadratureRule tri = tri_quadrature(d.face_quad());
  auto above = [&](int e) {
    Eigen::Vector3d cen = Eigen::Vector3d::Zero();
    for (int i = 0; i < 4; ++i) cen += 0.25 * mesh.tet_point(e, i);
    return cen[axis] > threshold;
  };
  double flux = 0.0;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const FaceRecord& rec = mesh.face(f);
    if (rec.kind != FaceKind::Interior) continue;
    const bool a0 = above(rec.tet[0]), a1 = above(rec.tet[1]);
    if (a0 == a1) continue;
    const FaceContext ctx = build_face_context(d, f, tri);
    const SideTrace tr = build_side_trace(d, ctx, 0);
    const Eigen::VectorXd c = d.dofmap->local_velocity(u, ctx.element[0]);
    // orient the contribution from the lower to the upper side
    const double orient = a0 ? -1.0 : 1.0;
    for (int q = 0; q < ctx.nq; ++q)
      flux += orient * ctx.wds[q] * ctx.normal[q].dot(tr.values[q] * c);
  }
  return flux;
}

}  // namespace pstokes
