#include "pstokes/lifting.hpp"

namespace pstokes {

LiftingWorkspace::LiftingWorkspace(const StokesDiscretization& d) {
  const StraightMesh& mesh = *d.mesh;
  const int n = d.vbasis->size();
  const QuadratureRule rule = tet_quadrature(d.volume_quad());

  gram_.resize(mesh.n_tets());
  eigvec_.resize(mesh.n_tets());
  eigval_.resize(mesh.n_tets());
  rank_.resize(mesh.n_tets());

  Eigen::MatrixX3d vals;
  std::vector<Eigen::Matrix3d> ghat, G(n);
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d xhat = rule.points.row(q).transpose();
      const JacobianData jd = map.jacobian(xhat);
      d.vbasis->eval(xhat, vals);
      d.vbasis->eval_grad(xhat, ghat);
      for (int i = 0; i < n; ++i)
        G[i] = piola_gradient(jd, vals.row(i).transpose(), ghat[i]);
      const double w = rule.weights(q) * jd.J_det;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double v = w * G[i].cwiseProduct(G[j]).sum();
          gram(i, j) += v;
          if (j > i) gram(j, i) += v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    PSTOKES_REQUIRE(es.info() == Eigen::Success, "LiftingWorkspace: eigensolve failed");
    gram_[e] = std::move(gram);
    eigvec_[e] = es.eigenvectors();
    eigval_[e] = es.eigenvalues();
    const double tol = 1e-10 * std::max(eigval_[e].cwiseAbs().maxCoeff(), 1e-300);
    rank_[e] = static_cast<int>((eigval_[e].array() > tol).count());
  }
}

Eigen::VectorXd LiftingWorkspace::pinv_solve(int element, const Eigen::VectorXd& r) const {
  const Eigen::MatrixXd& V = eigvec_[element];
  const Eigen::VectorXd& lam = eigval_[element];
  const double tol = 1e-10 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd y = V.transpose() * r;
  for (int i = 0; i < y.size(); ++i) y(i) = (lam(i) > tol) ? y(i) / lam(i) : 0.0;
  return V * y;
}

LiftedFace lift_face(const StokesDiscretization& d, const LiftingWorkspace& ws,
                     const FaceContext& ctx, const JumpEvaluator& jump) {
  const int n = d.vbasis->size();
  const int nsides = ctx.boundary ? 1 : 2;
  const double avg = ctx.boundary ? 1.0 : 0.5;

  LiftedFace out;
  out.element = ctx.element;
  double norm2 = 0.0;
  std::vector<Eigen::Matrix3d> jumps(ctx.nq);
  for (int q = 0; q < ctx.nq; ++q) jumps[q] = jump(q);

  for (int s = 0; s < nsides; ++s) {
    const SideTrace tr = build_side_trace(d, ctx, s);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (int q = 0; q < ctx.nq; ++q) {
      const double w = ctx.wds[q] * avg;
      for (int i = 0; i < n; ++i)
        r(i) += w * jumps[q].cwiseProduct(tr.grads[q][i]).sum();
    }
    out.coeff[s] = ws.pinv_solve(ctx.element[s], r);
    norm2 += out.coeff[s].dot(ws.gram(ctx.element[s]) * out.coeff[s]);
  }
  out.norm = std::sqrt(std::max(norm2, 0.0));
  return out;
}

JumpEvaluator coefficient_jump(const StokesDiscretization& d, const FaceContext& ctx,
                               const std::array<SideTrace, 2>& traces,
                               const Eigen::VectorXd& u) {
  const int nsides = ctx.boundary ? 1 : 2;
  std::array<Eigen::VectorXd, 2> local;
  for (int s = 0; s < nsides; ++s)
    local[s] = d.dofmap->local_velocity(u, ctx.element[s]);
  return [=, &ctx](int q) {
    Eigen::Matrix3d jmp =
        (traces[0].values[q] * local[0]) * ctx.normal[q].transpose();
    if (!ctx.boundary)
      jmp -= (traces[1].values[q] * local[1]) * ctx.normal[q].transpose();
    return jmp;
  };
}

double a_dg_via_lifting(const StokesDiscretization& d, const LiftingWorkspace& ws,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const StraightMesh& mesh = *d.mesh;
  double acc = 0.0;

  // (grad_h u, grad_h v)
  const QuadratureRule rule = tet_quadrature(d.volume_quad());
  Eigen::MatrixX3d vals;
  std::vector<Eigen::Matrix3d> ghat;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    const Eigen::VectorXd cu = d.dofmap->local_velocity(u, e);
    const Eigen::VectorXd cv = d.dofmap->local_velocity(v, e);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d xhat = rule.points.row(q).transpose();
      const JacobianData jd = map.jacobian(xhat);
      d.vbasis->eval(xhat, vals);
      d.vbasis->eval_grad(xhat, ghat);
      Eigen::Matrix3d Gu = Eigen::Matrix3d::Zero(), Gv = Eigen::Matrix3d::Zero(),
                      ghu = Eigen::Matrix3d::Zero(), ghv = Eigen::Matrix3d::Zero();
      for (int i = 0; i < cu.size(); ++i) {
        ghu += cu(i) * ghat[i];
        ghv += cv(i) * ghat[i];
      }
      const Eigen::Vector3d vu = vals.transpose() * cu;
      const Eigen::Vector3d vv = vals.transpose() * cv;
      Gu = piola_gradient(jd, vu, ghu);
      Gv = piola_gradient(jd, vv, ghv);
      acc += rule.weights(q) * jd.J_det * Gu.cwiseProduct(Gv).sum();
    }
  }

  // face terms through the liftings plus the penalty
  const QuadratureRule tri = tri_quadrature(d.face_quad());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const FaceContext ctx = build_face_context(d, f, tri);
    const int nsides = ctx.boundary ? 1 : 2;
    std::array<SideTrace, 2> tr;
    for (int s = 0; s < nsides; ++s) tr[s] = build_side_trace(d, ctx, s);

    const LiftedFace lift_u = lift_face(d, ws, ctx, coefficient_jump(d, ctx, tr, u));
    const LiftedFace lift_v = lift_face(d, ws, ctx, coefficient_jump(d, ctx, tr, v));

    for (int s = 0; s < nsides; ++s) {
      const int e = ctx.element[s];
      // (grad w, L_F)_K = a_w^T G_K c since grad w|_K lies in S_h(K)
      const Eigen::VectorXd cu = d.dofmap->local_velocity(u, e);
      const Eigen::VectorXd cv = d.dofmap->local_velocity(v, e);
      acc -= cu.dot(ws.gram(e) * lift_v.coeff[s]);
      acc -= cv.dot(ws.gram(e) * lift_u.coeff[s]);
    }

    const double pen = d.config.alpha / ctx.h_penalty;
    for (int q = 0; q < ctx.nq; ++q) {
      Eigen::Vector3d ju = tr[0].values[q] * d.dofmap->local_velocity(u, ctx.element[0]);
      Eigen::Vector3d jv = tr[0].values[q] * d.dofmap->local_velocity(v, ctx.element[0]);
      if (!ctx.boundary) {
        ju -= tr[1].values[q] * d.dofmap->local_velocity(u, ctx.element[1]);
        jv -= tr[1].values[q] * d.dofmap->local_velocity(v, ctx.element[1]);
      }
      acc += pen * ctx.wds[q] * ju.dot(jv);
    }
  }
  return acc;
}

}  // namespace pstokes
