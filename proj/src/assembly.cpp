#include "pstokes/assembly.hpp"

#include <fstream>

namespace pstokes {

namespace {

struct VolumeTable {
  QuadratureRule rule;
  std::vector<Eigen::MatrixX3d> values;
  std::vector<std::vector<Eigen::Matrix3d>> grads;
  std::vector<Eigen::VectorXd> divs;
};

VolumeTable build_volume_table(const BdmReferenceBasis& basis, int quad_degree) {
  VolumeTable t;
  t.rule = tet_quadrature(quad_degree);
  t.values.resize(t.rule.size());
  t.grads.resize(t.rule.size());
  t.divs.resize(t.rule.size());
  for (int q = 0; q < t.rule.size(); ++q) {
    const Eigen::Vector3d x = t.rule.points.row(q).transpose();
    basis.eval(x, t.values[q]);
    basis.eval_grad(x, t.grads[q]);
    basis.eval_div(x, t.divs[q]);
  }
  return t;
}

}  // namespace

FaceContext build_face_context(const StokesDiscretization& d, int face,
                               const QuadratureRule& tri) {
  const StraightMesh& mesh = *d.mesh;
  const FaceRecord& rec = mesh.face(face);
  FaceContext ctx;
  ctx.face = face;
  ctx.boundary = rec.kind == FaceKind::Boundary;
  ctx.nq = tri.size();
  const int nsides = ctx.boundary ? 1 : 2;

  // local positions of the sorted global face vertices within each element
  std::array<std::array<int, 3>, 2> loc{};
  for (int s = 0; s < nsides; ++s) {
    ctx.element[s] = rec.tet[s];
    ctx.lface[s] = rec.local_face[s];
    const auto& tv = mesh.tet(rec.tet[s]).v;
    for (int i = 0; i < 3; ++i) {
      for (int p = 0; p < 4; ++p)
        if (tv[p] == rec.v[i]) loc[s][i] = p;
    }
  }

  const auto& V = ref_tet_vertices();
  const CurvedElementMap& owner = d.maps->map(ctx.element[0]);
  const Eigen::Vector3d nhat = BdmReferenceBasis::face_unit_normal(ctx.lface[0]);
  const double area_jac = BdmReferenceBasis::face_area_jacobian(ctx.lface[0]);

  ctx.xhat0.resize(ctx.nq);
  ctx.xhat1.resize(ctx.boundary ? 0 : ctx.nq);
  ctx.xphys.resize(ctx.nq);
  ctx.normal.resize(ctx.nq);
  ctx.wds.resize(ctx.nq);

  for (int q = 0; q < ctx.nq; ++q) {
    const double s = tri.points(q, 0), t = tri.points(q, 1);
    const Eigen::Vector3d lambda(1.0 - s - t, s, t);
    Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i) x0 += lambda[i] * V.col(loc[0][i]);
    ctx.xhat0[q] = x0;
    if (!ctx.boundary) {
      Eigen::Vector3d x1 = Eigen::Vector3d::Zero();
      for (int i = 0; i < 3; ++i) x1 += lambda[i] * V.col(loc[1][i]);
      ctx.xhat1[q] = x1;
    }
    const JacobianData jd = owner.jacobian(x0);
    const Eigen::Vector3d nt = jd.J_inv.transpose() * nhat;
    ctx.xphys[q] = owner.map(x0);
    ctx.normal[q] = nt.normalized();
    ctx.wds[q] = tri.weights(q) * area_jac * jd.J_det * nt.norm();
  }

  if (d.config.penalty_reference_diameter) {
    ctx.h_penalty = rec.diameter;
  } else {
    // physical face diameter sampled on corner + edge-midpoint images
    const double st[6][2] = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0, 0.5}, {0.5, 0.5}};
    Eigen::Matrix3Xd pts(3, 6);
    for (int i = 0; i < 6; ++i) {
      Eigen::Vector3d x = Eigen::Vector3d::Zero();
      const Eigen::Vector3d lam(1.0 - st[i][0] - st[i][1], st[i][0], st[i][1]);
      for (int j = 0; j < 3; ++j) x += lam[j] * V.col(loc[0][j]);
      pts.col(i) = owner.map(x);
    }
    double h = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) h = std::max(h, (pts.col(i) - pts.col(j)).norm());
    ctx.h_penalty = h;
  }
  return ctx;
}

SideTrace build_side_trace(const StokesDiscretization& d, const FaceContext& ctx, int side) {
  SideTrace tr;
  const CurvedElementMap& map = d.maps->map(ctx.element[side]);
  const auto& xhat = (side == 0) ? ctx.xhat0 : ctx.xhat1;
  const int n = d.vbasis->size();
  tr.values.resize(ctx.nq);
  tr.grads.resize(ctx.nq);
  Eigen::MatrixX3d vals;
  std::vector<Eigen::Matrix3d> ghat;
  for (int q = 0; q < ctx.nq; ++q) {
    const JacobianData jd = map.jacobian(xhat[q]);
    d.vbasis->eval(xhat[q], vals);
    d.vbasis->eval_grad(xhat[q], ghat);
    tr.values[q].resize(3, n);
    tr.grads[q].resize(n);
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d vhat = vals.row(i).transpose();
      tr.values[q].col(i) = piola_value(jd, vhat);
      tr.grads[q][i] = piola_gradient(jd, vhat, ghat[i]);
    }
  }
  return tr;
}

namespace {

// Shared kernel for a_DG and the energy-norm Gram matrix.
SpMat assemble_velocity_form(const StokesDiscretization& d, bool consistency,
                             double penalty) {
  const StraightMesh& mesh = *d.mesh;
  const DofMap& dofs = *d.dofmap;
  const int n = d.vbasis->size();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh.n_tets()) * n * n +
               static_cast<size_t>(mesh.n_faces()) * 4 * n * n);

  // volume term
  const VolumeTable table = build_volume_table(*d.vbasis, d.volume_quad());
  std::vector<Eigen::Matrix3d> G(n);
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < table.rule.size(); ++q) {
      const JacobianData jd = map.jacobian(table.rule.points.row(q).transpose());
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector3d vhat = table.values[q].row(i).transpose();
        G[i] = piola_gradient(jd, vhat, table.grads[q][i]);
      }
      const double w = table.rule.weights(q) * jd.J_det;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double v = w * G[i].cwiseProduct(G[j]).sum();
          local(i, j) += v;
          if (j > i) local(j, i) += v;
        }
    }
    for (int i = 0; i < n; ++i) {
      const int gi = dofs.vel_global(e, i);
      const double si = dofs.vel_sign(e, i);
      for (int j = 0; j < n; ++j)
        trip.emplace_back(gi, dofs.vel_global(e, j), si * dofs.vel_sign(e, j) * local(i, j));
    }
  }

  // face terms
  const QuadratureRule tri = tri_quadrature(d.face_quad());
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const FaceContext ctx = build_face_context(d, f, tri);
    const int nsides = ctx.boundary ? 1 : 2;
    const double avg = ctx.boundary ? 1.0 : 0.5;
    const double pen = penalty / ctx.h_penalty;

    std::array<SideTrace, 2> tr;
    for (int s = 0; s < nsides; ++s) tr[s] = build_side_trace(d, ctx, s);

    const int m = nsides * n;
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(m, m);
    for (int q = 0; q < ctx.nq; ++q) {
      const double w = ctx.wds[q];
      for (int si = 0; si < nsides; ++si) {
        const double ni_sign = (si == 0) ? 1.0 : -1.0;
        for (int sj = 0; sj < nsides; ++sj) {
          const double nj_sign = (sj == 0) ? 1.0 : -1.0;
          const Eigen::Vector3d nj = nj_sign * ctx.normal[q];
          const double nn = ni_sign * nj_sign;
          for (int i = 0; i < n; ++i) {
            const Eigen::Vector3d vi = tr[si].values[q].col(i);
            const Eigen::Vector3d Gi_nj = tr[si].grads[q][i] * nj;
            for (int j = 0; j < n; ++j) {
              const Eigen::Vector3d vj = tr[sj].values[q].col(j);
              double term = pen * nn * vi.dot(vj);
              if (consistency) {
                // -{grad phi_i}:[[phi_j]] - {grad phi_j}:[[phi_i]]
                const Eigen::Vector3d ni = ni_sign * ctx.normal[q];
                const Eigen::Vector3d Gj_ni = tr[sj].grads[q][j] * ni;
                term -= avg * (Gi_nj.dot(vj) + Gj_ni.dot(vi));
              }
              local(si * n + i, sj * n + j) += w * term;
            }
          }
        }
      }
    }
    for (int si = 0; si < nsides; ++si)
      for (int i = 0; i < n; ++i) {
        const int gi = dofs.vel_global(ctx.element[si], i);
        const double sgi = dofs.vel_sign(ctx.element[si], i);
        for (int sj = 0; sj < nsides; ++sj)
          for (int j = 0; j < n; ++j)
            trip.emplace_back(gi, dofs.vel_global(ctx.element[sj], j),
                              sgi * dofs.vel_sign(ctx.element[sj], j) *
                                  local(si * n + i, sj * n + j));
      }
  }

  SpMat A(dofs.n_velocity(), dofs.n_velocity());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

}  // namespace

SpMat assemble_a_dg(const StokesDiscretization& d) {
  PSTOKES_REQUIRE(d.config.alpha > 0.0, "assemble_a_dg: alpha must be positive");
  return assemble_velocity_form(d, true, d.config.alpha);
}

SpMat assemble_energy_gram(const StokesDiscretization& d) {
  return assemble_velocity_form(d, false, 1.0);
}

SpMat assemble_div(const StokesDiscretization& d) {
  const StraightMesh& mesh = *d.mesh;
  const DofMap& dofs = *d.dofmap;
  const int n = d.vbasis->size();
  const int np = dofs.n_local_pressure();

  // (div u, q)_{Omega_h} pulls back to a plain reference integral.
  const QuadratureRule rule = tet_quadrature(2 * d.degree());
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(np, n);
  Eigen::VectorXd divs, psi;
  for (int q = 0; q < rule.size(); ++q) {
    const Eigen::Vector3d x = rule.points.row(q).transpose();
    d.vbasis->eval_div(x, divs);
    d.pbasis->eval(x, psi);
    local.noalias() += rule.weights(q) * (psi * divs.transpose());
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh.n_tets()) * n * np);
  for (int e = 0; e < mesh.n_tets(); ++e)
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < n; ++j)
        trip.emplace_back(dofs.pressure_global(e, i), dofs.vel_global(e, j),
                          dofs.vel_sign(e, j) * local(i, j));

  SpMat B(dofs.n_pressure(), dofs.n_velocity());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

SpMat assemble_pressure_mass(const StokesDiscretization& d) {
  const StraightMesh& mesh = *d.mesh;
  const DofMap& dofs = *d.dofmap;
  const int np = dofs.n_local_pressure();
  const QuadratureRule rule = tet_quadrature(d.volume_quad());

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh.n_tets()) * np * np);
  Eigen::VectorXd psi;
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(np, np);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d x = rule.points.row(q).transpose();
      d.pbasis->eval(x, psi);
      local.noalias() += (rule.weights(q) * map.jacobian(x).J_det) * (psi * psi.transpose());
    }
    for (int i = 0; i < np; ++i)
      for (int j = 0; j < np; ++j)
        trip.emplace_back(dofs.pressure_global(e, i), dofs.pressure_global(e, j),
                          local(i, j));
  }
  SpMat M(dofs.n_pressure(), dofs.n_pressure());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::VectorXd assemble_rhs(const StokesDiscretization& d, const VectorField& f,
                             RhsMode mode) {
  const StraightMesh& mesh = *d.mesh;
  const DofMap& dofs = *d.dofmap;
  const int n = d.vbasis->size();
  const VolumeTable table = build_volume_table(*d.vbasis, d.volume_quad());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs.n_velocity());
  for (int e = 0; e < mesh.n_tets(); ++e) {
    const CurvedElementMap& map = d.maps->map(e);
    const bool pullback = mode == RhsMode::Pullback && d.maps->element_is_curved(e);
    Eigen::VectorXd local = Eigen::VectorXd::Zero(n);
    for (int q = 0; q < table.rule.size(); ++q) {
      const Eigen::Vector3d xhat = table.rule.points.row(q).transpose();
      const JacobianData jd = map.jacobian(xhat);
      const Eigen::Vector3d x = pullback ? d.maps->exact_map(e, xhat) : map.map(xhat);
      // (f, v): J_det from the measure cancels the Piola 1/J_det.
      const Eigen::Vector3d jf = table.rule.weights(q) * (jd.J.transpose() * f(x));
      local.noalias() += table.values[q] * jf;
    }
    for (int i = 0; i < n; ++i)
      rhs(dofs.vel_global(e, i)) += dofs.vel_sign(e, i) * local(i);
  }
  return rhs;
}

BoundaryLift assemble_boundary_lift(const StokesDiscretization& d, const VectorField& g) {
  const StraightMesh& mesh = *d.mesh;
  const DofMap& dofs = *d.dofmap;
  const int n = d.vbasis->size();
  const QuadratureRule tri = tri_quadrature(d.face_quad());

  BoundaryLift lift;
  lift.velocity = Eigen::VectorXd::Zero(dofs.n_velocity());
  // The normal component of g is enforced strongly through the face-moment
  // constraints, so the mass-equation boundary term carries only the
  // tangential remainder and vanishes identically.
  lift.pressure = Eigen::VectorXd::Zero(dofs.n_pressure());

  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.face(f).kind != FaceKind::Boundary) continue;
    const FaceContext ctx = build_face_context(d, f, tri);
    const SideTrace tr = build_side_trace(d, ctx, 0);
    const int e = ctx.element[0];
    const double pen = d.config.alpha / ctx.h_penalty;

    Eigen::VectorXd local = Eigen::VectorXd::Zero(n);
    for (int q = 0; q < ctx.nq; ++q) {
      const Eigen::Vector3d gq = g(ctx.xphys[q]);
      const Eigen::Vector3d& nq = ctx.normal[q];
      for (int i = 0; i < n; ++i) {
        const double consistency = (tr.grads[q][i] * nq).dot(gq);
        const double penalty = pen * tr.values[q].col(i).dot(gq);
        local(i) += ctx.wds[q] * (penalty - consistency);
      }
    }
    for (int i = 0; i < n; ++i)
      lift.velocity(dofs.vel_global(e, i)) += dofs.vel_sign(e, i) * local(i);
  }
  return lift;
}

BlockSystem build_stokes_system(const StokesDiscretization& d, const VectorField& f,
                                RhsMode mode, const VectorField* g) {
  BlockSystem sys;
  sys.alpha = d.config.alpha;
  sys.nu = d.config.nu;
  sys.A = d.config.nu * assemble_a_dg(d);
  sys.B = assemble_div(d);
  sys.rhs_u = assemble_rhs(d, f, mode);
  sys.rhs_p = Eigen::VectorXd::Zero(d.dofmap->n_pressure());

  if (g != nullptr) {
    const BoundaryLift lift = assemble_boundary_lift(d, *g);
    sys.rhs_u += d.config.nu * lift.velocity;
    sys.rhs_p += lift.pressure;
  }
  const NormalTraceConstraints nc =
      normal_trace_constraints(*d.mesh, *d.maps, *d.dofmap, *d.vbasis, g);
  sys.constrained = nc.dofs;
  sys.constrained_values = nc.values;
  return sys;
}

void write_matrix_market(const SpMat& m, const std::string& path) {
  std::ofstream out(path);
  PSTOKES_REQUIRE(out.good(), "write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  out.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace pstokes
