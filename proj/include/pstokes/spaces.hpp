#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "pstokes/basis.hpp"
#include "pstokes/geometry.hpp"
#include "pstokes/mesh.hpp"

namespace pstokes {

struct FieldCoefficients {
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
};

using VectorField = std::function<Eigen::Vector3d(const Eigen::Vector3d&)>;
using ScalarField = std::function<double(const Eigen::Vector3d&)>;

/// Global numbering of velocity (BDM) and pressure DOFs.
///
/// Velocity DOFs are face-major: global face f contributes face_dof_count
/// slots starting at f * n_face_dofs, ordered by the canonical multi-indices
/// of BdmReferenceBasis attached to the face's sorted global vertex ids; the
/// face normal is the one of the owner element (FaceRecord::tet[0]). Interior
/// DOFs follow, element by element. Pressure DOFs are element-local.
///
/// For each element, local DOF i carries (global index, sign): the reference
/// coefficient of a global field on the element is sign * u[global].
class DofMap {
 public:
  DofMap(const StraightMesh& mesh, int degree);

  int degree() const { return degree_; }
  int n_velocity() const { return n_velocity_; }
  int n_pressure() const { return n_pressure_; }
  int n_local_velocity() const { return 4 * nfd_ + nint_; }
  int n_local_pressure() const { return nps_; }
  int n_face_dofs() const { return nfd_; }

  int vel_global(int e, int i) const { return vel_idx_[e * n_local_velocity() + i]; }
  double vel_sign(int e, int i) const { return vel_sign_[e * n_local_velocity() + i]; }
  int pressure_global(int e, int i) const { return e * nps_ + i; }

  /// Face-moment DOFs living on boundary faces (the normal trace on Gamma_h).
  const std::vector<int>& boundary_normal_dofs() const { return bnd_dofs_; }

  /// Signed local velocity coefficients of element e.
  Eigen::VectorXd local_velocity(const Eigen::VectorXd& u, int e) const;
  Eigen::VectorXd local_pressure(const Eigen::VectorXd& p, int e) const;

 private:
  int degree_, nfd_, nint_, nps_;
  int n_velocity_ = 0, n_pressure_ = 0;
  std::vector<int> vel_idx_;
  std::vector<double> vel_sign_;
  std::vector<int> bnd_dofs_;
};

/// Piola push-forward of a reference value: v = (1/J_d) J vhat.
inline Eigen::Vector3d piola_value(const JacobianData& jd, const Eigen::Vector3d& vhat) {
  return (jd.J * vhat) / jd.J_det;
}

/// Transformed gradient of a Piola field:
///   grad v = (1/J_d) J Ghat J^-1 - (1/J_d^2) J C J^-1 + (1/J_d) D J^-1,
/// C_ij = vhat_i d(J_d)/dxhat_j,  D_ij = sum_k vhat_k d2 x_i/(dxhat_j dxhat_k).
Eigen::Matrix3d piola_gradient(const JacobianData& jd, const Eigen::Vector3d& vhat,
                               const Eigen::Matrix3d& ghat);

/// Transformed divergence: div v = (1/J_d) divhat vhat.
inline double piola_divergence(const JacobianData& jd, double divhat) {
  return divhat / jd.J_det;
}

Eigen::Vector3d eval_velocity_physical(const DofMap& dofs, const BdmReferenceBasis& basis,
                                       const Eigen::VectorXd& u, int element,
                                       const CurvedElementMap& map,
                                       const Eigen::Vector3d& xhat);

Eigen::Matrix3d eval_velocity_gradient_physical(const DofMap& dofs,
                                                const BdmReferenceBasis& basis,
                                                const Eigen::VectorXd& u, int element,
                                                const CurvedElementMap& map,
                                                const Eigen::Vector3d& xhat);

double eval_divergence_physical(const DofMap& dofs, const BdmReferenceBasis& basis,
                                const Eigen::VectorXd& u, int element,
                                const CurvedElementMap& map, const Eigen::Vector3d& xhat);

double eval_pressure(const DofMap& dofs, const PressureReferenceBasis& basis,
                     const Eigen::VectorXd& p, int element, const Eigen::Vector3d& xhat);

/// Parametric BDM interpolation: applies the reference DOF functionals to the
/// Piola pullback of the field on each element; shared face DOFs are computed
/// once, from the face's owner element.
Eigen::VectorXd bdm_interpolate(const VectorField& field, const StraightMesh& mesh,
                                const GeometryMaps& maps, const DofMap& dofs,
                                const BdmReferenceBasis& basis, int quad_degree = 0);

/// Weighted L2 projection onto the pressure space (J_d-weighted reference
/// mass systems), shifted to zero mean over Omega_h.
Eigen::VectorXd pressure_project(const ScalarField& field, const StraightMesh& mesh,
                                 const GeometryMaps& maps, const DofMap& dofs,
                                 const PressureReferenceBasis& basis, int quad_degree = 0);

double domain_volume(const StraightMesh& mesh, const GeometryMaps& maps,
                     int quad_degree = 0);

double pressure_mean(const StraightMesh& mesh, const GeometryMaps& maps,
                     const DofMap& dofs, const PressureReferenceBasis& basis,
                     const Eigen::VectorXd& p, int quad_degree = 0);

void shift_pressure_to_zero_mean(const StraightMesh& mesh, const GeometryMaps& maps,
                                 const DofMap& dofs, const PressureReferenceBasis& basis,
                                 Eigen::VectorXd& p, int quad_degree = 0);

struct NormalTraceConstraints {
  std::vector<int> dofs;      // ascending
  Eigen::VectorXd values;     // aligned with dofs
};

/// Strong constraints on the boundary normal-trace DOFs: zero for homogeneous
/// data, otherwise the face moments of g (normal part of the Dirichlet data).
NormalTraceConstraints normal_trace_constraints(const StraightMesh& mesh,
                                                const GeometryMaps& maps,
                                                const DofMap& dofs,
                                                const BdmReferenceBasis& basis,
                                                const VectorField* g = nullptr,
                                                int quad_degree = 0);

}  // namespace pstokes
