#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "pstokes/spaces.hpp"

namespace pstokes {

using SpMat = Eigen::SparseMatrix<double>;

struct AssemblyConfig {
  double alpha = 20.0;  // interior-penalty stabilization
  double nu = 1.0;      // viscosity
  int volume_quadrature = 0;  // 0 -> 2k+2
  int face_quadrature = 0;    // 0 -> 2k+2
  int error_quadrature = 0;   // 0 -> 2k+4
  bool penalty_reference_diameter = false;  // h_Fhat instead of physical h_F
};

/// Aggregates the immutable pieces a discretization is made of. All members
/// are non-owning.
struct StokesDiscretization {
  const StraightMesh* mesh = nullptr;
  const GeometryMaps* maps = nullptr;
  const DofMap* dofmap = nullptr;
  const BdmReferenceBasis* vbasis = nullptr;
  const PressureReferenceBasis* pbasis = nullptr;
  AssemblyConfig config;

  int degree() const { return dofmap->degree(); }
  int volume_quad() const {
    return config.volume_quadrature > 0 ? config.volume_quadrature : 2 * degree() + 2;
  }
  int face_quad() const {
    return config.face_quadrature > 0 ? config.face_quadrature : 2 * degree() + 2;
  }
  int error_quad() const {
    return config.error_quadrature > 0 ? config.error_quadrature : 2 * degree() + 4;
  }
};

/// Quadrature data of one mesh face: reference points on both sides matched
/// through the shared physical points, physical surface measure and the unit
/// normal oriented outward from side 0 (the owner element).
struct FaceContext {
  int face = -1;
  bool boundary = false;
  std::array<int, 2> element{-1, -1};
  std::array<int, 2> lface{-1, -1};
  double h_penalty = 0.0;
  int nq = 0;
  std::vector<Eigen::Vector3d> xhat0, xhat1;
  std::vector<Eigen::Vector3d> xphys;
  std::vector<Eigen::Vector3d> normal;
  std::vector<double> wds;  // quadrature weight times surface measure
};

FaceContext build_face_context(const StokesDiscretization& d, int face,
                               const QuadratureRule& tri);

/// Physical trace data of all velocity basis functions of one element side at
/// the points of a face context: Piola values and transformed gradients.
struct SideTrace {
  std::vector<Eigen::Matrix3Xd> values;            // per point: 3 x n
  std::vector<std::vector<Eigen::Matrix3d>> grads; // per point per basis
};
SideTrace build_side_trace(const StokesDiscretization& d, const FaceContext& ctx, int side);

/// The bilinear form a_DG (unscaled by nu):
///   (grad_h u, grad_h v) - sum_F <{grad u},[[v]]> - sum_F <{grad v},[[u]]>
///   + sum_F alpha/h_F <[[u]],[[v]]>.
SpMat assemble_a_dg(const StokesDiscretization& d);

/// Gram matrix of the weighted norm |||v|||^2 = ||grad_h v||^2
/// + sum_F h_F^-1 ||[[v]]||^2 (no consistency terms, unit penalty).
SpMat assemble_energy_gram(const StokesDiscretization& d);

/// Divergence coupling B(q_i, u_j) = (div phi_j, psi_i)_{Omega_h}; by the
/// Piola identity this is an exact reference-element integral.
SpMat assemble_div(const StokesDiscretization& d);

/// J_d-weighted pressure mass matrix (block diagonal per element).
SpMat assemble_pressure_mass(const StokesDiscretization& d);

enum class RhsMode { Direct, Pullback };

/// Load vector (f, v)_{Omega_h}. Direct mode evaluates f at the physical
/// quadrature points; Pullback composes with the exact-map blend on curved
/// elements (f o M instead of f o M_h).
Eigen::VectorXd assemble_rhs(const StokesDiscretization& d, const VectorField& f,
                             RhsMode mode = RhsMode::Direct);

struct BoundaryLift {
  Eigen::VectorXd velocity;  // -<{grad v}, g x n> + alpha/h <g x n, [[v]]>
  Eigen::VectorXd pressure;  // tangential data only: identically zero
};

/// Consistent IPDG Dirichlet lift of boundary data g (to be scaled by nu and
/// combined with the strong normal-moment constraints).
BoundaryLift assemble_boundary_lift(const StokesDiscretization& d, const VectorField& g);

/// The assembled saddle system in full DOF indexing plus the strong
/// constraints. The solver works on the constraint-eliminated reduced form.
struct BlockSystem {
  SpMat A;  // nu * a_DG
  SpMat B;  // (div u, q)
  Eigen::VectorXd rhs_u;
  Eigen::VectorXd rhs_p;
  double alpha = 20.0;
  double nu = 1.0;
  std::vector<int> constrained;  // ascending velocity DOF ids
  Eigen::VectorXd constrained_values;
};

/// Assembles the full Stokes system for source f and optional Dirichlet data
/// g (normal part enforced strongly, tangential part through the lift).
BlockSystem build_stokes_system(const StokesDiscretization& d, const VectorField& f,
                                RhsMode mode = RhsMode::Direct,
                                const VectorField* g = nullptr);

/// Matrix Market coordinate-format export.
void write_matrix_market(const SpMat& m, const std::string& path);

}  // namespace pstokes
