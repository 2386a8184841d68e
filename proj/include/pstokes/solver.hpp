#pragma once

#include <memory>

#include "pstokes/assembly.hpp"

namespace pstokes {

/// Constraint-eliminated saddle system. The symmetric operator solved is
/// [A_ff, Bs^T; Bs, 0] with Bs = -B_f (so the recovered pressure carries the
/// physical sign of the momentum equation).
struct ReducedSystem {
  SpMat A;                // free x free
  SpMat B;                // n_p x free, the (div u, q) coupling
  Eigen::VectorXd rhs_u;  // constraints folded in
  Eigen::VectorXd rhs_p;
  std::vector<int> free_idx;
  std::vector<int> full_to_free;   // -1 on constrained DOFs
  Eigen::VectorXd lift_full;       // constrained values in full indexing
  int n_free() const { return static_cast<int>(free_idx.size()); }
};

ReducedSystem reduce_system(const BlockSystem& sys);

FieldCoefficients expand_solution(const ReducedSystem& red, const Eigen::VectorXd& u_free,
                                  const Eigen::VectorXd& p);

enum class VelocityPrecond { Auto, Jacobi, IncompleteCholesky, DirectCholesky, Chebyshev, InnerCG };
enum class PressurePrecond { MassExact, MassDiag };

struct PreconditionerConfig {
  VelocityPrecond velocity = VelocityPrecond::Auto;
  PressurePrecond pressure = PressurePrecond::MassExact;
  int chebyshev_degree = 30;
  double chebyshev_condition = 30.0;  // assumed lambda_max/lambda_min ratio
  int inner_cg_iters = 40;            // fixed count keeps the operator linear-ish
  int direct_max_dofs = 90000;        // Auto picks DirectCholesky below this
};

/// Block-diagonal SPD preconditioner: an approximate A-solve for the velocity
/// block and the nu-scaled pressure mass inverse for the pressure block.
class BlockDiagPreconditioner {
 public:
  BlockDiagPreconditioner(const StokesDiscretization& d, const ReducedSystem& red,
                          const PreconditionerConfig& config);
  ~BlockDiagPreconditioner();
  BlockDiagPreconditioner(BlockDiagPreconditioner&&) noexcept;

  void apply(const Eigen::VectorXd& r, Eigen::VectorXd& z) const;
  VelocityPrecond velocity_kind() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SolveReport {
  int iterations = 0;
  double rel_residual = 0.0;
  double seconds = 0.0;
  double div_l2 = -1.0;
  bool converged = false;
  std::vector<double> residual_history;  // preconditioned residual norms
  std::string to_json() const;
};

/// Preconditioned MINRES on the constrained saddle system; the returned
/// pressure is shifted to zero mean over Omega_h.
std::pair<FieldCoefficients, SolveReport> minres_solve(const StokesDiscretization& d,
                                                       const BlockSystem& sys,
                                                       const PreconditionerConfig& pc = {},
                                                       double tol = 1e-12,
                                                       int max_iters = 0);

/// Dense factorization oracle for systems up to 20k unknowns. The singular
/// pressure-constant mode is pinned by a rank-one regularization; the result
/// is zero-mean shifted like the iterative path.
FieldCoefficients direct_solve(const StokesDiscretization& d, const BlockSystem& sys);

/// Numerical inf-sup constant: smallest nonzero generalized singular value of
/// the pencil (B E^-1 B^T, M_p) on the zero-mean pressure subspace, with E
/// the energy-norm Gram matrix on V_{h,0}.
double estimate_inf_sup(const StokesDiscretization& d);

/// Smallest Rayleigh quotient of a_DG against the energy Gram on V_{h,0}
/// (dense eigensolve; desk-scale meshes).
double estimate_coercivity(const StokesDiscretization& d, double alpha);

}  // namespace pstokes
