#pragma once

#include "pstokes/assembly.hpp"

namespace pstokes {

/// Per-element Gram matrices of the gradient-span space S_h(K) =
/// span{grad phi_1, ..., grad phi_n} with rank-aware pseudo-inverse solves
/// (the generators can be linearly dependent).
class LiftingWorkspace {
 public:
  explicit LiftingWorkspace(const StokesDiscretization& d);

  const Eigen::MatrixXd& gram(int element) const { return gram_[element]; }
  int rank(int element) const { return rank_[element]; }
  Eigen::VectorXd pinv_solve(int element, const Eigen::VectorXd& r) const;

 private:
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Eigen::MatrixXd> eigvec_;
  std::vector<Eigen::VectorXd> eigval_;
  std::vector<int> rank_;
};

/// [[w]] at face quadrature point q (3x3 matrix).
using JumpEvaluator = std::function<Eigen::Matrix3d(int q)>;

/// The face lifting L_F(w) in S_h, represented by generator coefficients on
/// the one or two adjacent elements.
struct LiftedFace {
  std::array<int, 2> element{-1, -1};
  std::array<Eigen::VectorXd, 2> coeff;
  double norm = 0.0;  // ||L_F(w)||_{L2(Omega_h)}
};

LiftedFace lift_face(const StokesDiscretization& d, const LiftingWorkspace& ws,
                     const FaceContext& ctx, const JumpEvaluator& jump);

/// Jump of a discrete velocity field on a face, for use with lift_face.
JumpEvaluator coefficient_jump(const StokesDiscretization& d, const FaceContext& ctx,
                               const std::array<SideTrace, 2>& traces,
                               const Eigen::VectorXd& u);

/// A_DG(u,v) assembled through the lifting operator:
/// (grad_h u, grad_h v) - (grad_h u, L_h(v)) - (grad_h v, L_h(u))
/// + alpha sum_F h_F^-1 <[[u]],[[v]]>.
double a_dg_via_lifting(const StokesDiscretization& d, const LiftingWorkspace& ws,
                        const Eigen::VectorXd& u, const Eigen::VectorXd& v);

}  // namespace pstokes
