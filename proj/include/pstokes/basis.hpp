#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "pstokes/common.hpp"
#include "pstokes/quadrature.hpp"

namespace pstokes {

/// Reference tetrahedron vertices (0,0,0),(1,0,0),(0,1,0),(0,0,1) as columns.
const Eigen::Matrix<double, 3, 4>& ref_tet_vertices();

/// Exact integral of x^a y^b z^c over the reference tetrahedron:
/// a! b! c! / (a+b+c+3)!.
double monomial_integral_ref_tet(int a, int b, int c);

/// Trivariate multi-indices of total degree <= max_degree, graded lex order.
std::vector<std::array<int, 3>> monomial_exponents(int max_degree);

inline int simplex_poly_dim(int degree) {
  return (degree + 1) * (degree + 2) * (degree + 3) / 6;
}
inline int triangle_poly_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// L2-orthonormal polynomial basis on the reference tetrahedron, graded so the
/// first function is the normalized constant. Built by a Cholesky factorization
/// of the exact monomial Gram matrix.
class OrthonormalScalarBasis {
 public:
  explicit OrthonormalScalarBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exps_.size()); }

  void eval(const Eigen::Vector3d& x, Eigen::VectorXd& values) const;
  void eval_grad(const Eigen::Vector3d& x, Eigen::Matrix3Xd& grads) const;

 private:
  int degree_;
  std::vector<std::array<int, 3>> exps_;
  Eigen::MatrixXd coeff_;  // column j holds monomial coefficients of basis j
};

/// Nodal Lagrange basis on the equispaced lattice of the reference tet
/// (degrees 1..3), with analytic first and second derivatives. Used for the
/// element geometry maps.
class LagrangeSimplexBasis {
 public:
  explicit LagrangeSimplexBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(node_bary_.size()); }
  const Eigen::Matrix3Xd& nodes() const { return nodes_; }
  /// Barycentric integer coordinates (i0,i1,i2,i3) of each node, sum = degree.
  const std::vector<std::array<int, 4>>& node_bary() const { return node_bary_; }

  void eval(const Eigen::Vector3d& x, Eigen::VectorXd& values) const;
  void eval_grad(const Eigen::Vector3d& x, Eigen::Matrix3Xd& grads) const;
  void eval_hessian(const Eigen::Vector3d& x, std::vector<Eigen::Matrix3d>& hess) const;

  static const LagrangeSimplexBasis& get(int degree);  // shared instances 1..3

 private:
  int degree_;
  std::vector<std::array<int, 3>> exps_;
  std::vector<std::array<int, 4>> node_bary_;
  Eigen::Matrix3Xd nodes_;
  Eigen::MatrixXd coeff_;
};

/// Reference BDM(k) basis on the tetrahedron: full vector polynomials P_k^3
/// with the classical degrees of freedom (normal face moments against P_k(F),
/// interior moments against first-kind Nedelec fields of degree k-1). Shape
/// functions are dual to the DOFs.
///
/// DOF layout: face-major, face l in 0..3 contributing face_dof_count() slots
/// ordered like face_multi_indices(), followed by the interior DOFs.
class BdmReferenceBasis {
 public:
  explicit BdmReferenceBasis(int degree);  // degree in 1..3

  int degree() const { return degree_; }
  int size() const { return size_; }
  int face_dof_count() const { return static_cast<int>(face_mi_.size()); }
  int interior_dof_count() const { return size_ - 4 * face_dof_count(); }

  /// Exponent triples (a,b,c), a+b+c = degree, attached to the face vertices
  /// in ascending local order; the face moment weight is
  /// lambda_A^a lambda_B^b lambda_C^c.
  const std::vector<std::array<int, 3>>& face_multi_indices() const { return face_mi_; }

  void eval(const Eigen::Vector3d& xhat, Eigen::MatrixX3d& values) const;
  void eval_grad(const Eigen::Vector3d& xhat, std::vector<Eigen::Matrix3d>& grads) const;
  void eval_div(const Eigen::Vector3d& xhat, Eigen::VectorXd& divs) const;

  /// Face moments of a reference field sampled at the rule's points mapped by
  /// face_point(lface, s, t). Integration uses the true surface measure on
  /// the reference face and its outward unit normal.
  Eigen::VectorXd face_dofs_from_trace(int lface, const QuadratureRule& tri_rule,
                                       const Eigen::Matrix3Xd& vhat) const;
  /// Interior Nedelec moments of a field sampled at the tet rule's points.
  Eigen::VectorXd interior_dofs_from_values(const QuadratureRule& tet_rule,
                                            const Eigen::Matrix3Xd& vhat) const;

  /// max |dof_i(shape_j) - delta_ij|, recomputed with fresh quadrature.
  double dof_matrix_residual() const;

  static Eigen::Vector3d face_point(int lface, double s, double t);
  static Eigen::Vector3d face_unit_normal(int lface);
  static double face_area_jacobian(int lface);  // d(surface) = jac * d(s,t)

  static const BdmReferenceBasis& get(int degree);

 private:
  Eigen::VectorXd apply_dofs(const QuadratureRule& tri_rule,
                             const QuadratureRule& tet_rule,
                             const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& f) const;
  void underlying_eval(const Eigen::Vector3d& x, Eigen::MatrixX3d& values) const;
  Eigen::Matrix3Xd nedelec_fields(const Eigen::Vector3d& x) const;

  int degree_ = 0;
  int size_ = 0;
  OrthonormalScalarBasis scalar_;
  std::vector<std::array<int, 3>> face_mi_;
  Eigen::MatrixXd coeff_;  // size x size: shape_j = sum_m coeff_(m,j) * underlying_m
};

/// Discontinuous pressure basis: the orthonormal scalar basis of degree k-1
/// (reference mass matrix is the identity).
class PressureReferenceBasis {
 public:
  explicit PressureReferenceBasis(int velocity_degree)
      : basis_(velocity_degree - 1) {}

  int degree() const { return basis_.degree(); }
  int size() const { return basis_.size(); }
  void eval(const Eigen::Vector3d& x, Eigen::VectorXd& values) const {
    basis_.eval(x, values);
  }
  /// Coefficient of the constant function 1 on the first basis function.
  double constant_coefficient() const { return 1.0 / std::sqrt(6.0); }

 private:
  OrthonormalScalarBasis basis_;
};

}  // namespace pstokes
