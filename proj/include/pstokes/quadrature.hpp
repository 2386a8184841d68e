#pragma once

#include <Eigen/Dense>

namespace pstokes {

/// Quadrature rule on a reference cell (unit tetrahedron or unit triangle).
/// Points are reference coordinates, one row per point. Weights are positive
/// and sum to the reference measure (1/6 for the tet, 1/2 for the triangle).
struct QuadratureRule {
  Eigen::MatrixXd points;   // n x dim
  Eigen::VectorXd weights;  // n
  int exactness = 0;

  int size() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Conical-product rule on the reference tetrahedron
/// {x,y,z >= 0, x+y+z <= 1}, exact for all polynomials of total degree
/// <= exactness_degree. Supported degrees 1..14.
QuadratureRule tet_quadrature(int exactness_degree);

/// Conical-product rule on the reference triangle {x,y >= 0, x+y <= 1}.
QuadratureRule tri_quadrature(int exactness_degree);

/// n-point Gauss-Jacobi rule on [0,1] with weight (1-x)^alpha. Integrates
/// p(x)(1-x)^alpha exactly for deg p <= 2n-1.
void gauss_jacobi_01(int n, int alpha, Eigen::VectorXd& x, Eigen::VectorXd& w);

}  // namespace pstokes
