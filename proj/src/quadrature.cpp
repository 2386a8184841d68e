#include "pstokes/quadrature.hpp"

#include <cmath>

#include "pstokes/common.hpp"

namespace pstokes {

// Golub-Welsch for the Jacobi weight (1-x)^alpha (beta = 0) on [-1,1],
// then mapped to [0,1].
void gauss_jacobi_01(int n, int alpha, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  PSTOKES_REQUIRE(n >= 1, "gauss_jacobi_01: n must be >= 1");
  PSTOKES_REQUIRE(alpha >= 0, "gauss_jacobi_01: alpha must be >= 0");
  const double a = static_cast<double>(alpha);

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double k = static_cast<double>(i);
    // Three-term recurrence diagonal for Jacobi(alpha, 0).
    double diag;
    if (i == 0) {
      diag = -a / (a + 2.0);
    } else {
      diag = -a * a / ((2.0 * k + a) * (2.0 * k + a + 2.0));
    }
    T(i, i) = diag;
    if (i + 1 < n) {
      const double m = k + 1.0;  // recurrence index of the off-diagonal
      const double denom =
          (2.0 * m + a) * (2.0 * m + a) * (2.0 * m + a + 1.0) * (2.0 * m + a - 1.0);
      const double b2 = 4.0 * m * m * (m + a) * (m + a) / denom;
      T(i, i + 1) = T(i + 1, i) = std::sqrt(b2);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  PSTOKES_REQUIRE(es.info() == Eigen::Success, "gauss_jacobi_01: eigensolve failed");

  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);  // int_{-1}^{1} (1-x)^a dx
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double xi = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    x(i) = 0.5 * (xi + 1.0);
    w(i) = mu0 * v0 * v0 / std::pow(2.0, a + 1.0);
  }
}

QuadratureRule tri_quadrature(int exactness_degree) {
  PSTOKES_REQUIRE(exactness_degree >= 1 && exactness_degree <= 14,
                  "tri_quadrature: exactness degree must be in 1..14");
  const int n = (exactness_degree + 2) / 2;  // ceil((d+1)/2)
  Eigen::VectorXd x1, w1, x0, w0;
  gauss_jacobi_01(n, 1, x1, w1);  // xi direction carries the (1-xi) cone weight
  gauss_jacobi_01(n, 0, x0, w0);

  QuadratureRule rule;
  rule.exactness = exactness_degree;
  rule.points.resize(n * n, 2);
  rule.weights.resize(n * n);
  int q = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j, ++q) {
      rule.points(q, 0) = x1(i);
      rule.points(q, 1) = x0(j) * (1.0 - x1(i));
      rule.weights(q) = w1(i) * w0(j);
    }
  }
  return rule;
}

QuadratureRule tet_quadrature(int exactness_degree) {
  PSTOKES_REQUIRE(exactness_degree >= 1 && exactness_degree <= 14,
                  "tet_quadrature: exactness degree must be in 1..14");
  const int n = (exactness_degree + 2) / 2;
  Eigen::VectorXd x2, w2, x1, w1, x0, w0;
  gauss_jacobi_01(n, 2, x2, w2);
  gauss_jacobi_01(n, 1, x1, w1);
  gauss_jacobi_01(n, 0, x0, w0);

  QuadratureRule rule;
  rule.exactness = exactness_degree;
  rule.points.resize(n * n * n, 3);
  rule.weights.resize(n * n * n);
  int q = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k, ++q) {
        const double x = x2(i);
        const double y = x1(j) * (1.0 - x);
        const double z = x0(k) * (1.0 - x) * (1.0 - x1(j));
        rule.points(q, 0) = x;
        rule.points(q, 1) = y;
        rule.points(q, 2) = z;
        rule.weights(q) = w2(i) * w1(j) * w0(k);
      }
    }
  }
  return rule;
}

}  // namespace pstokes
