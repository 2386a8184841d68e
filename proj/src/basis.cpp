#include "pstokes/basis.hpp"

#include <cmath>
#include <mutex>

namespace pstokes {

const Eigen::Matrix<double, 3, 4>& ref_tet_vertices() {
  static const Eigen::Matrix<double, 3, 4> v = [] {
    Eigen::Matrix<double, 3, 4> m;
    m.col(0) << 0, 0, 0;
    m.col(1) << 1, 0, 0;
    m.col(2) << 0, 1, 0;
    m.col(3) << 0, 0, 1;
    return m;
  }();
  return v;
}

double monomial_integral_ref_tet(int a, int b, int c) {
  // a! b! c! / (a+b+c+3)!  computed as a product to stay exact in double
  double val = 1.0;
  int denom = 1;
  auto burn = [&](int e) {
    for (int i = 1; i <= e; ++i) val *= static_cast<double>(i) / denom++;
  };
  burn(a);
  burn(b);
  burn(c);
  for (int i = 0; i < 3; ++i) val /= denom++;
  return val;
}

std::vector<std::array<int, 3>> monomial_exponents(int max_degree) {
  std::vector<std::array<int, 3>> out;
  for (int d = 0; d <= max_degree; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) out.push_back({a, b, d - a - b});
  return out;
}

namespace {

double mono_deriv(const std::array<int, 3>& e, const Eigen::Vector3d& x,
                  int dx, int dy, int dz) {
  const int d[3] = {dx, dy, dz};
  double val = 1.0;
  for (int a = 0; a < 3; ++a) {
    int p = e[a];
    for (int k = 0; k < d[a]; ++k) {
      if (p == 0) return 0.0;
      val *= p--;
    }
    for (int k = 0; k < p; ++k) val *= x[a];
  }
  return val;
}

}  // namespace

// ---------------------------------------------------------------------------
// OrthonormalScalarBasis
// ---------------------------------------------------------------------------

OrthonormalScalarBasis::OrthonormalScalarBasis(int degree) : degree_(degree) {
  PSTOKES_REQUIRE(degree >= 0, "OrthonormalScalarBasis: degree must be >= 0");
  exps_ = monomial_exponents(degree);
  const int n = size();
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gram(i, j) = monomial_integral_ref_tet(exps_[i][0] + exps_[j][0],
                                             exps_[i][1] + exps_[j][1],
                                             exps_[i][2] + exps_[j][2]);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  PSTOKES_REQUIRE(llt.info() == Eigen::Success,
                  "OrthonormalScalarBasis: Gram matrix not SPD");
  // basis = L^{-T} * monomials keeps the graded ordering
  coeff_ = Eigen::MatrixXd(llt.matrixL())
               .transpose()
               .triangularView<Eigen::Upper>()
               .solve(Eigen::MatrixXd::Identity(n, n));
}

void OrthonormalScalarBasis::eval(const Eigen::Vector3d& x, Eigen::VectorXd& values) const {
  const int n = size();
  Eigen::VectorXd mono(n);
  for (int i = 0; i < n; ++i) mono(i) = mono_deriv(exps_[i], x, 0, 0, 0);
  values = coeff_.transpose() * mono;
}

void OrthonormalScalarBasis::eval_grad(const Eigen::Vector3d& x,
                                       Eigen::Matrix3Xd& grads) const {
  const int n = size();
  Eigen::Matrix3Xd mg(3, n);
  for (int i = 0; i < n; ++i) {
    mg(0, i) = mono_deriv(exps_[i], x, 1, 0, 0);
    mg(1, i) = mono_deriv(exps_[i], x, 0, 1, 0);
    mg(2, i) = mono_deriv(exps_[i], x, 0, 0, 1);
  }
  grads = mg * coeff_;
}

// ---------------------------------------------------------------------------
// LagrangeSimplexBasis
// ---------------------------------------------------------------------------

LagrangeSimplexBasis::LagrangeSimplexBasis(int degree) : degree_(degree) {
  PSTOKES_REQUIRE(degree >= 1 && degree <= 3,
                  "LagrangeSimplexBasis: degree must be in 1..3");
  exps_ = monomial_exponents(degree);
  const int n = static_cast<int>(exps_.size());

  node_bary_.clear();
  for (int i1 = 0; i1 <= degree; ++i1)
    for (int i2 = 0; i2 <= degree - i1; ++i2)
      for (int i3 = 0; i3 <= degree - i1 - i2; ++i3)
        node_bary_.push_back({degree - i1 - i2 - i3, i1, i2, i3});
  PSTOKES_REQUIRE(static_cast<int>(node_bary_.size()) == n,
                  "LagrangeSimplexBasis: node count mismatch");

  nodes_.resize(3, n);
  for (int i = 0; i < n; ++i)
    nodes_.col(i) = Eigen::Vector3d(node_bary_[i][1], node_bary_[i][2],
                                    node_bary_[i][3]) /
                    static_cast<double>(degree);

  Eigen::MatrixXd vand(n, n);
  for (int r = 0; r < n; ++r)
    for (int m = 0; m < n; ++m)
      vand(r, m) = mono_deriv(exps_[m], nodes_.col(r), 0, 0, 0);
  coeff_ = vand.inverse();
}

void LagrangeSimplexBasis::eval(const Eigen::Vector3d& x, Eigen::VectorXd& values) const {
  const int n = size();
  Eigen::VectorXd mono(n);
  for (int i = 0; i < n; ++i) mono(i) = mono_deriv(exps_[i], x, 0, 0, 0);
  values = coeff_.transpose() * mono;
}

void LagrangeSimplexBasis::eval_grad(const Eigen::Vector3d& x,
                                     Eigen::Matrix3Xd& grads) const {
  const int n = size();
  Eigen::Matrix3Xd mg(3, n);
  for (int i = 0; i < n; ++i) {
    mg(0, i) = mono_deriv(exps_[i], x, 1, 0, 0);
    mg(1, i) = mono_deriv(exps_[i], x, 0, 1, 0);
    mg(2, i) = mono_deriv(exps_[i], x, 0, 0, 1);
  }
  grads = mg * coeff_;
}

void LagrangeSimplexBasis::eval_hessian(const Eigen::Vector3d& x,
                                        std::vector<Eigen::Matrix3d>& hess) const {
  const int n = size();
  hess.assign(n, Eigen::Matrix3d::Zero());
  for (int j = 0; j < n; ++j) {
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (int m = 0; m < n; ++m) {
      const double c = coeff_(m, j);
      if (c == 0.0) continue;
      const auto& e = exps_[m];
      h(0, 0) += c * mono_deriv(e, x, 2, 0, 0);
      h(1, 1) += c * mono_deriv(e, x, 0, 2, 0);
      h(2, 2) += c * mono_deriv(e, x, 0, 0, 2);
      const double hxy = c * mono_deriv(e, x, 1, 1, 0);
      const double hxz = c * mono_deriv(e, x, 1, 0, 1);
      const double hyz = c * mono_deriv(e, x, 0, 1, 1);
      h(0, 1) += hxy;
      h(1, 0) += hxy;
      h(0, 2) += hxz;
      h(2, 0) += hxz;
      h(1, 2) += hyz;
      h(2, 1) += hyz;
    }
    hess[j] = h;
  }
}

const LagrangeSimplexBasis& LagrangeSimplexBasis::get(int degree) {
  static std::mutex mtx;
  static std::array<std::unique_ptr<LagrangeSimplexBasis>, 4> cache;
  PSTOKES_REQUIRE(degree >= 1 && degree <= 3, "LagrangeSimplexBasis::get: degree 1..3");
  std::lock_guard<std::mutex> lock(mtx);
  if (!cache[degree]) cache[degree] = std::make_unique<LagrangeSimplexBasis>(degree);
  return *cache[degree];
}

// ---------------------------------------------------------------------------
// BdmReferenceBasis
// ---------------------------------------------------------------------------

Eigen::Vector3d BdmReferenceBasis::face_point(int lface, double s, double t) {
  const auto& fv = kRefTetFaceVertices[lface];
  const auto& V = ref_tet_vertices();
  return (1.0 - s - t) * V.col(fv[0]) + s * V.col(fv[1]) + t * V.col(fv[2]);
}

Eigen::Vector3d BdmReferenceBasis::face_unit_normal(int lface) {
  switch (lface) {
    case 0: return Eigen::Vector3d(1, 1, 1).normalized();
    case 1: return Eigen::Vector3d(-1, 0, 0);
    case 2: return Eigen::Vector3d(0, -1, 0);
    default: return Eigen::Vector3d(0, 0, -1);
  }
}

double BdmReferenceBasis::face_area_jacobian(int lface) {
  return lface == 0 ? std::sqrt(3.0) : 1.0;
}

BdmReferenceBasis::BdmReferenceBasis(int degree)
    : degree_(degree), scalar_(degree) {
  PSTOKES_REQUIRE(degree >= 1 && degree <= 3, "BdmReferenceBasis: degree must be in 1..3");
  const int ns = scalar_.size();
  size_ = 3 * ns;

  face_mi_.clear();
  for (int a = degree; a >= 0; --a)
    for (int b = degree - a; b >= 0; --b) face_mi_.push_back({a, b, degree - a - b});

  const int n_int = size_ - 4 * face_dof_count();
  PSTOKES_REQUIRE(n_int == static_cast<int>(nedelec_fields(Eigen::Vector3d::Zero()).cols()),
                  "BdmReferenceBasis: interior DOF count mismatch");

  // DOF matrix over the underlying (orthonormal scalar x unit vector) basis.
  const QuadratureRule tri = tri_quadrature(2 * degree + 1);
  const QuadratureRule tet = tet_quadrature(2 * degree);
  Eigen::MatrixXd V(size_, size_);
  for (int m = 0; m < size_; ++m) {
    const int d = m / ns, s = m % ns;
    auto u = [&](const Eigen::Vector3d& x) {
      Eigen::VectorXd vals;
      scalar_.eval(x, vals);
      Eigen::Vector3d v = Eigen::Vector3d::Zero();
      v[d] = vals(s);
      return v;
    };
    V.col(m) = apply_dofs(tri, tet, u);
  }
  coeff_ = V.inverse();
}

Eigen::VectorXd BdmReferenceBasis::apply_dofs(
    const QuadratureRule& tri_rule, const QuadratureRule& tet_rule,
    const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& f) const {
  Eigen::VectorXd dofs(size_);
  const int nfd = face_dof_count();
  for (int l = 0; l < 4; ++l) {
    Eigen::Matrix3Xd vhat(3, tri_rule.size());
    for (int q = 0; q < tri_rule.size(); ++q)
      vhat.col(q) = f(face_point(l, tri_rule.points(q, 0), tri_rule.points(q, 1)));
    dofs.segment(l * nfd, nfd) = face_dofs_from_trace(l, tri_rule, vhat);
  }
  if (interior_dof_count() > 0) {
    Eigen::Matrix3Xd vhat(3, tet_rule.size());
    for (int q = 0; q < tet_rule.size(); ++q)
      vhat.col(q) = f(tet_rule.points.row(q).transpose());
    dofs.tail(interior_dof_count()) = interior_dofs_from_values(tet_rule, vhat);
  }
  return dofs;
}

Eigen::VectorXd BdmReferenceBasis::face_dofs_from_trace(
    int lface, const QuadratureRule& tri_rule, const Eigen::Matrix3Xd& vhat) const {
  const int nfd = face_dof_count();
  const Eigen::Vector3d n = face_unit_normal(lface);
  const double jac = face_area_jacobian(lface);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nfd);
  for (int q = 0; q < tri_rule.size(); ++q) {
    const double s = tri_rule.points(q, 0), t = tri_rule.points(q, 1);
    const double vn = vhat.col(q).dot(n) * tri_rule.weights(q) * jac;
    const double l0 = 1.0 - s - t;
    for (int m = 0; m < nfd; ++m) {
      const auto& e = face_mi_[m];
      out(m) += vn * std::pow(l0, e[0]) * std::pow(s, e[1]) * std::pow(t, e[2]);
    }
  }
  return out;
}

Eigen::Matrix3Xd BdmReferenceBasis::nedelec_fields(const Eigen::Vector3d& x) const {
  if (degree_ == 1) return Eigen::Matrix3Xd(3, 0);
  if (degree_ == 2) {
    // N_1 = constants + {x cross e_i}
    Eigen::Matrix3Xd f(3, 6);
    f.leftCols<3>().setIdentity();
    for (int i = 0; i < 3; ++i)
      f.col(3 + i) = x.cross(Eigen::Vector3d::Unit(i));
    return f;
  }
  // N_2 = (P_1)^3 + span{x cross (x_j e_i)} with one dependent diagonal dropped
  Eigen::Matrix3Xd f(3, 20);
  int c = 0;
  for (int i = 0; i < 3; ++i) f.col(c++) = Eigen::Vector3d::Unit(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) f.col(c++) = x[j] * Eigen::Vector3d::Unit(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == 2 && j == 2) continue;
      f.col(c++) = x.cross(x[j] * Eigen::Vector3d::Unit(i));
    }
  return f;
}

Eigen::VectorXd BdmReferenceBasis::interior_dofs_from_values(
    const QuadratureRule& tet_rule, const Eigen::Matrix3Xd& vhat) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(interior_dof_count());
  for (int q = 0; q < tet_rule.size(); ++q) {
    const Eigen::Matrix3Xd n = nedelec_fields(tet_rule.points.row(q).transpose());
    out += tet_rule.weights(q) * (n.transpose() * vhat.col(q));
  }
  return out;
}

void BdmReferenceBasis::underlying_eval(const Eigen::Vector3d& x,
                                        Eigen::MatrixX3d& values) const {
  const int ns = scalar_.size();
  Eigen::VectorXd sv;
  scalar_.eval(x, sv);
  values.setZero(size_, 3);
  for (int d = 0; d < 3; ++d) values.block(d * ns, d, ns, 1) = sv;
}

void BdmReferenceBasis::eval(const Eigen::Vector3d& xhat, Eigen::MatrixX3d& values) const {
  Eigen::MatrixX3d u;
  underlying_eval(xhat, u);
  values = coeff_.transpose() * u;
}

void BdmReferenceBasis::eval_grad(const Eigen::Vector3d& xhat,
                                  std::vector<Eigen::Matrix3d>& grads) const {
  const int ns = scalar_.size();
  Eigen::Matrix3Xd sg;
  scalar_.eval_grad(xhat, sg);  // 3 x ns
  grads.assign(size_, Eigen::Matrix3d::Zero());
  for (int j = 0; j < size_; ++j) {
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
    for (int d = 0; d < 3; ++d)
      for (int s = 0; s < ns; ++s) {
        const double c = coeff_(d * ns + s, j);
        if (c != 0.0) g.row(d) += c * sg.col(s).transpose();
      }
    grads[j] = g;
  }
}

void BdmReferenceBasis::eval_div(const Eigen::Vector3d& xhat, Eigen::VectorXd& divs) const {
  const int ns = scalar_.size();
  Eigen::Matrix3Xd sg;
  scalar_.eval_grad(xhat, sg);
  divs.setZero(size_);
  for (int j = 0; j < size_; ++j) {
    double dv = 0.0;
    for (int d = 0; d < 3; ++d)
      for (int s = 0; s < ns; ++s) dv += coeff_(d * ns + s, j) * sg(d, s);
    divs(j) = dv;
  }
}

double BdmReferenceBasis::dof_matrix_residual() const {
  const QuadratureRule tri = tri_quadrature(2 * degree_ + 2);
  const QuadratureRule tet = tet_quadrature(2 * degree_ + 2);
  double worst = 0.0;
  for (int j = 0; j < size_; ++j) {
    auto shape = [&](const Eigen::Vector3d& x) {
      Eigen::MatrixX3d vals;
      eval(x, vals);
      return Eigen::Vector3d(vals.row(j).transpose());
    };
    Eigen::VectorXd dofs = apply_dofs(tri, tet, shape);
    dofs(j) -= 1.0;
    worst = std::max(worst, dofs.cwiseAbs().maxCoeff());
  }
  return worst;
}

const BdmReferenceBasis& BdmReferenceBasis::get(int degree) {
  static std::mutex mtx;
  static std::array<std::unique_ptr<BdmReferenceBasis>, 4> cache;
  PSTOKES_REQUIRE(degree >= 1 && degree <= 3, "BdmReferenceBasis::get: degree 1..3");
  std::lock_guard<std::mutex> lock(mtx);
  if (!cache[degree]) cache[degree] = std::make_unique<BdmReferenceBasis>(degree);
  return *cache[degree];
}

}  // namespace pstokes
