#pragma once

#include "pstokes/assembly.hpp"

namespace pstokes {

using MatrixField = std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>;

/// Weighted energy norm of the velocity error u_exact - u_h:
/// broken H1 seminorm plus h_F^-1-weighted jumps over all faces, with the
/// boundary convention [[w]] = w x n (the exact solution does not vanish on
/// Gamma_h). grad_exact(x)(i,j) = d u_i / d x_j.
double energy_norm_error(const StokesDiscretization& d, const VectorField& u_exact,
                         const MatrixField& grad_exact, const Eigen::VectorXd& u);

/// L2(Omega_h) error of the pressure; both the exact pressure and p_h are
/// compared mean-free over Omega_h.
double pressure_l2_error(const StokesDiscretization& d, const ScalarField& p_exact,
                         const Eigen::VectorXd& p);

/// sqrt( sum_K int (div u_h)^2 J_d dxhat )
double divergence_l2(const StokesDiscretization& d, const Eigen::VectorXd& u);

/// max |div u_h| over all volume quadrature points.
double max_pointwise_divergence(const StokesDiscretization& d, const Eigen::VectorXd& u);

/// Net normal flux of u_h through Gamma_h.
double boundary_flux(const StokesDiscretization& d, const Eigen::VectorXd& u);

/// Flux of u_h through the interior mesh-face surface separating elements
/// whose straight centroid lies above `threshold` along `axis`. For exactly
/// divergence-free fields with zero normal boundary trace this equals the
/// flux through the geometric cut plane.
double cut_plane_flux(const StokesDiscretization& d, const Eigen::VectorXd& u, int axis,
                      double threshold);

}  // namespace pstokes
