#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "vibrom/fom.hpp"

namespace vibrom {

// Modal diagnostics: generalized modal coordinates u_i = Phi_i^T M U(t),
// Fourier-differentiated velocities, per-mode error norms, and manifold
// orbit tables.

struct ModalTrace {
  int mode_index = 0;
  Eigen::VectorXd u;  // one period, uniform samples
  Eigen::VectorXd v;  // Fourier-differentiated velocity
  double amplitude = 0.0;
};

// `states`: N_h x n_samples over exactly one period; omega fixes the
// time scale of the velocity.
ModalTrace modal_coordinate(const EigenBasis& basis, const Eigen::MatrixXd& mass,
                            const Eigen::MatrixXd& states, int mode_index, double omega,
                            int n_keep = 10);

// Differentiate a uniformly sampled period by Fourier transform, keeping
// harmonics up to n_keep.
Eigen::VectorXd fourier_velocity(const Eigen::VectorXd& samples, double omega, int n_keep);

struct ModalErrors {
  std::optional<double> relative;  // E^r_i; absent when the reference mode is silent
  double global = 0.0;             // E_i, normalized by the mass-metric norm
};

// Trapezoid L2 over the period; reference_states used for the global norm
// (u^P)^2 = U^T M U.
ModalErrors modal_errors(const Eigen::VectorXd& reference_trace,
                         const Eigen::VectorXd& test_trace,
                         const Eigen::MatrixXd& reference_states,
                         const Eigen::MatrixXd& mass);

struct OrbitRow {
  double u_master, v_master, u_plot;
};

// One orbit's (u_master, v_master, u_plot) samples for manifold plots.
std::vector<OrbitRow> manifold_orbit(const EigenBasis& basis, const Eigen::MatrixXd& mass,
                                     const Eigen::MatrixXd& states, int master_mode,
                                     int plot_mode, double omega, int n_keep = 10);

}  // namespace vibrom
