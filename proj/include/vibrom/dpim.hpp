#pragma once

#include <Eigen/Dense>

#include "vibrom/continuation.hpp"
#include "vibrom/fom.hpp"
#include "vibrom/hb.hpp"

namespace vibrom {

// Single-master direct parametrization of the invariant manifold:
// second-order mapping, cubic reduced dynamics.
//
//   U = Phi R + a R^2 + b S^2 + c RS
//   V = Phi S + alpha R^2 + beta_v S^2 + gamma RS
//   R' = S
//   S' = -(omega0/Q) S - omega_m^2 R - A R^3 - B R S^2 - C R^2 S
//        + beta * forcing_scalar * cos(omega t)

struct DpimModel {
  int master_index = 0;
  Eigen::VectorXd phi;  // mass-normalized master mode
  double omega_m = 0.0;

  Eigen::VectorXd map_u_rr, map_u_ss, map_u_rs;  // a, b, c
  Eigen::VectorXd map_v_rr, map_v_ss, map_v_rs;  // alpha, beta_v, gamma

  double coef_r3 = 0.0;   // A
  double coef_rs2 = 0.0;  // B
  double coef_r2s = 0.0;  // C

  double damping = 0.0;         // omega0/Q
  double forcing_scalar = 0.0;  // Phi^T F per unit load multiplier
};

// Solves the order-2 homological systems and projects the cubic terms.
// Throws std::invalid_argument when omega_m, 2*omega_m or 3*omega_m falls
// within 5% of another eigenfrequency, or when Q < 100.
DpimModel build_dpim(const FomSystem& sys, int master_index);

// Exact evaluation of the reduced vector field.
void reduced_rhs(const DpimModel& model, double r, double s, double t,
                 const ForcingParams& f, double& dr, double& ds);

// Nonlinear change of variables back to the physical fields.
void dpim_decode(const DpimModel& model, double r, double s,
                 Eigen::VectorXd& u, Eigen::VectorXd& v);

// Pointwise residual of the invariance equations at (R, S), autonomous
// system; the displacement-equation block followed by the velocity block.
Eigen::VectorXd invariance_residual(const DpimModel& model, const FomSystem& sys,
                                    double r, double s);

// The reduced dynamics as a scalar second-order HB form.
SecondOrderForm dpim_form(const DpimModel& model);

// FRF of the reduced dynamics via HB continuation. The amplitude is
// max_t |functional . U(t)| with U decoded from (R, S).
FrfCurve dpim_frf(const DpimModel& model, double beta,
                  const Eigen::VectorXd& functional, const FrfSettings& settings);

// Decoded displacement/velocity samples over one period for a reduced
// HB unknown vector (coefficients of R): n_dofs x n_samples each.
void dpim_decode_orbit(const DpimModel& model, const Eigen::VectorXd& reduced_coeffs,
                       double omega, int n_samples,
                       Eigen::MatrixXd& u, Eigen::MatrixXd& v);

}  // namespace vibrom
