#pragma once

#include <Eigen/Dense>
#include <functional>

#include "vibrom/fom.hpp"

namespace vibrom {

// Harmonic balance with alternating frequency/time evaluation of the
// nonlinear force, over a generic second-order form
//   M q'' + C q' + K q + fnl(q, q') = beta * shape * cos(omega t).
//
// Unknown vector layout: x = vec(Q) where Q is n x (2*nh+1) with column
// blocks [a0 | a1..aN | b1..bN]; x stacks Q column by column.

struct SecondOrderForm {
  Eigen::MatrixXd mass, damping, stiffness;
  Eigen::VectorXd shape;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& q, const Eigen::VectorXd& v)> fnl;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& q, const Eigen::VectorXd& v)> dfnl_dq;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& q, const Eigen::VectorXd& v)> dfnl_dv;
  bool velocity_dependent = false;

  int n() const { return static_cast<int>(mass.rows()); }
};

SecondOrderForm fom_form(const FomSystem& sys);

struct HbSettings {
  int n_harmonics = 7;
  double tol = 1e-10;
  int max_iters = 25;
};

// Galerkin-Fourier residual; length n*(2*nh+1).
Eigen::VectorXd hb_residual(const SecondOrderForm& form, const Eigen::VectorXd& x,
                            double omega, double beta, int n_harmonics);

// Analytic Jacobians through AFT of the tangent operators.
void hb_jacobian(const SecondOrderForm& form, const Eigen::VectorXd& x,
                 double omega, double beta, int n_harmonics,
                 Eigen::MatrixXd& d_dx, Eigen::VectorXd& d_domega);

// Exact solution of the linearized problem (fnl dropped); used as Newton guess.
Eigen::VectorXd hb_linear_solution(const SecondOrderForm& form, double omega,
                                   double beta, int n_harmonics);

// Newton iteration on hb_residual.
Eigen::VectorXd hb_solve_coeffs(const SecondOrderForm& form, double omega, double beta,
                                const Eigen::VectorXd& guess, const HbSettings& settings);

// FomSystem-level wrappers using PeriodicOrbit.
Eigen::VectorXd hb_residual(const FomSystem& sys, const PeriodicOrbit& orbit,
                            const ForcingParams& f);
PeriodicOrbit hb_solve(const FomSystem& sys, const ForcingParams& f,
                       const PeriodicOrbit& guess, double tol);
PeriodicOrbit hb_solve(const FomSystem& sys, const ForcingParams& f,
                       const HbSettings& settings = {});

// Coefficient matrix <-> stacked unknown vector.
Eigen::MatrixXd unstack_coeffs(const Eigen::VectorXd& x, int n_dofs);
Eigen::VectorXd stack_coeffs(const Eigen::MatrixXd& coeffs);

// max over one period of |functional . q(t)| for the orbit stored in x.
double orbit_amplitude(const Eigen::VectorXd& x, int n_dofs,
                       const Eigen::VectorXd& functional, int n_samples = 256);

}  // namespace vibrom

#include "vibrom/continuation.hpp"

namespace vibrom {

struct FrfSettings {
  HbSettings hb;
  double omega_min = 0.0, omega_max = 0.0;
  double step_init = 0.02, step_min = 1e-8, step_max = 0.2;
  double corrector_tol = 1e-9;
  int max_points = 4000;
  // displacement scale for the arc metric; 0 = estimate from the linear FRF
  double unknown_scale = 0.0;
};

// Wraps the HB residual of `form` at fixed beta into a ContinuationProblem.
ContinuationProblem make_hb_continuation(
    const SecondOrderForm& form, double beta, const FrfSettings& settings,
    std::function<double(const Eigen::VectorXd&, double)> amplitude);

// Convenience trace with amplitude functional max_t |w . q(t)|.
FrfCurve trace_hb_frf(const SecondOrderForm& form, double beta,
                      const Eigen::VectorXd& functional, const FrfSettings& settings);

}  // namespace vibrom
