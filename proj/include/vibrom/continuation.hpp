#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "vibrom/fom.hpp"

namespace vibrom {

// Pseudo-arclength continuation over a generic periodic residual
// R(x, omega) = 0, marching omega_min -> omega_max around folds.

struct ContinuationProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> residual;
  std::function<void(const Eigen::VectorXd&, double, Eigen::MatrixXd&, Eigen::VectorXd&)>
      jacobian;  // fills dR/dx and dR/domega
  int unknown_dim = 0;
  double omega_min = 0.0, omega_max = 0.0;
  double step_init = 0.01, step_min = 1e-7, step_max = 0.2;
  // arc-length metric scales (unknowns divided by unknown_scale, omega by omega_scale)
  double unknown_scale = 1.0;
  double omega_scale = 1.0;
  double corrector_tol = 1e-9;
  int max_corrector_iters = 12;
  int max_points = 4000;
  std::function<double(const Eigen::VectorXd&, double)> amplitude;
};

struct FrfPoint {
  double omega = 0.0;
  double amplitude = 0.0;
  Eigen::VectorXd unknown;
};

struct FrfCurve {
  std::vector<FrfPoint> points;
  double beta = 0.0;
  std::vector<int> fold_indices;  // points where d(omega)/ds changes sign
};

// One Newton correction of a predicted point onto {R = 0, arc constraint = 0}.
// The arc constraint keeps (x, omega) orthogonal to the (scaled) tangent
// through the predicted point. Throws SolverError on non-convergence.
void corrector(const ContinuationProblem& problem, Eigen::VectorXd& x, double& omega,
               const Eigen::VectorXd& tangent_x, double tangent_omega,
               const Eigen::VectorXd& pred_x, double pred_omega, double tol);

// Full adaptive trace from a converged point at omega_min.
FrfCurve trace_frf(const ContinuationProblem& problem, double beta,
                   const Eigen::VectorXd& x_start);

}  // namespace vibrom
