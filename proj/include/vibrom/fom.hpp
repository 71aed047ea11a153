#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace vibrom {

// Full-order model
//   M u'' + C u' + K u + G(u,u) + H(u,u,u) = beta * F * cos(omega t)
// with C = (omega0/Q) M and polynomial internal forces stored as sparse
// monomial coefficients.

struct QuadTerm {
  int i, j, k;   // j <= k
  double value;  // coefficient of the monomial u_j*u_k in force component i
};

struct CubicTerm {
  int i, j, k, l;  // j <= k <= l
  double value;    // coefficient of u_j*u_k*u_l in force component i
};

struct FomSystem {
  int n_dofs = 0;
  Eigen::MatrixXd mass;
  Eigen::MatrixXd damping;
  Eigen::MatrixXd stiffness;
  std::vector<QuadTerm> quad_tensor;
  std::vector<CubicTerm> cubic_tensor;
  Eigen::VectorXd forcing_shape;
  double omega0 = 0.0;
  double quality = 0.0;
};

struct ForcingParams {
  double beta = 0.0;   // amplitude multiplier, >= 0
  double omega = 0.0;  // rad/s, > 0
};

struct PeriodicOrbit {
  double omega = 0.0;
  int n_harmonics = 0;
  // n_dofs x (2*n_harmonics+1), layout [a0 | a1..aN | b1..bN] per dof row.
  Eigen::MatrixXd fourier_coeffs;
  int samples_per_period = 0;

  int n_dofs() const { return static_cast<int>(fourier_coeffs.rows()); }
  // Displacements sampled over one period: n_dofs x n_samples.
  Eigen::MatrixXd sample(int n_samples) const;
  Eigen::MatrixXd sample_velocity(int n_samples) const;
};

struct EigenBasis {
  Eigen::VectorXd frequencies;  // ascending, rad/s
  Eigen::MatrixXd modes;        // mass-normalized columns
};

using ParamMap = std::map<std::string, double>;

// Documented defaults for each built-in benchmark (see docs/benchmarks.txt).
ParamMap benchmark_defaults(const std::string& name);

// Benchmarks: duffing1, mirror_analogue, arch_ir12, gyro_autoparam.
// Entries in `params` override the defaults.
FomSystem build_benchmark(const std::string& name, const ParamMap& params = {});

EigenBasis eigen_solve(const FomSystem& sys, int n_modes);

// K u + G(u,u) + H(u,u,u)
Eigen::VectorXd internal_force(const FomSystem& sys, const Eigen::VectorXd& u);

// d/du of internal_force (tangent stiffness).
Eigen::MatrixXd tangent_stiffness(const FomSystem& sys, const Eigen::VectorXd& u);

struct NewmarkResult {
  Eigen::MatrixXd displacement;  // n_dofs x (n_steps+1)
  Eigen::MatrixXd velocity;
  std::vector<double> cycle_change;  // per-cycle relative L2 displacement change
  bool steady = false;
  int steady_cycle = -1;
};

struct NewmarkSettings {
  double newton_tol = 1e-10;
  int max_newton_iters = 30;
  double steady_tol = 1e-8;
};

NewmarkResult newmark_march(const FomSystem& sys, const ForcingParams& f,
                            int n_cycles, int steps_per_cycle,
                            const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                            const NewmarkSettings& settings = {});

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vibrom
