#include "vibrom/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "vibrom/fourier.hpp"

namespace vibrom {

Eigen::VectorXd fourier_velocity(const Eigen::VectorXd& samples, double omega, int n_keep) {
  int ns = static_cast<int>(samples.size());
  if (2 * n_keep >= ns) throw std::invalid_argument("fourier_velocity: n_keep beyond Nyquist");
  Eigen::VectorXd coeffs = fourier_analyze(samples, n_keep);
  return fourier_synthesize(fourier_differentiate(coeffs, omega), ns);
}

ModalTrace modal_coordinate(const EigenBasis& basis, const Eigen::MatrixXd& mass,
                            const Eigen::MatrixXd& states, int mode_index, double omega,
                            int n_keep) {
  if (mode_index < 0 || mode_index >= basis.modes.cols())
    throw std::out_of_range("modal_coordinate: mode index out of basis range");
  ModalTrace trace;
  trace.mode_index = mode_index;
  trace.u = (basis.modes.col(mode_index).transpose() * mass * states).transpose();
  trace.v = fourier_velocity(trace.u, omega, n_keep);
  trace.amplitude = trace.u.cwiseAbs().maxCoeff();
  return trace;
}

namespace {

// trapezoid L2 over one period sampled uniformly (periodic closure)
double periodic_l2(const Eigen::VectorXd& x) {
  // uniform weights: the wrap-around sample carries the same weight
  return std::sqrt(x.squaredNorm() / x.size());
}

}  // namespace

ModalErrors modal_errors(const Eigen::VectorXd& ref, const Eigen::VectorXd& test,
                         const Eigen::MatrixXd& reference_states,
                         const Eigen::MatrixXd& mass) {
  if (ref.size() != test.size())
    throw std::invalid_argument("modal_errors: traces on different grids");
  ModalErrors e;
  double diff = periodic_l2(ref - test);
  double ref_norm = periodic_l2(ref);
  if (ref_norm > 0.0) e.relative = diff / ref_norm;

  // global norm from the mass metric, time-averaged over the period
  Eigen::VectorXd energy(reference_states.cols());
  for (int t = 0; t < reference_states.cols(); ++t) {
    Eigen::VectorXd u = reference_states.col(t);
    energy(t) = u.dot(mass * u);
  }
  double global_norm = std::sqrt(energy.mean());
  e.global = global_norm > 0.0 ? diff / global_norm : 0.0;
  return e;
}

std::vector<OrbitRow> manifold_orbit(const EigenBasis& basis, const Eigen::MatrixXd& mass,
                                     const Eigen::MatrixXd& states, int master_mode,
                                     int plot_mode, double omega, int n_keep) {
  ModalTrace master = modal_coordinate(basis, mass, states, master_mode, omega, n_keep);
  ModalTrace plot = modal_coordinate(basis, mass, states, plot_mode, omega, n_keep);
  std::vector<OrbitRow> rows;
  rows.reserve(states.cols());
  for (int t = 0; t < states.cols(); ++t)
    rows.push_back({master.u(t), master.v(t), plot.u(t)});
  return rows;
}

}  // namespace vibrom
