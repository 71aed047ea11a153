#include "vibrom/fourier.hpp"

#include <cmath>

namespace vibrom {

int aft_sample_count(int n_harmonics) {
  int need = 4 * n_harmonics + 1;
  int n = 1;
  while (n < need) n *= 2;
  return n;
}

Eigen::MatrixXd fourier_basis(int nh, int ns) {
  Eigen::MatrixXd E(ns, 2 * nh + 1);
  for (int t = 0; t < ns; ++t) {
    double theta = 2.0 * M_PI * t / ns;
    E(t, 0) = 1.0;
    for (int k = 1; k <= nh; ++k) {
      E(t, k) = std::cos(k * theta);
      E(t, nh + k) = std::sin(k * theta);
    }
  }
  return E;
}

Eigen::MatrixXd fourier_basis_dtheta(int nh, int ns) {
  Eigen::MatrixXd D(ns, 2 * nh + 1);
  for (int t = 0; t < ns; ++t) {
    double theta = 2.0 * M_PI * t / ns;
    D(t, 0) = 0.0;
    for (int k = 1; k <= nh; ++k) {
      D(t, k) = -k * std::sin(k * theta);
      D(t, nh + k) = k * std::cos(k * theta);
    }
  }
  return D;
}

Eigen::MatrixXd fourier_projection(int nh, int ns) {
  Eigen::MatrixXd E = fourier_basis(nh, ns);
  Eigen::MatrixXd P = E.transpose() * (2.0 / ns);
  P.row(0) *= 0.5;  // mean component
  return P;
}

Eigen::VectorXd fourier_synthesize(const Eigen::VectorXd& coeffs, int ns) {
  int nh = static_cast<int>((coeffs.size() - 1) / 2);
  return fourier_basis(nh, ns) * coeffs;
}

Eigen::VectorXd fourier_analyze(const Eigen::VectorXd& samples, int nh) {
  return fourier_projection(nh, static_cast<int>(samples.size())) * samples;
}

Eigen::VectorXd fourier_differentiate(const Eigen::VectorXd& coeffs, double omega) {
  int nh = static_cast<int>((coeffs.size() - 1) / 2);
  Eigen::VectorXd d = Eigen::VectorXd::Zero(coeffs.size());
  for (int k = 1; k <= nh; ++k) {
    d(k) = k * omega * coeffs(nh + k);
    d(nh + k) = -k * omega * coeffs(k);
  }
  return d;
}

}  // namespace vibrom
