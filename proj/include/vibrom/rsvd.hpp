#pragma once

#include <Eigen/Dense>
#include <random>

namespace vibrom {

struct PodBasis {
  Eigen::MatrixXd basis;            // N_h x N, orthonormal columns
  Eigen::VectorXd singular_values;  // descending estimates
  double energy_retained = 1.0;
  bool rank_padded = false;  // requested N exceeded the numerical rank
};

// Randomized range finder + small dense SVD (Gaussian test matrix,
// oversampling, power iterations with QR re-orthonormalization).
PodBasis rsvd(const Eigen::MatrixXd& matrix, int n_modes, int oversampling,
              int power_iters, std::mt19937_64& rng);

}  // namespace vibrom
