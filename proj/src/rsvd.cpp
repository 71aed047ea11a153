#include "vibrom/rsvd.hpp"

#include <stdexcept>

namespace vibrom {

PodBasis rsvd(const Eigen::MatrixXd& a, int n_modes, int oversampling,
              int power_iters, std::mt19937_64& rng) {
  const int rows = static_cast<int>(a.rows());
  const int cols = static_cast<int>(a.cols());
  if (n_modes > std::min(rows, cols))
    throw std::invalid_argument("rsvd: N exceeds matrix dimensions");

  int sketch = std::min(n_modes + oversampling, std::min(rows, cols));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd test(cols, sketch);
  for (int j = 0; j < sketch; ++j)
    for (int i = 0; i < cols; ++i) test(i, j) = gauss(rng);

  Eigen::MatrixXd y = a * test;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, sketch);
  for (int it = 0; it < power_iters; ++it) {
    Eigen::MatrixXd z = a.transpose() * q;
    Eigen::HouseholderQR<Eigen::MatrixXd> qrz(z);
    z = qrz.householderQ() * Eigen::MatrixXd::Identity(cols, sketch);
    y = a * z;
    Eigen::HouseholderQR<Eigen::MatrixXd> qry(y);
    q = qry.householderQ() * Eigen::MatrixXd::Identity(rows, sketch);
  }

  Eigen::MatrixXd b = q.transpose() * a;  // sketch x cols
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);

  PodBasis out;
  out.basis = q * svd.matrixU().leftCols(n_modes);
  out.singular_values = svd.singularValues().head(n_modes);

  double total = a.squaredNorm();
  double kept = out.singular_values.squaredNorm();
  out.energy_retained = total > 0.0 ? std::min(kept / total, 1.0) : 1.0;

  double s0 = svd.singularValues()(0);
  out.rank_padded =
      s0 > 0.0 && out.singular_values(n_modes - 1) < 1e-12 * s0;
  return out;
}

}  // namespace vibrom
