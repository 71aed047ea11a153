#pragma once

#include <Eigen/Dense>

namespace vibrom {

// Real Fourier series on a uniform period grid.
//
// Coefficient layout for a series with nh harmonics:
//   [a0, a1 .. a_nh, b1 .. b_nh]   (2*nh+1 entries)
// representing  u(t) = a0 + sum_k a_k cos(k w t) + b_k sin(k w t).

// Number of AFT time samples for nh harmonics: 4*nh+1 rounded up to the
// next power of two, so cubic products of the series stay alias-free.
int aft_sample_count(int n_harmonics);

// E(t, :) evaluates the basis functions at sample t of a uniform period
// grid with n_samples points, phase theta_t = 2*pi*t/n_samples.
Eigen::MatrixXd fourier_basis(int n_harmonics, int n_samples);

// d/dt of the basis divided by omega (multiply by omega to get the true
// time derivative).
Eigen::MatrixXd fourier_basis_dtheta(int n_harmonics, int n_samples);

// P such that coeffs = P * samples recovers the coefficients of a
// trigonometric polynomial from its uniform samples (exact whenever
// n_samples > 2*n_harmonics).
Eigen::MatrixXd fourier_projection(int n_harmonics, int n_samples);

// Coefficients -> samples for one signal.
Eigen::VectorXd fourier_synthesize(const Eigen::VectorXd& coeffs, int n_samples);

// Samples -> coefficients, truncated at n_harmonics.
Eigen::VectorXd fourier_analyze(const Eigen::VectorXd& samples, int n_harmonics);

// Differentiate a coefficient vector in time: harmonic k rotates
// (a_k, b_k) -> (k w b_k, -k w a_k).
Eigen::VectorXd fourier_differentiate(const Eigen::VectorXd& coeffs, double omega);

}  // namespace vibrom
