#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "vibrom/fourier.hpp"
#include "vibrom/hb.hpp"

using namespace vibrom;

namespace {

// analytic steady amplitude of the 1-dof linear oscillator u'' + mu u' + w0^2 u
double linear_amplitude(double w0, double mu, double beta, double omega) {
  return beta / std::hypot(w0 * w0 - omega * omega, mu * omega);
}

// Independent Galerkin residual by dense trapezoid quadrature in time:
// r_kj = <psi_k, M q'' + C q' + f_int(q) - beta F cos(w t)> with the same
// projection weights as the Fourier rows (2/ns, mean row 1/ns).
Eigen::VectorXd quadrature_residual(const FomSystem& sys, const Eigen::VectorXd& x,
                                    double omega, double beta, int nh, int ns) {
  const int n = sys.n_dofs;
  Eigen::MatrixXd coeffs = unstack_coeffs(x, n);
  Eigen::MatrixXd basis = fourier_basis(nh, ns);

  Eigen::MatrixXd q = coeffs * basis.transpose();
  Eigen::MatrixXd dq(n, ns), ddq(n, ns);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd d1 = fourier_differentiate(coeffs.row(i), omega);
    Eigen::VectorXd d2 = fourier_differentiate(d1, omega);
    dq.row(i) = fourier_synthesize(d1, ns).transpose();
    ddq.row(i) = fourier_synthesize(d2, ns).transpose();
  }

  Eigen::MatrixXd res_time(n, ns);
  for (int t = 0; t < ns; ++t) {
    double theta = 2.0 * M_PI * t / ns;
    res_time.col(t) = sys.mass * ddq.col(t) + sys.damping * dq.col(t) +
                      internal_force(sys, q.col(t)) -
                      beta * std::cos(theta) * sys.forcing_shape;
  }

  Eigen::MatrixXd r(n, 2 * nh + 1);
  for (int i = 0; i < n; ++i) {
    r(i, 0) = res_time.row(i).mean();
    for (int k = 1; k <= nh; ++k) {
      double rc = 0.0, rs = 0.0;
      for (int t = 0; t < ns; ++t) {
        double theta = 2.0 * M_PI * t / ns;
        rc += res_time(i, t) * std::cos(k * theta);
        rs += res_time(i, t) * std::sin(k * theta);
      }
      r(i, k) = 2.0 * rc / ns;
      r(i, nh + k) = 2.0 * rs / ns;
    }
  }
  return stack_coeffs(r);
}

}  // namespace

TEST_CASE("linear HB is exact: solution matches the analytic FRF") {
  FomSystem sys = build_benchmark("duffing1", {{"gamma", 0.0}});
  double mu = sys.omega0 / sys.quality;
  for (double omega : {0.7, 0.95, 1.2}) {
    ForcingParams f{0.01, omega};
    PeriodicOrbit orbit = hb_solve(sys, f);
    double a1 = orbit.fourier_coeffs(0, 1);
    double b1 = orbit.fourier_coeffs(0, orbit.n_harmonics + 1);
    double amp = std::hypot(a1, b1);
    CHECK(amp == doctest::Approx(linear_amplitude(1.0, mu, f.beta, omega))
                     .epsilon(1e-10));
    // phase: tan(phi) = mu w / (w0^2 - w^2) with u = A cos(wt - phi)
    double phi = std::atan2(mu * omega, 1.0 - omega * omega);
    CHECK(std::atan2(b1, a1) == doctest::Approx(phi).epsilon(1e-8));
    // every other harmonic vanishes
    CHECK(std::abs(orbit.fourier_coeffs(0, 0)) < 1e-12);
    CHECK(std::abs(orbit.fourier_coeffs(0, 2)) < 1e-12);
  }
}

TEST_CASE("exact linear orbit of the linear system has near-zero residual") {
  FomSystem sys = build_benchmark("mirror_analogue");
  FomSystem lin = sys;
  lin.quad_tensor.clear();
  lin.cubic_tensor.clear();
  SecondOrderForm form = fom_form(lin);
  int nh = 5;
  double omega = 0.9, beta = 0.02;
  Eigen::VectorXd x = hb_linear_solution(form, omega, beta, nh);
  CHECK(hb_residual(form, x, omega, beta, nh).norm() < 1e-12);
}

TEST_CASE("HB residual matches the dense quadrature Galerkin oracle") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-0.2, 0.2);
  for (const char* name : {"mirror_analogue", "arch_ir12"}) {
    CAPTURE(name);
    FomSystem sys = build_benchmark(name);
    SecondOrderForm form = fom_form(sys);
    const int nh = 5;
    Eigen::VectorXd x(sys.n_dofs * (2 * nh + 1));
    for (int i = 0; i < x.size(); ++i) x(i) = dist(rng);
    double omega = 1.1, beta = 0.3;
    Eigen::VectorXd r = hb_residual(form, x, omega, beta, nh);
    Eigen::VectorXd oracle = quadrature_residual(sys, x, omega, beta, nh, 4096);
    CHECK((r - oracle).norm() < 1e-10 * std::max(1.0, oracle.norm()));
  }
}

TEST_CASE("HB jacobian matches finite differences, including the omega column") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  FomSystem sys = build_benchmark("arch_ir12");
  SecondOrderForm form = fom_form(sys);
  const int nh = 3;
  const int dim = sys.n_dofs * (2 * nh + 1);
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x(i) = dist(rng);
  double omega = 1.05, beta = 0.2;

  Eigen::MatrixXd jx;
  Eigen::VectorXd jw;
  hb_jacobian(form, x, omega, beta, nh, jx, jw);

  const double eps = 1e-7;
  for (int j = 0; j < dim; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += eps;
    xm(j) -= eps;
    Eigen::VectorXd fd = (hb_residual(form, xp, omega, beta, nh) -
                          hb_residual(form, xm, omega, beta, nh)) /
                         (2 * eps);
    CHECK((jx.col(j) - fd).norm() < 1e-6);
  }
  Eigen::VectorXd fdw = (hb_residual(form, x, omega + eps, beta, nh) -
                         hb_residual(form, x, omega - eps, beta, nh)) /
                        (2 * eps);
  CHECK((jw - fdw).norm() < 1e-6);
}

TEST_CASE("hb_solve meets its residual contract on the nonlinear duffing") {
  FomSystem sys = build_benchmark("duffing1");
  ForcingParams f{0.05, 1.02};
  PeriodicOrbit orbit = hb_solve(sys, f);
  CHECK(hb_residual(sys, orbit, f).norm() <= 1e-10);
}

TEST_CASE("Newton on the HB residual converges quadratically") {
  FomSystem sys = build_benchmark("duffing1");
  SecondOrderForm form = fom_form(sys);
  const int nh = 7;
  double omega = 1.02, beta = 0.05;
  HbSettings hs;
  Eigen::VectorXd x_star =
      hb_solve_coeffs(form, omega, beta, hb_linear_solution(form, omega, beta, nh), hs);

  // perturb and track the Newton error sequence
  Eigen::VectorXd x = x_star;
  x(1) += 1e-2;
  std::vector<double> errs;
  for (int it = 0; it < 4; ++it) {
    errs.push_back((x - x_star).norm());
    Eigen::MatrixXd jx;
    Eigen::VectorXd jw;
    hb_jacobian(form, x, omega, beta, nh, jx, jw);
    x -= jx.partialPivLu().solve(hb_residual(form, x, omega, beta, nh));
  }
  // quadratic contraction: e_{k+1} <= C e_k^2 with a modest constant
  CHECK(errs[1] < 50.0 * errs[0] * errs[0]);
  CHECK(errs[2] < 50.0 * errs[1] * errs[1]);
}

TEST_CASE("duffing backbone follows the first-order perturbation formula") {
  FomSystem sys = build_benchmark("duffing1", {{"Q", 200.0}});
  const double gamma = 0.1, w0 = 1.0, mu = w0 / 200.0;
  Eigen::VectorXd functional = Eigen::VectorXd::Constant(1, 1.0);
  SecondOrderForm form = fom_form(sys);

  for (double target_a : {0.05, 0.08, 0.1}) {
    // at resonance peak the response amplitude is a = beta/(mu*w) to first
    // order; pick beta to land near target_a and locate the actual peak
    double beta = target_a * mu * w0;
    FrfSettings fs;
    fs.omega_min = 0.99;
    fs.omega_max = 1.02;
    fs.step_init = 0.01;
    FrfCurve curve = trace_hb_frf(form, beta, functional, fs);
    double best_a = -1.0, best_w = 0.0;
    for (const FrfPoint& pt : curve.points)
      if (pt.amplitude > best_a) {
        best_a = pt.amplitude;
        best_w = pt.omega;
      }
    double backbone = w0 * (1.0 + 3.0 * gamma * best_a * best_a / (8.0 * w0 * w0));
    CHECK(best_w == doctest::Approx(backbone).epsilon(0.01));
  }
}
