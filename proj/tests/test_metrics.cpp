#include <cmath>
#include <random>

#include "doctest.h"
#include "vibrom/fourier.hpp"
#include "vibrom/metrics.hpp"

using namespace vibrom;

namespace {

EigenBasis orthonormal_basis_3() {
  FomSystem sys = build_benchmark("mirror_analogue");
  return eigen_solve(sys, 3);
}

Eigen::MatrixXd single_mode_states(const EigenBasis& basis, int mode, int ns) {
  Eigen::MatrixXd states(basis.modes.rows(), ns);
  for (int t = 0; t < ns; ++t)
    states.col(t) = basis.modes.col(mode) * std::cos(2.0 * M_PI * t / ns);
  return states;
}

}  // namespace

TEST_CASE("modal coordinate of a pure mode is its time law, amplitude 1") {
  FomSystem sys = build_benchmark("mirror_analogue");
  EigenBasis basis = eigen_solve(sys, 3);
  int ns = 128;
  Eigen::MatrixXd states = single_mode_states(basis, 1, ns);
  ModalTrace tr = modal_coordinate(basis, sys.mass, states, 1, 1.0);
  CHECK(tr.amplitude == doctest::Approx(1.0).epsilon(1e-12));
  for (int t = 0; t < ns; ++t)
    CHECK(tr.u(t) == doctest::Approx(std::cos(2.0 * M_PI * t / ns)).epsilon(1e-11));
}

TEST_CASE("modal coordinate of an orthogonal mode vanishes") {
  FomSystem sys = build_benchmark("mirror_analogue");
  EigenBasis basis = eigen_solve(sys, 3);
  Eigen::MatrixXd states = single_mode_states(basis, 0, 64);
  ModalTrace tr = modal_coordinate(basis, sys.mass, states, 2, 1.0);
  CHECK(tr.u.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("modal coordinate index out of range throws") {
  FomSystem sys = build_benchmark("mirror_analogue");
  EigenBasis basis = eigen_solve(sys, 3);
  Eigen::MatrixXd states = single_mode_states(basis, 0, 64);
  CHECK_THROWS_AS(modal_coordinate(basis, sys.mass, states, 3, 1.0), std::out_of_range);
}

TEST_CASE("projection is linear") {
  FomSystem sys = build_benchmark("mirror_analogue");
  EigenBasis basis = eigen_solve(sys, 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  int ns = 64;
  Eigen::MatrixXd sa(3, ns), sb(3, ns);
  for (int t = 0; t < ns; ++t)
    for (int i = 0; i < 3; ++i) {
      sa(i, t) = dist(rng);
      sb(i, t) = dist(rng);
    }
  ModalTrace ta = modal_coordinate(basis, sys.mass, sa, 1, 1.0);
  ModalTrace tb = modal_coordinate(basis, sys.mass, sb, 1, 1.0);
  ModalTrace tsum = modal_coordinate(basis, sys.mass, sa + sb, 1, 1.0);
  CHECK((tsum.u - ta.u - tb.u).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("fourier velocity differentiates cos to -omega sin") {
  int ns = 128;
  double omega = 2.3;
  Eigen::VectorXd u(ns);
  for (int t = 0; t < ns; ++t) u(t) = std::cos(2.0 * M_PI * t / ns);
  Eigen::VectorXd v = fourier_velocity(u, omega, 10);
  for (int t = 0; t < ns; ++t)
    CHECK(v(t) == doctest::Approx(-omega * std::sin(2.0 * M_PI * t / ns)).epsilon(1e-10));
}

TEST_CASE("fourier velocity truncation keeps only retained harmonics") {
  int ns = 128;
  double omega = 1.0;
  Eigen::VectorXd u(ns);
  for (int t = 0; t < ns; ++t) {
    double theta = 2.0 * M_PI * t / ns;
    u(t) = std::cos(theta) + 0.1 * std::cos(3.0 * theta);
  }
  Eigen::VectorXd v = fourier_velocity(u, omega, 2);
  for (int t = 0; t < ns; ++t)
    CHECK(v(t) == doctest::Approx(-std::sin(2.0 * M_PI * t / ns)).epsilon(1e-10));
}

TEST_CASE("fourier velocity commutes with amplitude scaling") {
  int ns = 64;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd u(ns);
  for (int t = 0; t < ns; ++t) u(t) = dist(rng);
  Eigen::VectorXd v1 = fourier_velocity(3.5 * u, 1.2, 8);
  Eigen::VectorXd v2 = 3.5 * fourier_velocity(u, 1.2, 8);
  CHECK((v1 - v2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fourier velocity suppresses noise far better than finite differences") {
  int ns = 256;
  double omega = 1.0;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1e-3);
  Eigen::VectorXd u(ns);
  for (int t = 0; t < ns; ++t)
    u(t) = std::cos(2.0 * M_PI * t / ns) + noise(rng);

  Eigen::VectorXd v_fourier = fourier_velocity(u, omega, 5);
  double dt = 2.0 * M_PI / (omega * ns);
  Eigen::VectorXd v_fd(ns);
  for (int t = 0; t < ns; ++t)
    v_fd(t) = (u((t + 1) % ns) - u((t + ns - 1) % ns)) / (2.0 * dt);

  // high-frequency content = residual after removing the true derivative
  Eigen::VectorXd truth(ns);
  for (int t = 0; t < ns; ++t) truth(t) = -omega * std::sin(2.0 * M_PI * t / ns);
  double e_fourier = (v_fourier - truth).norm();
  double e_fd = (v_fd - truth).norm();
  CHECK(e_fd > 10.0 * e_fourier);
}

TEST_CASE("modal errors: identical traces give zero") {
  FomSystem sys = build_benchmark("mirror_analogue");
  Eigen::MatrixXd states = Eigen::MatrixXd::Random(3, 32);
  Eigen::VectorXd tr = states.row(0);
  ModalErrors e = modal_errors(tr, tr, states, sys.mass);
  REQUIRE(e.relative.has_value());
  CHECK(*e.relative == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(e.global == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("modal errors: 1.1x scaling of a trace gives E_rel = 0.1 exactly") {
  FomSystem sys = build_benchmark("mirror_analogue");
  Eigen::MatrixXd states = Eigen::MatrixXd::Random(3, 32);
  Eigen::VectorXd tr = states.row(1);
  ModalErrors e = modal_errors(tr, (1.1 * tr).eval(), states, sys.mass);
  REQUIRE(e.relative.has_value());
  CHECK(*e.relative == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("modal errors: silent reference mode reports relative error as absent") {
  FomSystem sys = build_benchmark("mirror_analogue");
  Eigen::MatrixXd states = Eigen::MatrixXd::Random(3, 32);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(32);
  Eigen::VectorXd test = Eigen::VectorXd::Constant(32, 0.2);
  ModalErrors e = modal_errors(zero, test, states, sys.mass);
  CHECK(!e.relative.has_value());
  CHECK(e.global > 0.0);
}

TEST_CASE("E_global relates to E_rel through the norm ratio") {
  FomSystem sys = build_benchmark("mirror_analogue");
  EigenBasis basis = eigen_solve(sys, 3);
  Eigen::MatrixXd states = single_mode_states(basis, 1, 64);
  ModalTrace tr = modal_coordinate(basis, sys.mass, states, 1, 1.0);
  Eigen::VectorXd test = 1.2 * tr.u;
  ModalErrors e = modal_errors(tr.u, test, states, sys.mass);

  double trace_norm = std::sqrt(tr.u.squaredNorm() / tr.u.size());
  Eigen::VectorXd energy(states.cols());
  for (int t = 0; t < states.cols(); ++t)
    energy(t) = states.col(t).dot(sys.mass * states.col(t));
  double global_norm = std::sqrt(energy.mean());
  REQUIRE(e.relative.has_value());
  CHECK(e.global ==
        doctest::Approx(*e.relative * trace_norm / global_norm).epsilon(1e-12));
}

TEST_CASE("manifold orbit table rows are consistent with modal traces") {
  FomSystem sys = build_benchmark("mirror_analogue");
  EigenBasis basis = eigen_solve(sys, 3);
  int ns = 64;
  Eigen::MatrixXd states(3, ns);
  for (int t = 0; t < ns; ++t) {
    double theta = 2.0 * M_PI * t / ns;
    states.col(t) = basis.modes.col(1) * std::cos(theta) +
                    basis.modes.col(0) * 0.3 * std::cos(2.0 * theta);
  }
  auto rows = manifold_orbit(basis, sys.mass, states, 1, 0, 1.0);
  REQUIRE(static_cast<int>(rows.size()) == ns);
  for (int t = 0; t < ns; ++t) {
    double theta = 2.0 * M_PI * t / ns;
    CHECK(rows[t].u_master == doctest::Approx(std::cos(theta)).epsilon(1e-10));
    CHECK(rows[t].u_plot == doctest::Approx(0.3 * std::cos(2.0 * theta)).epsilon(1e-10));
    CHECK(rows[t].v_master == doctest::Approx(-std::sin(theta)).epsilon(1e-10));
  }
}
