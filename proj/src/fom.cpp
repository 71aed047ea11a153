#include "vibrom/fom.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "vibrom/fourier.hpp"

namespace vibrom {

Eigen::MatrixXd PeriodicOrbit::sample(int ns) const {
  return fourier_coeffs * fourier_basis(n_harmonics, ns).transpose();
}

Eigen::MatrixXd PeriodicOrbit::sample_velocity(int ns) const {
  Eigen::MatrixXd dcoeffs(fourier_coeffs.rows(), fourier_coeffs.cols());
  for (int r = 0; r < fourier_coeffs.rows(); ++r)
    dcoeffs.row(r) = fourier_differentiate(fourier_coeffs.row(r), omega).transpose();
  return dcoeffs * fourier_basis(n_harmonics, ns).transpose();
}

namespace {

// Dense symmetric potential tensors accumulated in physical coordinates;
// compressed at the end into sorted-index monomial storage.
struct PotentialBuilder {
  int n;
  std::vector<double> p3;  // n^3
  std::vector<double> p4;  // n^4

  explicit PotentialBuilder(int n_dofs)
      : n(n_dofs), p3(n * n * n, 0.0), p4(n * n * n * n, 0.0) {}

  double& at3(int i, int j, int k) { return p3[(i * n + j) * n + k]; }
  double& at4(int i, int j, int k, int l) { return p4[((i * n + j) * n + k) * n + l]; }

  // Add w * eta_a * eta_b * eta_c with eta = Phi^T M u, i.e. modal monomial.
  void add_cubic_modal(const Eigen::MatrixXd& proj, double w, int a, int b, int c) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          at3(i, j, k) += w * proj(a, i) * proj(b, j) * proj(c, k);
  }

  void add_quartic_modal(const Eigen::MatrixXd& proj, double w, int a, int b, int c, int d) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            at4(i, j, k, l) += w * proj(a, i) * proj(b, j) * proj(c, k) * proj(d, l);
  }

  // Force tensors F_i = dV/du_i as monomial coefficients, j<=k (<=l).
  void emit(FomSystem& sys) const {
    const double tol = 1e-15;
    // symmetrize p3 over all index permutations
    std::vector<double> s3(p3.size(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = (p3[(i * n + j) * n + k] + p3[(i * n + k) * n + j] +
                      p3[(j * n + i) * n + k] + p3[(j * n + k) * n + i] +
                      p3[(k * n + i) * n + j] + p3[(k * n + j) * n + i]) /
                     6.0;
          s3[(i * n + j) * n + k] = v;
        }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          double mult = (j == k) ? 1.0 : 2.0;
          double c = 3.0 * s3[(i * n + j) * n + k] * mult;
          if (std::abs(c) > tol) sys.quad_tensor.push_back({i, j, k, c});
        }

    std::vector<double> s4(p4.size(), 0.0);
    std::array<int, 4> idx{};
    for (idx[0] = 0; idx[0] < n; ++idx[0])
      for (idx[1] = 0; idx[1] < n; ++idx[1])
        for (idx[2] = 0; idx[2] < n; ++idx[2])
          for (idx[3] = 0; idx[3] < n; ++idx[3]) {
            std::array<int, 4> p = idx;
            std::sort(p.begin(), p.end());
            double sum = 0.0;
            int count = 0;
            do {
              sum += p4[((p[0] * n + p[1]) * n + p[2]) * n + p[3]];
              ++count;
            } while (std::next_permutation(p.begin(), p.end()));
            s4[((idx[0] * n + idx[1]) * n + idx[2]) * n + idx[3]] = sum / count;
          }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k)
          for (int l = k; l < n; ++l) {
            double mult;
            if (j == k && k == l)
              mult = 1.0;
            else if (j == k || k == l)
              mult = 3.0;
            else
              mult = 6.0;
            double c = 4.0 * s4[((i * n + j) * n + k) * n + l] * mult;
            if (std::abs(c) > tol) sys.cubic_tensor.push_back({i, j, k, l, c});
          }
  }
};

Eigen::MatrixXd rotation2(double theta) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

Eigen::MatrixXd rotation3(double a, double b, double c) {
  Eigen::MatrixXd rx = Eigen::MatrixXd::Identity(3, 3);
  rx(1, 1) = std::cos(a); rx(1, 2) = -std::sin(a);
  rx(2, 1) = std::sin(a); rx(2, 2) = std::cos(a);
  Eigen::MatrixXd ry = Eigen::MatrixXd::Identity(3, 3);
  ry(0, 0) = std::cos(b); ry(0, 2) = std::sin(b);
  ry(2, 0) = -std::sin(b); ry(2, 2) = std::cos(b);
  Eigen::MatrixXd rz = Eigen::MatrixXd::Identity(3, 3);
  rz(0, 0) = std::cos(c); rz(0, 1) = -std::sin(c);
  rz(1, 0) = std::sin(c); rz(1, 1) = std::cos(c);
  return rz * ry * rx;
}

double get(const ParamMap& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::invalid_argument("missing benchmark parameter: " + key);
  return it->second;
}

ParamMap merged(const std::string& name, const ParamMap& overrides) {
  ParamMap p = benchmark_defaults(name);
  for (const auto& [k, v] : overrides) {
    if (!p.count(k)) throw std::invalid_argument("unknown parameter '" + k + "' for benchmark " + name);
    p[k] = v;
  }
  return p;
}

void finish_linear(FomSystem& sys, const Eigen::MatrixXd& modes,
                   const Eigen::VectorXd& omegas, double omega0, double quality) {
  // K from prescribed mass-normalized eigenstructure: K = M Phi diag(w^2) Phi^T M.
  sys.stiffness = sys.mass * modes * omegas.array().square().matrix().asDiagonal() *
                  modes.transpose() * sys.mass;
  sys.stiffness = 0.5 * (sys.stiffness + sys.stiffness.transpose()).eval();
  sys.omega0 = omega0;
  sys.quality = quality;
  sys.damping = (omega0 / quality) * sys.mass;
}

void check_spacing(const Eigen::VectorXd& omegas, const std::string& name) {
  // no eigenfrequency ratio within 5% of 1, 2 or 3 (mirror_analogue contract)
  int n = static_cast<int>(omegas.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double r = omegas(i) / omegas(j);
      for (double target : {1.0, 2.0, 3.0})
        if (std::abs(r / target - 1.0) < 0.05)
          throw std::invalid_argument(name + ": eigenfrequency ratio " + std::to_string(r) +
                                      " too close to " + std::to_string(target));
    }
}

}  // namespace

ParamMap benchmark_defaults(const std::string& name) {
  if (name == "duffing1")
    return {{"m", 1.0}, {"omega0", 1.0}, {"Q", 1000.0}, {"gamma", 0.1}};
  if (name == "mirror_analogue")
    return {{"omega0", 1.0}, {"Q", 1000.0}, {"ratio_lo", 0.62}, {"ratio_hi", 1.73},
            {"q_lo", 0.3},   {"q_hi", 0.2}, {"gamma", 0.5}};
  if (name == "arch_ir12")
    return {{"omega0", 1.0}, {"Q", 500.0},  {"ratio", 1.99},
            {"kappa", 0.4},  {"gamma1", 0.2}, {"gamma2", 0.2}};
  if (name == "gyro_autoparam")
    return {{"omega0", 1.0}, {"Q", 200.0}, {"ratio", 0.998},
            {"kappa", 1.0},  {"gamma_soft", 0.05}, {"imperfection", 1e-3}};
  throw std::invalid_argument("unknown benchmark: " + name);
}

FomSystem build_benchmark(const std::string& name, const ParamMap& overrides) {
  ParamMap p = merged(name, overrides);
  FomSystem sys;

  if (name == "duffing1") {
    double m = get(p, "m"), w0 = get(p, "omega0"), q = get(p, "Q"), gamma = get(p, "gamma");
    sys.n_dofs = 1;
    sys.mass = Eigen::MatrixXd::Constant(1, 1, m);
    sys.stiffness = Eigen::MatrixXd::Constant(1, 1, m * w0 * w0);
    sys.omega0 = w0;
    sys.quality = q;
    sys.damping = (w0 / q) * sys.mass;
    sys.cubic_tensor.push_back({0, 0, 0, 0, gamma});
    sys.forcing_shape = Eigen::VectorXd::Constant(1, 1.0);
    return sys;
  }

  if (name == "mirror_analogue") {
    double w0 = get(p, "omega0"), q = get(p, "Q");
    sys.n_dofs = 3;
    sys.mass = Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd modes = rotation3(0.3, 0.2, 0.4);
    Eigen::VectorXd omegas(3);
    omegas << get(p, "ratio_lo") * w0, w0, get(p, "ratio_hi") * w0;
    check_spacing(omegas, name);
    finish_linear(sys, modes, omegas, w0, q);

    // master is mode 1 (mid-spectrum); eta = Phi^T M u
    Eigen::MatrixXd proj = modes.transpose() * sys.mass;
    PotentialBuilder pot(3);
    pot.add_cubic_modal(proj, get(p, "q_lo"), 1, 1, 0);   // eta_m^2 eta_lo
    pot.add_cubic_modal(proj, get(p, "q_hi"), 1, 1, 2);   // eta_m^2 eta_hi
    pot.add_quartic_modal(proj, 0.25 * get(p, "gamma"), 1, 1, 1, 1);
    pot.emit(sys);
    sys.forcing_shape = sys.mass * modes.col(1);
    return sys;
  }

  if (name == "arch_ir12") {
    double w0 = get(p, "omega0"), q = get(p, "Q"), ratio = get(p, "ratio");
    if (ratio < 1.98 || ratio > 2.02)
      throw std::invalid_argument("arch_ir12: frequency ratio must lie in [1.98, 2.02]");
    sys.n_dofs = 2;
    sys.mass = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd modes = rotation2(0.35);
    Eigen::VectorXd omegas(2);
    omegas << w0, ratio * w0;
    finish_linear(sys, modes, omegas, w0, q);

    Eigen::MatrixXd proj = modes.transpose() * sys.mass;
    PotentialBuilder pot(2);
    pot.add_cubic_modal(proj, get(p, "kappa"), 0, 0, 1);  // the 1:2 coupling eta_1^2 eta_2
    pot.add_quartic_modal(proj, 0.25 * get(p, "gamma1"), 0, 0, 0, 0);
    pot.add_quartic_modal(proj, 0.25 * get(p, "gamma2"), 1, 1, 1, 1);
    pot.emit(sys);
    sys.forcing_shape = sys.mass * modes.col(0);
    return sys;
  }

  if (name == "gyro_autoparam") {
    double w0 = get(p, "omega0"), q = get(p, "Q"), ratio = get(p, "ratio");
    sys.n_dofs = 2;
    sys.mass = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd modes = rotation2(0.12);
    Eigen::VectorXd omegas(2);
    omegas << w0, ratio * w0;  // drive, sense nearly degenerate
    finish_linear(sys, modes, omegas, w0, q);

    Eigen::MatrixXd proj = modes.transpose() * sys.mass;
    PotentialBuilder pot(2);
    // (kappa/2) eta_drive^2 eta_sense^2: the sense stiffness is modulated by
    // the drive motion at twice its frequency.
    pot.add_quartic_modal(proj, 0.5 * get(p, "kappa"), 0, 0, 1, 1);
    // softening of the drive mode
    pot.add_quartic_modal(proj, -0.25 * get(p, "gamma_soft"), 0, 0, 0, 0);
    pot.emit(sys);
    sys.forcing_shape = sys.mass * (modes.col(0) + get(p, "imperfection") * modes.col(1));
    return sys;
  }

  throw std::invalid_argument("unknown benchmark: " + name);
}

EigenBasis eigen_solve(const FomSystem& sys, int n_modes) {
  if (n_modes > sys.n_dofs) throw std::invalid_argument("eigen_solve: m > n_dofs");
  Eigen::LLT<Eigen::MatrixXd> llt(sys.mass);
  if (llt.info() != Eigen::Success) throw SolverError("eigen_solve: mass matrix not SPD");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.stiffness, sys.mass);
  if (es.info() != Eigen::Success) throw SolverError("eigen_solve: eigensolver failed");
  EigenBasis basis;
  basis.frequencies = es.eigenvalues().head(n_modes).array().max(0.0).sqrt();
  basis.modes = es.eigenvectors().leftCols(n_modes);  // already M-normalized
  return basis;
}

Eigen::VectorXd internal_force(const FomSystem& sys, const Eigen::VectorXd& u) {
  Eigen::VectorXd f = sys.stiffness * u;
  for (const auto& t : sys.quad_tensor) f(t.i) += t.value * u(t.j) * u(t.k);
  for (const auto& t : sys.cubic_tensor) f(t.i) += t.value * u(t.j) * u(t.k) * u(t.l);
  return f;
}

Eigen::MatrixXd tangent_stiffness(const FomSystem& sys, const Eigen::VectorXd& u) {
  Eigen::MatrixXd kt = sys.stiffness;
  for (const auto& t : sys.quad_tensor) {
    kt(t.i, t.j) += t.value * u(t.k);
    kt(t.i, t.k) += t.value * u(t.j);
  }
  for (const auto& t : sys.cubic_tensor) {
    kt(t.i, t.j) += t.value * u(t.k) * u(t.l);
    kt(t.i, t.k) += t.value * u(t.j) * u(t.l);
    kt(t.i, t.l) += t.value * u(t.j) * u(t.k);
  }
  return kt;
}

NewmarkResult newmark_march(const FomSystem& sys, const ForcingParams& f,
                            int n_cycles, int steps_per_cycle,
                            const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                            const NewmarkSettings& settings) {
  if (steps_per_cycle < 50) throw std::invalid_argument("newmark_march: steps_per_cycle < 50");
  const int n = sys.n_dofs;
  const double period = 2.0 * M_PI / f.omega;
  const double dt = period / steps_per_cycle;
  const double beta_nm = 0.25, gamma_nm = 0.5;  // average acceleration

  NewmarkResult out;
  const int n_steps = n_cycles * steps_per_cycle;
  out.displacement.resize(n, n_steps + 1);
  out.velocity.resize(n, n_steps + 1);

  Eigen::VectorXd u = u0, v = v0;
  Eigen::VectorXd fext = f.beta * std::cos(0.0) * sys.forcing_shape;
  Eigen::VectorXd a = sys.mass.ldlt().solve(fext - sys.damping * v - internal_force(sys, u));
  out.displacement.col(0) = u;
  out.velocity.col(0) = v;

  const double c0 = 1.0 / (beta_nm * dt * dt);
  const double c1 = gamma_nm / (beta_nm * dt);
  double force_scale = std::max(f.beta * sys.forcing_shape.norm(), 1e-30);

  Eigen::MatrixXd prev_cycle(n, steps_per_cycle);
  Eigen::MatrixXd this_cycle(n, steps_per_cycle);

  for (int step = 1; step <= n_steps; ++step) {
    double t = step * dt;
    fext = f.beta * std::cos(f.omega * t) * sys.forcing_shape;

    // predictors (constant-displacement start)
    Eigen::VectorXd u_new = u;
    bool converged = false;
    for (int it = 0; it < settings.max_newton_iters; ++it) {
      Eigen::VectorXd a_new = c0 * (u_new - u) - (1.0 / (beta_nm * dt)) * v -
                              (0.5 / beta_nm - 1.0) * a;
      Eigen::VectorXd v_new = v + dt * ((1.0 - gamma_nm) * a + gamma_nm * a_new);
      Eigen::VectorXd res = sys.mass * a_new + sys.damping * v_new +
                            internal_force(sys, u_new) - fext;
      if (res.norm() <= settings.newton_tol * force_scale ||
          res.norm() <= settings.newton_tol) {
        converged = true;
        u = u_new;
        v = v_new;
        a = a_new;
        break;
      }
      Eigen::MatrixXd jac = c0 * sys.mass + c1 * sys.damping + tangent_stiffness(sys, u_new);
      u_new -= jac.partialPivLu().solve(res);
    }
    if (!converged)
      throw SolverError("newmark_march: Newton failed at step " + std::to_string(step));

    out.displacement.col(step) = u;
    out.velocity.col(step) = v;

    int in_cycle = (step - 1) % steps_per_cycle;
    this_cycle.col(in_cycle) = u;
    if (in_cycle == steps_per_cycle - 1) {
      int cycle = step / steps_per_cycle;
      if (cycle >= 2) {
        double denom = std::max(prev_cycle.norm(), 1e-30);
        double change = (this_cycle - prev_cycle).norm() / denom;
        out.cycle_change.push_back(change);
        if (!out.steady && change < settings.steady_tol) {
          out.steady = true;
          out.steady_cycle = cycle;
        }
      }
      prev_cycle = this_cycle;
    }
  }
  return out;
}

}  // namespace vibrom
