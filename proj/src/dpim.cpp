#include "vibrom/dpim.hpp"

#include <cmath>

#include "vibrom/fourier.hpp"

namespace vibrom {

namespace {

// Symmetric bilinear form of the quadratic force: G(u,u) = quadratic part
// of internal_force.
Eigen::VectorXd quad_bilinear(const FomSystem& sys, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& w) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.n_dofs);
  for (const auto& t : sys.quad_tensor)
    f(t.i) += 0.5 * t.value * (u(t.j) * w(t.k) + u(t.k) * w(t.j));
  return f;
}

Eigen::VectorXd cubic_force(const FomSystem& sys, const Eigen::VectorXd& u) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.n_dofs);
  for (const auto& t : sys.cubic_tensor) f(t.i) += t.value * u(t.j) * u(t.k) * u(t.l);
  return f;
}

Eigen::VectorXd quad_force(const FomSystem& sys, const Eigen::VectorXd& u) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(sys.n_dofs);
  for (const auto& t : sys.quad_tensor) f(t.i) += t.value * u(t.j) * u(t.k);
  return f;
}

}  // namespace

DpimModel build_dpim(const FomSystem& sys, int master_index) {
  const int n = sys.n_dofs;
  EigenBasis basis = eigen_solve(sys, n);
  if (master_index < 0 || master_index >= n)
    throw std::invalid_argument("build_dpim: master index out of range");
  if (sys.quality < 100.0)
    throw std::invalid_argument("build_dpim: first-order damping treatment needs Q >= 100");

  const double wm = basis.frequencies(master_index);
  for (int i = 0; i < n; ++i) {
    if (i == master_index) continue;
    for (int mult = 1; mult <= 3; ++mult) {
      double r = mult * wm / basis.frequencies(i);
      if (std::abs(r - 1.0) < 0.05)
        throw std::invalid_argument(
            "build_dpim: resonance guard violated, " + std::to_string(mult) +
            "*omega_m / omega_" + std::to_string(i) + " = " + std::to_string(r));
    }
  }

  DpimModel model;
  model.master_index = master_index;
  model.phi = basis.modes.col(master_index);
  model.omega_m = wm;
  model.damping = sys.omega0 / sys.quality;
  model.forcing_scalar = model.phi.dot(sys.forcing_shape);

  const Eigen::MatrixXd& m = sys.mass;
  const Eigen::MatrixXd& k = sys.stiffness;
  const double mu = model.damping;
  const double w2 = wm * wm;
  Eigen::VectorXd g = quad_force(sys, model.phi);  // G(Phi, Phi)

  // Order-2 homological system for (a, b, c), obtained by matching the
  // R^2, S^2 and RS monomials of the invariance equations with the
  // kinematic relations alpha = -c w^2, beta_v = c - 2 b mu,
  // gamma = 2a - 2b w^2 - c mu already substituted. The O(mu) coupling
  // rows carry the damping correction that feeds the C coefficient.
  Eigen::MatrixXd sys3 = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  Eigen::VectorXd rhs3 = Eigen::VectorXd::Zero(3 * n);
  sys3.block(0, 0, n, n) = k - 2.0 * w2 * m;
  sys3.block(0, n, n, n) = 2.0 * w2 * w2 * m;
  rhs3.head(n) = -g;
  sys3.block(n, 0, n, n) = 2.0 * m;
  sys3.block(n, n, n, n) = k - 2.0 * w2 * m + 2.0 * mu * mu * m;
  sys3.block(n, 2 * n, n, n) = -2.0 * mu * m;
  sys3.block(2 * n, n, n, n) = 4.0 * mu * w2 * m;
  sys3.block(2 * n, 2 * n, n, n) = k - 4.0 * w2 * m;

  Eigen::VectorXd sol = sys3.partialPivLu().solve(rhs3);
  if (!sol.allFinite()) throw SolverError("build_dpim: singular homological operator");
  model.map_u_rr = sol.segment(0, n);      // a
  model.map_u_ss = sol.segment(n, n);      // b
  model.map_u_rs = sol.segment(2 * n, n);  // c

  model.map_v_rr = -w2 * model.map_u_rs;
  model.map_v_ss = model.map_u_rs - 2.0 * mu * model.map_u_ss;
  model.map_v_rs = 2.0 * model.map_u_rr - 2.0 * w2 * model.map_u_ss - mu * model.map_u_rs;

  // Cubic reduced-dynamics coefficients: resonant master projection of the
  // third-order terms. Non-resonant components are absorbed by the (not
  // computed) third-order mapping and drop out of the projection.
  model.coef_r3 = 2.0 * model.phi.dot(quad_bilinear(sys, model.phi, model.map_u_rr)) +
                  model.phi.dot(cubic_force(sys, model.phi));
  model.coef_rs2 = 2.0 * model.phi.dot(quad_bilinear(sys, model.phi, model.map_u_ss));
  model.coef_r2s = 2.0 * model.phi.dot(quad_bilinear(sys, model.phi, model.map_u_rs));
  return model;
}

void reduced_rhs(const DpimModel& model, double r, double s, double t,
                 const ForcingParams& f, double& dr, double& ds) {
  dr = s;
  ds = -model.damping * s - model.omega_m * model.omega_m * r - model.coef_r3 * r * r * r -
       model.coef_rs2 * r * s * s - model.coef_r2s * r * r * s +
       f.beta * model.forcing_scalar * std::cos(f.omega * t);
}

void dpim_decode(const DpimModel& model, double r, double s,
                 Eigen::VectorXd& u, Eigen::VectorXd& v) {
  u = model.phi * r + model.map_u_rr * (r * r) + model.map_u_ss * (s * s) +
      model.map_u_rs * (r * s);
  v = model.phi * s + model.map_v_rr * (r * r) + model.map_v_ss * (s * s) +
      model.map_v_rs * (r * s);
}

Eigen::VectorXd invariance_residual(const DpimModel& model, const FomSystem& sys,
                                    double r, double s) {
  double dr, ds;
  reduced_rhs(model, r, s, 0.0, ForcingParams{0.0, 1.0}, dr, ds);

  Eigen::VectorXd u, v;
  dpim_decode(model, r, s, u, v);
  Eigen::VectorXd du_dr = model.phi + 2.0 * r * model.map_u_rr + s * model.map_u_rs;
  Eigen::VectorXd du_ds = 2.0 * s * model.map_u_ss + r * model.map_u_rs;
  Eigen::VectorXd dv_dr = 2.0 * r * model.map_v_rr + s * model.map_v_rs;
  Eigen::VectorXd dv_ds = model.phi + 2.0 * s * model.map_v_ss + r * model.map_v_rs;

  Eigen::VectorXd res_force = sys.mass * (dv_dr * dr + dv_ds * ds) + sys.damping * v +
                              internal_force(sys, u);
  Eigen::VectorXd res_kin = sys.mass * (du_dr * dr + du_ds * ds) - sys.mass * v;

  Eigen::VectorXd out(2 * sys.n_dofs);
  out << res_force, res_kin;
  return out;
}

SecondOrderForm dpim_form(const DpimModel& model) {
  SecondOrderForm form;
  form.mass = Eigen::MatrixXd::Constant(1, 1, 1.0);
  form.damping = Eigen::MatrixXd::Constant(1, 1, model.damping);
  form.stiffness = Eigen::MatrixXd::Constant(1, 1, model.omega_m * model.omega_m);
  form.shape = Eigen::VectorXd::Constant(1, model.forcing_scalar);
  const double a3 = model.coef_r3, b3 = model.coef_rs2, c3 = model.coef_r2s;
  form.fnl = [a3, b3, c3](const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
    double r = q(0), s = v(0);
    return Eigen::VectorXd::Constant(1, a3 * r * r * r + b3 * r * s * s + c3 * r * r * s)
        .eval();
  };
  form.dfnl_dq = [a3, b3, c3](const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
    double r = q(0), s = v(0);
    return Eigen::MatrixXd::Constant(1, 1, 3.0 * a3 * r * r + b3 * s * s + 2.0 * c3 * r * s)
        .eval();
  };
  form.dfnl_dv = [b3, c3](const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
    double r = q(0), s = v(0);
    return Eigen::MatrixXd::Constant(1, 1, 2.0 * b3 * r * s + c3 * r * r).eval();
  };
  form.velocity_dependent = true;
  return form;
}

void dpim_decode_orbit(const DpimModel& model, const Eigen::VectorXd& reduced_coeffs,
                       double omega, int n_samples,
                       Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  Eigen::VectorXd rs = fourier_synthesize(reduced_coeffs, n_samples);
  Eigen::VectorXd ss =
      fourier_synthesize(fourier_differentiate(reduced_coeffs, omega), n_samples);
  const int n = static_cast<int>(model.phi.size());
  u.resize(n, n_samples);
  v.resize(n, n_samples);
  Eigen::VectorXd ut, vt;
  for (int t = 0; t < n_samples; ++t) {
    dpim_decode(model, rs(t), ss(t), ut, vt);
    u.col(t) = ut;
    v.col(t) = vt;
  }
}

FrfCurve dpim_frf(const DpimModel& model, double beta,
                  const Eigen::VectorXd& functional, const FrfSettings& settings) {
  SecondOrderForm form = dpim_form(model);
  DpimModel local = model;
  Eigen::VectorXd w = functional;
  ContinuationProblem p = make_hb_continuation(
      form, beta, settings, [local, w](const Eigen::VectorXd& x, double omega) {
        Eigen::MatrixXd u, v;
        dpim_decode_orbit(local, x, omega, 256, u, v);
        return (w.transpose() * u).cwiseAbs().maxCoeff();
      });
  Eigen::VectorXd guess =
      hb_linear_solution(form, settings.omega_min, beta, settings.hb.n_harmonics);
  Eigen::VectorXd x0 = hb_solve_coeffs(form, settings.omega_min, beta, guess, settings.hb);
  return trace_frf(p, beta, x0);
}

}  // namespace vibrom
