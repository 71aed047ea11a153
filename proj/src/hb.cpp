#include "vibrom/hb.hpp"

#include <cmath>

#include "vibrom/fourier.hpp"

namespace vibrom {

SecondOrderForm fom_form(const FomSystem& sys) {
  SecondOrderForm form;
  form.mass = sys.mass;
  form.damping = sys.damping;
  form.stiffness = sys.stiffness;
  form.shape = sys.forcing_shape;
  FomSystem local = sys;  // owned copy, closures stay valid
  form.fnl = [local](const Eigen::VectorXd& q, const Eigen::VectorXd&) {
    return (internal_force(local, q) - local.stiffness * q).eval();
  };
  form.dfnl_dq = [local](const Eigen::VectorXd& q, const Eigen::VectorXd&) {
    return (tangent_stiffness(local, q) - local.stiffness).eval();
  };
  form.dfnl_dv = [n = sys.n_dofs](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(n, n).eval();
  };
  form.velocity_dependent = false;
  return form;
}

Eigen::MatrixXd unstack_coeffs(const Eigen::VectorXd& x, int n_dofs) {
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), n_dofs, x.size() / n_dofs);
}

Eigen::VectorXd stack_coeffs(const Eigen::MatrixXd& coeffs) {
  return Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
}

namespace {

// Linear frequency-domain operator applied to the coefficient matrix.
Eigen::MatrixXd linear_apply(const SecondOrderForm& form, const Eigen::MatrixXd& q,
                             double omega, int nh) {
  Eigen::MatrixXd r(q.rows(), q.cols());
  r.col(0) = form.stiffness * q.col(0);
  for (int k = 1; k <= nh; ++k) {
    double kw = k * omega;
    Eigen::MatrixXd a = form.stiffness - kw * kw * form.mass;
    r.col(k) = a * q.col(k) + kw * form.damping * q.col(nh + k);
    r.col(nh + k) = a * q.col(nh + k) - kw * form.damping * q.col(k);
  }
  return r;
}

}  // namespace

Eigen::VectorXd hb_residual(const SecondOrderForm& form, const Eigen::VectorXd& x,
                            double omega, double beta, int nh) {
  const int n = form.n();
  const int ns = aft_sample_count(nh);
  Eigen::MatrixXd q = unstack_coeffs(x, n);

  Eigen::MatrixXd res = linear_apply(form, q, omega, nh);
  res.col(1) -= beta * form.shape;

  Eigen::MatrixXd e = fourier_basis(nh, ns);
  Eigen::MatrixXd dd = fourier_basis_dtheta(nh, ns);
  Eigen::MatrixXd qs = q * e.transpose();
  Eigen::MatrixXd vs = omega * (q * dd.transpose());
  Eigen::MatrixXd fs(n, ns);
  for (int t = 0; t < ns; ++t) fs.col(t) = form.fnl(qs.col(t), vs.col(t));
  res += fs * fourier_projection(nh, ns).transpose();
  return stack_coeffs(res);
}

void hb_jacobian(const SecondOrderForm& form, const Eigen::VectorXd& x,
                 double omega, double beta, int nh,
                 Eigen::MatrixXd& d_dx, Eigen::VectorXd& d_domega) {
  (void)beta;
  const int n = form.n();
  const int nc = 2 * nh + 1;
  const int ns = aft_sample_count(nh);
  Eigen::MatrixXd q = unstack_coeffs(x, n);

  d_dx = Eigen::MatrixXd::Zero(n * nc, n * nc);
  Eigen::MatrixXd dw = Eigen::MatrixXd::Zero(n, nc);

  // linear blocks
  d_dx.block(0, 0, n, n) = form.stiffness;
  for (int k = 1; k <= nh; ++k) {
    double kw = k * omega;
    Eigen::MatrixXd a = form.stiffness - kw * kw * form.mass;
    d_dx.block(k * n, k * n, n, n) = a;
    d_dx.block((nh + k) * n, (nh + k) * n, n, n) = a;
    d_dx.block(k * n, (nh + k) * n, n, n) = kw * form.damping;
    d_dx.block((nh + k) * n, k * n, n, n) = -kw * form.damping;

    dw.col(k) = -2.0 * k * kw * (form.mass * q.col(k)) + k * (form.damping * q.col(nh + k));
    dw.col(nh + k) =
        -2.0 * k * kw * (form.mass * q.col(nh + k)) - k * (form.damping * q.col(k));
  }

  Eigen::MatrixXd e = fourier_basis(nh, ns);
  Eigen::MatrixXd dd = fourier_basis_dtheta(nh, ns);
  Eigen::MatrixXd p = fourier_projection(nh, ns);
  Eigen::MatrixXd qs = q * e.transpose();
  Eigen::MatrixXd vs = omega * (q * dd.transpose());

  for (int t = 0; t < ns; ++t) {
    Eigen::MatrixXd kt = form.dfnl_dq(qs.col(t), vs.col(t));
    Eigen::MatrixXd ct;
    if (form.velocity_dependent) ct = form.dfnl_dv(qs.col(t), vs.col(t));
    for (int pr = 0; pr < nc; ++pr) {
      double w = p(pr, t);
      if (w == 0.0) continue;
      for (int qc = 0; qc < nc; ++qc) {
        double we = w * e(t, qc);
        if (we != 0.0) d_dx.block(pr * n, qc * n, n, n) += we * kt;
        if (form.velocity_dependent) {
          double wd = w * omega * dd(t, qc);
          if (wd != 0.0) d_dx.block(pr * n, qc * n, n, n) += wd * ct;
        }
      }
      if (form.velocity_dependent) {
        // dv/domega = v/omega at fixed coefficients
        dw.col(pr) += w * (ct * (vs.col(t) / omega));
      }
    }
  }
  d_domega = stack_coeffs(dw);
}

Eigen::VectorXd hb_linear_solution(const SecondOrderForm& form, double omega,
                                   double beta, int nh) {
  const int n = form.n();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, 2 * nh + 1);
  double w = omega;
  Eigen::MatrixXd a = form.stiffness - w * w * form.mass;
  Eigen::MatrixXd b = w * form.damping;
  Eigen::MatrixXd sys(2 * n, 2 * n);
  sys << a, b, -b, a;
  Eigen::VectorXd rhs(2 * n);
  rhs << beta * form.shape, Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sol = sys.partialPivLu().solve(rhs);
  q.col(1) = sol.head(n);
  q.col(nh + 1) = sol.tail(n);
  return stack_coeffs(q);
}

Eigen::VectorXd hb_solve_coeffs(const SecondOrderForm& form, double omega, double beta,
                                const Eigen::VectorXd& guess, const HbSettings& settings) {
  Eigen::VectorXd x = guess;
  Eigen::MatrixXd jx;
  Eigen::VectorXd jw;
  for (int it = 0; it < settings.max_iters; ++it) {
    Eigen::VectorXd r = hb_residual(form, x, omega, beta, settings.n_harmonics);
    if (r.norm() <= settings.tol) return x;
    hb_jacobian(form, x, omega, beta, settings.n_harmonics, jx, jw);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jx);
    Eigen::VectorXd dx = lu.solve(r);
    if (!dx.allFinite()) throw SolverError("hb_solve: singular Jacobian (near fold?)");
    x -= dx;
  }
  Eigen::VectorXd r = hb_residual(form, x, omega, beta, settings.n_harmonics);
  if (r.norm() <= settings.tol) return x;
  throw SolverError("hb_solve: Newton did not converge, residual " + std::to_string(r.norm()));
}

Eigen::VectorXd hb_residual(const FomSystem& sys, const PeriodicOrbit& orbit,
                            const ForcingParams& f) {
  return hb_residual(fom_form(sys), stack_coeffs(orbit.fourier_coeffs), f.omega, f.beta,
                     orbit.n_harmonics);
}

PeriodicOrbit hb_solve(const FomSystem& sys, const ForcingParams& f,
                       const PeriodicOrbit& guess, double tol) {
  HbSettings settings;
  settings.n_harmonics = guess.n_harmonics;
  settings.tol = tol;
  SecondOrderForm form = fom_form(sys);
  Eigen::VectorXd x =
      hb_solve_coeffs(form, f.omega, f.beta, stack_coeffs(guess.fourier_coeffs), settings);
  PeriodicOrbit orbit;
  orbit.omega = f.omega;
  orbit.n_harmonics = guess.n_harmonics;
  orbit.fourier_coeffs = unstack_coeffs(x, sys.n_dofs);
  orbit.samples_per_period = aft_sample_count(guess.n_harmonics);
  return orbit;
}

PeriodicOrbit hb_solve(const FomSystem& sys, const ForcingParams& f,
                       const HbSettings& settings) {
  SecondOrderForm form = fom_form(sys);
  Eigen::VectorXd guess = hb_linear_solution(form, f.omega, f.beta, settings.n_harmonics);
  Eigen::VectorXd x = hb_solve_coeffs(form, f.omega, f.beta, guess, settings);
  PeriodicOrbit orbit;
  orbit.omega = f.omega;
  orbit.n_harmonics = settings.n_harmonics;
  orbit.fourier_coeffs = unstack_coeffs(x, sys.n_dofs);
  orbit.samples_per_period = aft_sample_count(settings.n_harmonics);
  return orbit;
}

double orbit_amplitude(const Eigen::VectorXd& x, int n_dofs,
                       const Eigen::VectorXd& functional, int n_samples) {
  Eigen::MatrixXd q = unstack_coeffs(x, n_dofs);
  int nh = (static_cast<int>(q.cols()) - 1) / 2;
  Eigen::MatrixXd qs = q * fourier_basis(nh, n_samples).transpose();
  return (functional.transpose() * qs).cwiseAbs().maxCoeff();
}

}  // namespace vibrom

namespace vibrom {

namespace {

double estimate_unknown_scale(const SecondOrderForm& form, double beta,
                              const FrfSettings& s) {
  double best = 0.0;
  for (int i = 0; i <= 50; ++i) {
    double w = s.omega_min + (s.omega_max - s.omega_min) * i / 50.0;
    Eigen::VectorXd x = hb_linear_solution(form, w, beta, s.hb.n_harmonics);
    best = std::max(best, x.lpNorm<Eigen::Infinity>());
  }
  return std::max(best, 1e-30);
}

}  // namespace

ContinuationProblem make_hb_continuation(
    const SecondOrderForm& form, double beta, const FrfSettings& settings,
    std::function<double(const Eigen::VectorXd&, double)> amplitude) {
  ContinuationProblem p;
  const int nh = settings.hb.n_harmonics;
  p.unknown_dim = form.n() * (2 * nh + 1);
  p.omega_min = settings.omega_min;
  p.omega_max = settings.omega_max;
  p.step_init = settings.step_init;
  p.step_min = settings.step_min;
  p.step_max = settings.step_max;
  p.corrector_tol = settings.corrector_tol;
  p.max_points = settings.max_points;
  p.omega_scale = settings.omega_max - settings.omega_min;
  p.unknown_scale = settings.unknown_scale > 0.0
                        ? settings.unknown_scale
                        : estimate_unknown_scale(form, beta, settings);
  p.residual = [form, beta, nh](const Eigen::VectorXd& x, double omega) {
    return hb_residual(form, x, omega, beta, nh);
  };
  p.jacobian = [form, beta, nh](const Eigen::VectorXd& x, double omega,
                                Eigen::MatrixXd& jx, Eigen::VectorXd& jw) {
    hb_jacobian(form, x, omega, beta, nh, jx, jw);
  };
  p.amplitude = std::move(amplitude);
  return p;
}

FrfCurve trace_hb_frf(const SecondOrderForm& form, double beta,
                      const Eigen::VectorXd& functional, const FrfSettings& settings) {
  int n = form.n();
  ContinuationProblem p = make_hb_continuation(
      form, beta, settings, [n, functional](const Eigen::VectorXd& x, double) {
        return orbit_amplitude(x, n, functional);
      });
  Eigen::VectorXd guess =
      hb_linear_solution(form, settings.omega_min, beta, settings.hb.n_harmonics);
  Eigen::VectorXd x0 =
      hb_solve_coeffs(form, settings.omega_min, beta, guess, settings.hb);
  return trace_frf(p, beta, x0);
}

}  // namespace vibrom
