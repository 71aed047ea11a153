#include "vibrom/continuation.hpp"

#include <cmath>

namespace vibrom {

namespace {

// Scaled tangent of the solution curve: null direction of [dR/dy | dR/dw],
// oriented by the previous tangent (bordered solve).
void solution_tangent(const ContinuationProblem& p, const Eigen::VectorXd& x, double omega,
                      const Eigen::VectorXd& orient_x, double orient_w,
                      Eigen::VectorXd& tx, double& tw) {
  const int n = p.unknown_dim;
  Eigen::MatrixXd jx;
  Eigen::VectorXd jw;
  p.jacobian(x, omega, jx, jw);
  Eigen::MatrixXd aug(n + 1, n + 1);
  aug.topLeftCorner(n, n) = jx * p.unknown_scale;
  aug.topRightCorner(n, 1) = jw * p.omega_scale;
  aug.bottomLeftCorner(1, n) = orient_x.transpose();
  aug(n, n) = orient_w;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  Eigen::VectorXd t = aug.partialPivLu().solve(rhs);
  if (!t.allFinite()) throw SolverError("continuation: singular tangent system");
  t.normalize();
  tx = t.head(n);
  tw = t(n);
  if (tx.dot(orient_x) + tw * orient_w < 0.0) {
    tx = -tx;
    tw = -tw;
  }
}

}  // namespace

void corrector(const ContinuationProblem& p, Eigen::VectorXd& x, double& omega,
               const Eigen::VectorXd& tangent_x, double tangent_omega,
               const Eigen::VectorXd& pred_x, double pred_omega, double tol) {
  if (tangent_x.norm() + std::abs(tangent_omega) == 0.0)
    throw std::invalid_argument("corrector: zero tangent");
  const int n = p.unknown_dim;
  // callers may pass the iterate itself as the predictor; pin a copy so the
  // arc-length anchor does not drift with the Newton updates
  const Eigen::VectorXd pred = pred_x;
  for (int it = 0; it < p.max_corrector_iters; ++it) {
    Eigen::VectorXd r = p.residual(x, omega);
    double arc = tangent_x.dot((x - pred) / p.unknown_scale) +
                 tangent_omega * (omega - pred_omega) / p.omega_scale;
    if (r.norm() <= tol && std::abs(arc) <= tol) return;
    Eigen::MatrixXd jx;
    Eigen::VectorXd jw;
    p.jacobian(x, omega, jx, jw);
    Eigen::MatrixXd aug(n + 1, n + 1);
    aug.topLeftCorner(n, n) = jx;
    aug.topRightCorner(n, 1) = jw;
    aug.bottomLeftCorner(1, n) = tangent_x.transpose() / p.unknown_scale;
    aug(n, n) = tangent_omega / p.omega_scale;
    Eigen::VectorXd rhs(n + 1);
    rhs << r, arc;
    Eigen::VectorXd d = aug.partialPivLu().solve(rhs);
    if (!d.allFinite()) throw SolverError("corrector: singular augmented system");
    x -= d.head(n);
    omega -= d(n);
  }
  Eigen::VectorXd r = p.residual(x, omega);
  if (r.norm() <= tol) return;
  throw SolverError("corrector: no convergence, residual " + std::to_string(r.norm()));
}

FrfCurve trace_frf(const ContinuationProblem& p, double beta,
                   const Eigen::VectorXd& x_start) {
  FrfCurve curve;
  curve.beta = beta;

  Eigen::VectorXd x = x_start;
  double omega = p.omega_min;
  {
    // polish the start point at fixed omega (tangent = pure omega direction
    // pins the frequency)
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p.unknown_dim);
    corrector(p, x, omega, e, 1.0, x, omega, p.corrector_tol);
  }
  curve.points.push_back({omega, p.amplitude(x, omega), x});

  Eigen::VectorXd tx(p.unknown_dim);
  double tw = 0.0;
  solution_tangent(p, x, omega, Eigen::VectorXd::Zero(p.unknown_dim), 1.0, tx, tw);
  if (tw < 0.0) {
    tx = -tx;
    tw = -tw;
  }

  double step = p.step_init;
  int easy_streak = 0;
  double prev_tw = tw;

  while (static_cast<int>(curve.points.size()) < p.max_points) {
    Eigen::VectorXd px = x + step * p.unknown_scale * tx;
    double pw = omega + step * p.omega_scale * tw;
    Eigen::VectorXd cx = px;
    double cw = pw;
    bool ok = true;
    try {
      corrector(p, cx, cw, tx, tw, px, pw, p.corrector_tol);
    } catch (const SolverError&) {
      ok = false;
    }
    if (!ok) {
      step *= 0.5;
      easy_streak = 0;
      if (step < p.step_min)
        throw SolverError("trace_frf: step underflow at omega " + std::to_string(omega) +
                          " after " + std::to_string(curve.points.size()) + " points");
      continue;
    }

    x = cx;
    omega = cw;
    curve.points.push_back({omega, p.amplitude(x, omega), x});
    {
      Eigen::VectorXd ntx(p.unknown_dim);
      double ntw = 0.0;
      solution_tangent(p, x, omega, tx, tw, ntx, ntw);
      tx = ntx;
      tw = ntw;
    }
    if (prev_tw * tw < 0.0)
      curve.fold_indices.push_back(static_cast<int>(curve.points.size()) - 1);
    prev_tw = tw;

    if (omega > p.omega_max || omega < p.omega_min) break;

    if (++easy_streak >= 3) {
      step = std::min(2.0 * step, p.step_max);
      easy_streak = 0;
    }
  }
  return curve;
}

}  // namespace vibrom
