#include "smc/optim.hpp"

#include <algorithm>
#include <cmath>

#include "smc/rng.hpp"

namespace smc {

namespace {

// Deterministic dense start vector for the power iterations. A patterned
// vector can sit in the null space of structured matrices (all-ones does for
// centering-type matrices), so fill it from a fixed pseudo-random stream.
Eigen::VectorXd power_start(Eigen::Index n) {
  Rng rng(0x9067a5u);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform01() + 0.5;
  v.normalize();
  return v;
}

// Dominant eigenvalue of symmetric m by Rayleigh quotient, 50 iterations or
// successive estimates within 1e-6 relative.
double dominant_eig(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v = power_start(m.rows());
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Eigen::VectorXd u = m * v;
    const double norm = u.norm();
    if (norm <= 1e-300) return 0.0;
    v = u / norm;
    const double next = v.dot(m * v);
    if (it > 0 && std::abs(next - lambda) <= 1e-6 * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

struct Objective {
  const Eigen::MatrixXd& q;
  const Eigen::VectorXd& lin;

  // Returns f(x) without the constant shift and leaves q*x in qx.
  double eval(const Eigen::VectorXd& x, Eigen::VectorXd& qx) const {
    qx.noalias() = q * x;
    return x.dot(qx) - 2.0 * lin.dot(x);
  }
};

Eigen::VectorXd project(const Eigen::VectorXd& v, ConstraintSet constraint) {
  if (constraint == ConstraintSet::box01)
    return v.cwiseMax(0.0).cwiseMin(1.0);
  return project_to_simplex(v);
}

Eigen::VectorXd default_start(Eigen::Index n, ConstraintSet constraint) {
  if (constraint == ConstraintSet::box01) return Eigen::VectorXd::Zero(n);
  return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

// With no usable curvature the problem is linear over a compact set; solve it
// at a vertex. Ties resolve to the lowest index.
QpSolution solve_linear(const Eigen::VectorXd& lin, double const_term,
                        ConstraintSet constraint) {
  const Eigen::Index n = lin.size();
  QpSolution sol;
  sol.w = Eigen::VectorXd::Zero(n);
  if (constraint == ConstraintSet::box01) {
    for (Eigen::Index j = 0; j < n; ++j)
      if (lin[j] > 0.0) sol.w[j] = 1.0;
  } else {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < n; ++j)
      if (lin[j] > lin[best]) best = j;
    sol.w[best] = 1.0;
  }
  sol.objective = -2.0 * lin.dot(sol.w) + const_term;
  sol.converged = true;
  return sol;
}

}  // namespace

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n == 0) fail(ErrorCode::LengthMismatch, "cannot project an empty vector");
  if (!v.allFinite()) fail(ErrorCode::MissingValue, "non-finite input to simplex projection");

  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumsum += u[i];
    const double candidate = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - candidate > 0.0) tau = candidate;
  }
  Eigen::VectorXd w = (v.array() - tau).cwiseMax(0.0);
  w /= w.sum();  // absorb the last few ulps so the weights sum to one
  return w;
}

QpSolution solve_qp(const QuadraticProgram& qp, ConstraintSet constraint,
                    const QpOptions& opt) {
  const Eigen::Index n = qp.q.rows();
  if (qp.q.cols() != n)
    fail(ErrorCode::LengthMismatch, "q must be square");
  if (qp.lin.size() != n)
    fail(ErrorCode::LengthMismatch, "lin length does not match q");
  if (n == 0) fail(ErrorCode::LengthMismatch, "empty quadratic program");
  if (!qp.q.allFinite() || !qp.lin.allFinite())
    fail(ErrorCode::MissingValue, "non-finite solver input");

  // Only the symmetric part matters for w'Qw.
  const Eigen::MatrixXd q = 0.5 * (qp.q + qp.q.transpose());
  const double q_scale = q.norm();  // Frobenius, reference scale for curvature checks

  const double lambda_max = dominant_eig(q);
  {
    // Most negative eigenvalue via the shifted matrix s*I - q.
    const double shift = std::max(lambda_max, 0.0);
    const Eigen::MatrixXd shifted =
        shift * Eigen::MatrixXd::Identity(n, n) - q;
    const double lambda_min = shift - dominant_eig(shifted);
    if (lambda_min < -1e-8 * q_scale)
      fail(ErrorCode::NotPsd, "negative curvature " + std::to_string(lambda_min) +
                                  " detected in q");
  }

  if (lambda_max <= 1e-300)
    return solve_linear(qp.lin, qp.const_term, constraint);

  const Objective f{q, qp.lin};
  double alpha = 1.0 / (2.0 * lambda_max);  // 1/L for the gradient 2(Qx - lin)

  QpSolution sol;
  Eigen::VectorXd x = opt.w0 ? project(*opt.w0, constraint)
                             : default_start(n, constraint);
  Eigen::VectorXd qx(n);
  double fx = f.eval(x, qx);
  Eigen::VectorXd y = x, qy = qx, x_prev = x, qx_prev = qx;
  double t_acc = 1.0;

  if (opt.record_trace) sol.trace.push_back(fx + qp.const_term);

  const double rise_slack = 1e-12;
  bool converged = false;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    Eigen::VectorXd grad = 2.0 * (qy - qp.lin);
    Eigen::VectorXd xn = project(y - alpha * grad, constraint);
    Eigen::VectorXd qxn(n);
    double fn = f.eval(xn, qxn);

    if (fn > fx + rise_slack * (1.0 + std::abs(fx))) {
      // Momentum overshot; restart from the last accepted point.
      t_acc = 1.0;
      double step = alpha;
      for (int back = 0; back < 60; ++back) {
        xn = project(x - step * 2.0 * (qx - qp.lin), constraint);
        fn = f.eval(xn, qxn);
        if (fn <= fx + rise_slack * (1.0 + std::abs(fx))) break;
        step *= 0.5;  // curvature estimate was low; shrink until descent
      }
      if (fn > fx + rise_slack * (1.0 + std::abs(fx))) {
        xn = x;
        qxn = qx;
        fn = fx;
      } else if (step < alpha) {
        alpha = step;  // keep the shrunken step, the original rose again
      }
    }

    if (!xn.allFinite())
      fail(ErrorCode::Diverged, "iterates became non-finite");

    x_prev = x;
    qx_prev = qx;
    x = xn;
    qx = qxn;
    fx = fn;
    if (opt.record_trace) sol.trace.push_back(fx + qp.const_term);

    // Stop when the projected-gradient step from x barely moves.
    const Eigen::VectorXd gx = 2.0 * (qx - qp.lin);
    const Eigen::VectorXd pg = (x - project(x - alpha * gx, constraint)) / alpha;
    sol.kkt_residual = pg.norm();
    if (sol.kkt_residual <= opt.tol) {
      converged = true;
      ++iter;
      break;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    const double beta = (t_acc - 1.0) / t_next;
    y = x + beta * (x - x_prev);
    qy = qx + beta * (qx - qx_prev);
    t_acc = t_next;
  }

  sol.w = x;
  sol.objective = fx + qp.const_term;
  sol.iterations = iter;
  sol.converged = converged;
  return sol;
}

QpSolution solve_box_qp(const QuadraticProgram& qp, const QpOptions& opt) {
  return solve_qp(qp, ConstraintSet::box01, opt);
}

QpSolution solve_simplex_qp(const QuadraticProgram& qp, const QpOptions& opt) {
  return solve_qp(qp, ConstraintSet::simplex, opt);
}

}  // namespace smc
