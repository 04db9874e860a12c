#pragma once
// Box- and simplex-constrained quadratic programs.
//
// Objective convention used throughout:  f(w) = w'Qw - 2 lin'w + const_term,
// with Q symmetric positive semidefinite. The solver is accelerated projected
// gradient descent with step 1/L, where L = 2*lambda_max(Q) is estimated by
// power iteration. Acceleration restarts whenever the objective would rise,
// so accepted iterates descend monotonically.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "smc/errors.hpp"

namespace smc {

struct QuadraticProgram {
  Eigen::MatrixXd q;
  Eigen::VectorXd lin;
  double const_term = 0.0;
};

enum class ConstraintSet { box01, simplex };

struct QpOptions {
  double tol = 1e-8;   // projected-gradient norm at which we stop
  int max_iter = 100000;
  std::optional<Eigen::VectorXd> w0;  // start point; projected onto the feasible set
  bool record_trace = false;          // keep per-iteration objectives in trace
};

struct QpSolution {
  Eigen::VectorXd w;
  double objective = 0.0;      // f evaluated directly at the returned point
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;   // final projected-gradient norm
  std::vector<double> trace;
};

// Euclidean projection onto {w >= 0, sum w = 1}, exact sort-based method.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

QpSolution solve_qp(const QuadraticProgram& qp, ConstraintSet constraint,
                    const QpOptions& opt = {});
QpSolution solve_box_qp(const QuadraticProgram& qp, const QpOptions& opt = {});
QpSolution solve_simplex_qp(const QuadraticProgram& qp, const QpOptions& opt = {});

}  // namespace smc
