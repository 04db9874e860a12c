#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "smc/errors.hpp"
#include "smc/optim.hpp"
#include "smc/rng.hpp"

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using smc::QpOptions;
using smc::QpSolution;
using smc::QuadraticProgram;

double eval(const QuadraticProgram& qp, const VectorXd& w) {
  return w.dot(qp.q * w) - 2.0 * qp.lin.dot(w) + qp.const_term;
}

// Exact simplex-projection oracle: enumerate candidate active sets. For each
// support S the KKT multiplier is lam = (sum_S v - 1)/|S|; the unique
// feasible candidate is the answer.
VectorXd simplex_oracle(const VectorXd& v) {
  const int n = static_cast<int>(v.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < n; ++j)
      if (mask & (1 << j)) {
        sum += v[j];
        ++count;
      }
    const double lam = (sum - 1.0) / count;
    VectorXd w = VectorXd::Zero(n);
    bool ok = true;
    for (int j = 0; j < n; ++j) {
      if (mask & (1 << j)) {
        w[j] = v[j] - lam;
        if (w[j] < -1e-12) ok = false;
      } else if (v[j] - lam > 1e-12) {
        ok = false;  // excluded coordinate would want positive mass
      }
    }
    if (ok) return w;
  }
  FAIL("no KKT-consistent support found");
  return VectorXd::Zero(n);
}

// Random PSD instance q = A'A with modest conditioning plus a random target.
QuadraticProgram random_qp(smc::Rng& rng, int n, int rows) {
  MatrixXd a(rows, n);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  VectorXd y(rows);
  for (int i = 0; i < rows; ++i) y[i] = rng.normal();
  QuadraticProgram qp;
  qp.q = a.transpose() * a;
  qp.lin = a.transpose() * y;
  qp.const_term = y.squaredNorm();
  return qp;
}

double grid_min_box(const QuadraticProgram& qp, double step) {
  const int n = static_cast<int>(qp.lin.size());
  const int k = static_cast<int>(std::lround(1.0 / step));
  VectorXd w(n);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  for (;;) {
    for (int j = 0; j < n; ++j) w[j] = idx[j] * step;
    best = std::min(best, eval(qp, w));
    int j = 0;
    while (j < n && ++idx[j] > k) idx[j++] = 0;
    if (j == n) break;
  }
  return best;
}

void check_box_kkt(const QuadraticProgram& qp, const VectorXd& w, double tol) {
  const VectorXd g = 2.0 * (qp.q * w - qp.lin);
  for (int j = 0; j < w.size(); ++j) {
    CHECK(w[j] >= -1e-12);
    CHECK(w[j] <= 1.0 + 1e-12);
    if (w[j] <= 1e-9) {
      CHECK(g[j] >= -tol);  // at the lower bound the gradient must push up
    } else if (w[j] >= 1.0 - 1e-9) {
      CHECK(g[j] <= tol);
    } else {
      CHECK(std::abs(g[j]) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("simplex projection matches the active-set oracle") {
  smc::Rng rng(4711);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    VectorXd v(n);
    for (int j = 0; j < n; ++j) v[j] = 4.0 * rng.normal();
    const VectorXd got = smc::project_to_simplex(v);
    const VectorXd want = simplex_oracle(v);
    CHECK((got - want).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK(got.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(got.minCoeff() >= 0.0);
  }
}

TEST_CASE("simplex projection handles edge cases") {
  VectorXd v(1);
  v << -17.0;
  CHECK(smc::project_to_simplex(v)[0] == doctest::Approx(1.0));
  VectorXd u(3);
  u << 0.2, 0.3, 0.5;  // already on the simplex
  CHECK((smc::project_to_simplex(u) - u).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("box solver beats a fine grid on random instances") {
  smc::Rng rng(2025);
  for (int n : {1, 2, 3}) {
    for (int trial = 0; trial < 25; ++trial) {
      const QuadraticProgram qp = random_qp(rng, n, 12);
      const QpSolution sol = smc::solve_box_qp(qp, {});
      CHECK(sol.converged);
      CHECK(sol.objective <= grid_min_box(qp, 0.02) + 1e-9);
      check_box_kkt(qp, sol.w, 1e-5);
    }
  }
}

TEST_CASE("simplex solver satisfies stationarity on random instances") {
  smc::Rng rng(5150);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 6);
    const QuadraticProgram qp = random_qp(rng, n, n + 6);
    const QpSolution sol = smc::solve_simplex_qp(qp, {});
    CHECK(sol.converged);
    CHECK(sol.w.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sol.w.minCoeff() >= -1e-12);
    // On the support the gradient must be (approximately) constant and no
    // off-support coordinate may offer a lower directional derivative.
    const VectorXd g = 2.0 * (qp.q * sol.w - qp.lin);
    double mu = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (sol.w[j] > 1e-7) mu = std::min(mu, g[j]);
    for (int j = 0; j < n; ++j) {
      if (sol.w[j] > 1e-7) CHECK(g[j] <= mu + 1e-4);
      CHECK(g[j] >= mu - 1e-4);
    }
  }
}

TEST_CASE("larger box instances converge to the requested tolerance") {
  smc::Rng rng(909);
  const QuadraticProgram qp = random_qp(rng, 30, 45);
  QpOptions opt;
  opt.tol = 1e-9;
  const QpSolution sol = smc::solve_box_qp(qp, opt);
  CHECK(sol.converged);
  CHECK(sol.kkt_residual <= 1e-9);
  check_box_kkt(qp, sol.w, 1e-6);
}

TEST_CASE("indefinite objectives are rejected") {
  QuadraticProgram qp;
  qp.q = -MatrixXd::Identity(2, 2);
  qp.lin = VectorXd::Zero(2);
  CHECK_THROWS_AS(smc::solve_box_qp(qp, {}), smc::SmcError);
  try {
    smc::solve_box_qp(qp, {});
  } catch (const smc::SmcError& e) {
    CHECK(e.code() == smc::ErrorCode::NotPsd);
  }
}

TEST_CASE("zero quadratic part degenerates to a vertex rule") {
  QuadraticProgram qp;
  qp.q = MatrixXd::Zero(3, 3);
  qp.lin.resize(3);
  qp.lin << 1.0, -2.0, 0.5;  // objective is -2 lin'w
  const QpSolution box = smc::solve_box_qp(qp, {});
  CHECK(box.w[0] == doctest::Approx(1.0));
  CHECK(box.w[1] == doctest::Approx(0.0));
  CHECK(box.w[2] == doctest::Approx(1.0));
  const QpSolution sx = smc::solve_simplex_qp(qp, {});
  CHECK(sx.w[0] == doctest::Approx(1.0));  // argmax of lin
  CHECK(sx.w.sum() == doctest::Approx(1.0));
}

TEST_CASE("recorded trace of accepted iterates is monotone") {
  smc::Rng rng(31);
  const QuadraticProgram qp = random_qp(rng, 8, 14);
  QpOptions opt;
  opt.record_trace = true;
  const QpSolution sol = smc::solve_box_qp(qp, opt);
  REQUIRE(sol.trace.size() >= 1);
  for (std::size_t k = 1; k < sol.trace.size(); ++k)
    CHECK(sol.trace[k] <= sol.trace[k - 1] + 1e-9 * (1.0 + std::abs(sol.trace[k - 1])));
  CHECK(sol.trace.back() == doctest::Approx(sol.objective).epsilon(1e-9));
}

TEST_CASE("custom start point is honored and still converges") {
  smc::Rng rng(77);
  const QuadraticProgram qp = random_qp(rng, 5, 9);
  QpOptions opt;
  opt.w0 = VectorXd::Constant(5, 0.5);
  const QpSolution a = smc::solve_box_qp(qp, opt);
  const QpSolution b = smc::solve_box_qp(qp, {});
  CHECK(a.converged);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-7));
}

TEST_CASE("malformed programs are rejected") {
  QuadraticProgram qp;
  qp.q = MatrixXd::Identity(3, 2);
  qp.lin = VectorXd::Zero(3);
  CHECK_THROWS_AS(smc::solve_box_qp(qp, {}), smc::SmcError);

  QuadraticProgram nan_qp;
  nan_qp.q = MatrixXd::Identity(2, 2);
  nan_qp.lin = VectorXd::Zero(2);
  nan_qp.lin[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(smc::solve_box_qp(nan_qp, {}), smc::SmcError);
}
