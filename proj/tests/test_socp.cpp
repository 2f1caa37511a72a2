#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <limits>

#include "wfmpc/rng.hpp"
#include "wfmpc/socp.hpp"

using namespace wfmpc;
using socp::BarrierSolver;
using socp::Problem;
using socp::SocConstraint;
using socp::Solution;
using socp::Status;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Problem blank(int n) {
  Problem p;
  p.n = n;
  p.P = Eigen::MatrixXd::Zero(n, n);
  p.q = Eigen::VectorXd::Zero(n);
  return p;
}

Eigen::VectorXd rand_vec(int n, std::uint64_t stream) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng_normal(17, stream, i);
  return v;
}

}  // namespace

TEST_CASE("projection onto the simplex: uniform point") {
  // min ||x||^2 over the probability simplex has the uniform solution 1/n.
  for (int n : {2, 3, 7}) {
    Problem p = blank(n);
    p.P = 2.0 * Eigen::MatrixXd::Identity(n, n);
    p.A = Eigen::MatrixXd::Ones(1, n);
    p.b = Eigen::VectorXd::Ones(1);
    p.lb = Eigen::VectorXd::Zero(n);
    p.ub = Eigen::VectorXd::Constant(n, kInf);
    Solution s = BarrierSolver().solve(p);
    REQUIRE(s.status == Status::optimal);
    CHECK((s.x - Eigen::VectorXd::Constant(n, 1.0 / n)).lpNorm<Eigen::Infinity>() < 1e-7);
    CHECK(s.objective == doctest::Approx(1.0 / n).epsilon(1e-6));
    CHECK(s.kkt_residual <= 1e-8);
  }
}

TEST_CASE("second-order cone projection: analytic optimum on the cone boundary") {
  // min (x0 - 2)^2 + (x1 - 1)^2 s.t. |x0| <= x1. The unconstrained optimum
  // (2, 1) is outside; the projection onto the 45-degree cone boundary is
  // (1.5, 1.5).
  Problem p = blank(2);
  p.P = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.q = Eigen::Vector2d(-4.0, -2.0);
  p.c0 = 5.0;
  SocConstraint cone;
  cone.G = Eigen::MatrixXd::Zero(1, 2);
  cone.G(0, 0) = 1.0;
  cone.h = Eigen::VectorXd::Zero(1);
  cone.c = Eigen::Vector2d(0.0, 1.0);
  cone.d = 0.0;
  p.cones.push_back(cone);
  Solution s = BarrierSolver().solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x(0) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(s.x(1) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(s.objective == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(s.kkt_residual <= 1e-8);
}

TEST_CASE("equality-constrained least squares matches the closed form") {
  // min ||x - g||^2 s.t. A x = b  ==>  x* = g + A^T (A A^T)^{-1} (b - A g).
  const int n = 6, m = 2;
  Eigen::MatrixXd A(m, n);
  for (int i = 0; i < m; ++i) A.row(i) = rand_vec(n, 100 + i).transpose();
  const Eigen::VectorXd g = rand_vec(n, 200);
  const Eigen::VectorXd b = rand_vec(m, 201);

  Problem p = blank(n);
  p.P = 2.0 * Eigen::MatrixXd::Identity(n, n);
  p.q = -2.0 * g;
  p.A = A;
  p.b = b;
  Solution s = BarrierSolver().solve(p);
  REQUIRE(s.status == Status::optimal);

  const Eigen::VectorXd xstar =
      g + A.transpose() * (A * A.transpose()).ldlt().solve(b - A * g);
  CHECK((s.x - xstar).lpNorm<Eigen::Infinity>() < 1e-7);
  CHECK((A * s.x - b).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("infeasible equalities against bounds are reported, not mangled") {
  // sum x = 5 is impossible under 0 <= x <= 1 with n = 3.
  Problem p = blank(3);
  p.P = Eigen::MatrixXd::Identity(3, 3);
  p.A = Eigen::MatrixXd::Ones(1, 3);
  p.b = Eigen::VectorXd::Constant(1, 5.0);
  p.lb = Eigen::VectorXd::Zero(3);
  p.ub = Eigen::VectorXd::Ones(3);
  Solution s = BarrierSolver().solve(p);
  CHECK(s.status == Status::infeasible);
}

TEST_CASE("pinned variable through lb == ub") {
  Problem p = blank(3);
  p.P = 2.0 * Eigen::MatrixXd::Identity(3, 3);
  p.q = Eigen::Vector3d(-2.0, -4.0, -6.0);
  p.lb = Eigen::Vector3d(-kInf, 0.7, -kInf);
  p.ub = Eigen::Vector3d(kInf, 0.7, kInf);
  Solution s = BarrierSolver().solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x(1) == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.x(2) == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("mixed problem: KKT residual certifies every solved instance") {
  // Random PSD quadratics with equalities, boxes and one cone; every returned
  // optimum must carry a small self-reported residual and satisfy all
  // constraints to tolerance.
  for (int inst = 0; inst < 12; ++inst) {
    const int n = 5;
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i) R.row(i) = rand_vec(n, 300 + 10 * inst + i).transpose();
    Problem p = blank(n);
    p.P = R.transpose() * R + 0.1 * Eigen::MatrixXd::Identity(n, n);
    p.q = rand_vec(n, 400 + inst);
    p.A = Eigen::MatrixXd::Ones(1, n);
    p.b = Eigen::VectorXd::Zero(1);
    p.lb = Eigen::VectorXd::Constant(n, -2.0);
    p.ub = Eigen::VectorXd::Constant(n, 2.0);
    SocConstraint cone;  // ||x_{0:2}|| <= x_3 + 1.5
    cone.G = Eigen::MatrixXd::Zero(3, n);
    cone.G.leftCols(3).setIdentity();
    cone.h = Eigen::VectorXd::Zero(3);
    cone.c = Eigen::VectorXd::Zero(n);
    cone.c(3) = 1.0;
    cone.d = 1.5;
    p.cones.push_back(cone);

    Solution s = BarrierSolver().solve(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.kkt_residual <= 1e-8);
    CHECK(std::abs(p.A.row(0).dot(s.x)) < 1e-9);
    CHECK((s.x.array() >= -2.0 - 1e-9).all());
    CHECK((s.x.array() <= 2.0 + 1e-9).all());
    CHECK((cone.G * s.x + cone.h).norm() <= cone.c.dot(s.x) + cone.d + 1e-9);
    const double obj = 0.5 * s.x.dot(p.P * s.x) + p.q.dot(s.x) + p.c0;
    CHECK(s.objective == doctest::Approx(obj).epsilon(1e-10));
  }
}

TEST_CASE("determinism: identical problems solve to bitwise-identical iterates") {
  Problem p = blank(4);
  Eigen::MatrixXd R(4, 4);
  for (int i = 0; i < 4; ++i) R.row(i) = rand_vec(4, 500 + i).transpose();
  p.P = R.transpose() * R + Eigen::MatrixXd::Identity(4, 4);
  p.q = rand_vec(4, 510);
  p.A = Eigen::MatrixXd::Ones(1, 4);
  p.b = Eigen::VectorXd::Zero(1);
  p.lb = Eigen::VectorXd::Constant(4, -1.0);
  p.ub = Eigen::VectorXd::Constant(4, 1.0);

  Solution s1 = BarrierSolver().solve(p);
  Solution s2 = BarrierSolver().solve(p);
  REQUIRE(s1.status == Status::optimal);
  REQUIRE(s2.status == Status::optimal);
  CHECK(s1.newton_iters == s2.newton_iters);
  for (int i = 0; i < 4; ++i) CHECK(s1.x(i) == s2.x(i));  // bitwise
  CHECK(s1.objective == s2.objective);
}

TEST_CASE("warm start: same optimum from a feasible hint") {
  Problem p = blank(4);
  p.P = 2.0 * Eigen::MatrixXd::Identity(4, 4);
  p.q = rand_vec(4, 600);
  p.A = Eigen::MatrixXd::Ones(1, 4);
  p.b = Eigen::VectorXd::Zero(1);
  p.lb = Eigen::VectorXd::Constant(4, -3.0);
  p.ub = Eigen::VectorXd::Constant(4, 3.0);

  Solution cold = BarrierSolver().solve(p);
  REQUIRE(cold.status == Status::optimal);

  Eigen::VectorXd hint(4);
  hint << 0.5, -0.5, 0.25, -0.25;  // feasible, sums to zero
  Solution warm = BarrierSolver().solve(p, &hint);
  REQUIRE(warm.status == Status::optimal);
  CHECK((warm.x - cold.x).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-9));
}

TEST_CASE("phase I finds interior points that are far from the origin") {
  // Feasible set is a narrow box away from zero; the solver must locate it.
  Problem p = blank(2);
  p.P = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.lb = Eigen::Vector2d(10.0, -12.0);
  p.ub = Eigen::Vector2d(11.0, -11.0);
  Solution s = BarrierSolver().solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x(0) == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(s.x(1) == doctest::Approx(-11.0).epsilon(1e-6));
}

TEST_CASE("empty cone set degenerates to a bound-constrained QP") {
  Problem p = blank(1);
  p.P = Eigen::MatrixXd::Constant(1, 1, 2.0);
  p.q = Eigen::VectorXd::Constant(1, -10.0);
  p.lb = Eigen::VectorXd::Zero(1);
  p.ub = Eigen::VectorXd::Ones(1);
  Solution s = BarrierSolver().solve(p);
  REQUIRE(s.status == Status::optimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-7));  // clipped at the upper bound
  CHECK(s.objective == doctest::Approx(-9.0).epsilon(1e-6));
}
