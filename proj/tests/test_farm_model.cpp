#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include "wfmpc/farm_model.hpp"
#include "wfmpc/rng.hpp"
#include "wfmpc/surrogate.hpp"

using namespace wfmpc;

namespace {

TurbineLti scalar_turbine(double a, double b, double e) {
  TurbineLti t;
  t.A = Eigen::MatrixXd::Constant(1, 1, a);
  t.B = Eigen::MatrixXd::Constant(1, 1, b);
  t.E = Eigen::MatrixXd::Constant(1, 1, e);
  t.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  t.D = Eigen::MatrixXd::Zero(1, 1);
  t.F = Eigen::MatrixXd::Zero(1, 1);
  return t;
}

Eigen::VectorXd rand_vec(int n, std::uint64_t stream) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng_normal(7, stream, i);
  return v;
}

// Central finite differences of the continuous-time surrogate around the
// operating point; h scaled per coordinate so the 3e6 W reference and the
// O(1) rad/s states both get sensible steps.
struct FdJacobians {
  Eigen::Matrix3d A;
  Eigen::Vector3d B, E;
  Eigen::MatrixXd C, D, F; // 2x3, 2x1, 2x1
};

FdJacobians fd_linearize(const SurrogateParams& p, const OperatingPoint& op) {
  const Eigen::Vector3d x0(op.beta0, op.omega_r0, op.omega_g0);
  auto rhs = [&](const Eigen::Vector3d& x, double pr, double w) {
    return surrogate_rhs(p, op, x, pr, w);
  };
  auto out = [&](const Eigen::Vector3d& x, double pr, double w) {
    return surrogate_outputs(p, x, pr, w);
  };
  FdJacobians J;
  J.C.resize(2, 3);
  J.D.resize(2, 1);
  J.F.resize(2, 1);
  for (int i = 0; i < 3; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x0(i)));
    Eigen::Vector3d xp = x0, xm = x0;
    xp(i) += h;
    xm(i) -= h;
    J.A.col(i) = (rhs(xp, op.P_wt0, op.w0) - rhs(xm, op.P_wt0, op.w0)) / (2 * h);
    J.C.col(i) = (out(xp, op.P_wt0, op.w0) - out(xm, op.P_wt0, op.w0)) / (2 * h);
  }
  const double hu = 1e-6 * op.P_wt0;
  J.B = (rhs(x0, op.P_wt0 + hu, op.w0) - rhs(x0, op.P_wt0 - hu, op.w0)) / (2 * hu);
  J.D = (out(x0, op.P_wt0 + hu, op.w0) - out(x0, op.P_wt0 - hu, op.w0)) / (2 * hu);
  const double hw = 1e-6 * op.w0;
  J.E = (rhs(x0, op.P_wt0, op.w0 + hw) - rhs(x0, op.P_wt0, op.w0 - hw)) / (2 * hw);
  J.F = (out(x0, op.P_wt0, op.w0 + hw) - out(x0, op.P_wt0, op.w0 - hw)) / (2 * hw);
  return J;
}

}  // namespace

TEST_CASE("stack_farm: single turbine is the identity case") {
  TurbineLti t = default_turbine(SurrogateParams{}, 12.0, 3.0e6, 1.0);
  FarmModel m = stack_farm({t}, 1.0);
  CHECK(m.n_wt() == 1);
  CHECK((m.A - t.A).norm() == 0.0);
  CHECK((m.B - t.B).norm() == 0.0);
  CHECK((m.C - t.C).norm() == 0.0);
  CHECK((m.D - t.D).norm() == 0.0);
  CHECK((m.E - t.E).norm() == 0.0);
  CHECK((m.F - t.F).norm() == 0.0);
}

TEST_CASE("stack_farm: block-diagonal placement and zero off-diagonal blocks") {
  TurbineLti t1 = scalar_turbine(1.0, 0.0, 0.0);
  t1.A = Eigen::MatrixXd::Identity(3, 3);
  t1.B = Eigen::MatrixXd::Zero(3, 1);
  t1.E = Eigen::MatrixXd::Zero(3, 1);
  t1.C = Eigen::MatrixXd::Zero(2, 3);
  t1.D = Eigen::MatrixXd::Zero(2, 1);
  t1.F = Eigen::MatrixXd::Zero(2, 1);
  FarmModel eye2 = stack_farm({t1, t1}, 1.0);
  CHECK((eye2.A - Eigen::MatrixXd::Identity(6, 6)).norm() == 0.0);

  TurbineLti t2 = t1;
  t2.A = 2.0 * Eigen::MatrixXd::Ones(3, 3);
  FarmModel m = stack_farm({t1, t2}, 1.0);
  CHECK(m.nx() == 6);
  CHECK(m.nu() == 2);
  CHECK(m.ny() == 4);
  CHECK(m.A.block(0, 3, 3, 3).norm() == 0.0);
  CHECK(m.A.block(3, 0, 3, 3).norm() == 0.0);
  CHECK((m.A.block(3, 3, 3, 3) - t2.A).norm() == 0.0);
}

TEST_CASE("stack_farm: rejects empty lists and inconsistent dimensions") {
  CHECK_THROWS_AS(stack_farm({}, 1.0), std::invalid_argument);
  TurbineLti bad = scalar_turbine(0.5, 1.0, 1.0);
  bad.B = Eigen::MatrixXd::Zero(2, 1); // wrong row count
  CHECK_THROWS_AS(stack_farm({bad}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(stack_farm({scalar_turbine(0.5, 1.0, 1.0)}, 0.0), std::invalid_argument);
}

TEST_CASE("step: origin is an equilibrium of the deviation system") {
  FarmModel m = stack_farm({default_turbine(SurrogateParams{}, 12.0, 3.0e6, 1.0)}, 1.0);
  auto [xn, y] = step(m, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1),
                      Eigen::VectorXd::Zero(1));
  CHECK(xn.norm() == 0.0);
  CHECK(y.norm() == 0.0);
}

TEST_CASE("step: hand-evaluated scalar block") {
  // A=0.5, B=1, E=1, x=2, u=1, w=1 -> x_next = 0.5*2 + 1 + 1 = 3.
  FarmModel m = stack_farm({scalar_turbine(0.5, 1.0, 1.0)}, 1.0);
  Eigen::VectorXd x(1), u(1), w(1);
  x << 2.0;
  u << 1.0;
  w << 1.0;
  auto [xn, y] = step(m, x, u, w);
  CHECK(xn(0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(y(0) == doctest::Approx(2.0).epsilon(1e-15)); // C = 1, D = F = 0
}

TEST_CASE("step: superposition on random vectors") {
  FarmModel m = stack_farm({default_turbine(SurrogateParams{}, 12.0, 3.0e6, 1.0),
                            default_turbine(SurrogateParams{}, 11.0, 2.5e6, 1.0)},
                           1.0);
  const Eigen::VectorXd x1 = rand_vec(m.nx(), 1), x2 = rand_vec(m.nx(), 2);
  const Eigen::VectorXd u1 = rand_vec(m.nu(), 3), u2 = rand_vec(m.nu(), 4);
  const Eigen::VectorXd w1 = rand_vec(m.nw(), 5), w2 = rand_vec(m.nw(), 6);
  auto [xa, ya] = step(m, x1, u1, w1);
  auto [xb, yb] = step(m, x2, u2, w2);
  auto [xs, ys] = step(m, x1 + x2, u1 + u2, w1 + w2);
  CHECK((xs - xa - xb).norm() <= 1e-9 * (1.0 + xs.norm()));
  CHECK((ys - ya - yb).norm() <= 1e-9 * (1.0 + ys.norm()));
}

TEST_CASE("step: dimension mismatch throws") {
  FarmModel m = stack_farm({scalar_turbine(0.5, 1.0, 1.0)}, 1.0);
  CHECK_THROWS_AS(step(m, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1),
                       Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
}

TEST_CASE("default_turbine matches the finite-difference linearization") {
  const SurrogateParams p;
  const double dt = 1.0;
  const TurbineLti t = default_turbine(p, 12.0, 3.0e6, dt);
  const FdJacobians J = fd_linearize(p, t.op);

  // ZOH of the FD Jacobian through the augmented matrix exponential.
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(5, 5);
  aug.topLeftCorner(3, 3) = J.A;
  aug.block(0, 3, 3, 1) = J.B;
  aug.block(0, 4, 3, 1) = J.E;
  const Eigen::MatrixXd expm = (dt * aug).exp();

  const double sA = expm.topLeftCorner(3, 3).norm();
  CHECK((t.A - expm.topLeftCorner(3, 3)).norm() <= 1e-6 * sA);
  CHECK((t.B - expm.block(0, 3, 3, 1)).norm() <= 1e-6 * expm.block(0, 3, 3, 1).norm());
  CHECK((t.E - expm.block(0, 4, 3, 1)).norm() <= 1e-6 * expm.block(0, 4, 3, 1).norm());

  // Static output maps are not touched by discretization.
  CHECK((t.C - J.C).norm() <= 1e-6 * J.C.norm());
  CHECK((t.D - J.D).norm() <= 1e-6 * (J.D.norm() + 1e-12));
  CHECK((t.F - J.F).norm() <= 1e-6 * J.F.norm());
}

TEST_CASE("default_turbine: stability, equilibrium pass-through, dt -> 0 limit") {
  const TurbineLti t = default_turbine(SurrogateParams{}, 12.0, 3.0e6, 1.0);
  CHECK(t.A.eigenvalues().cwiseAbs().maxCoeff() < 1.0);

  // The surrogate's drift vanishes at the solved operating point.
  const Eigen::Vector3d x0(t.op.beta0, t.op.omega_r0, t.op.omega_g0);
  CHECK(surrogate_rhs(SurrogateParams{}, t.op, x0, t.op.P_wt0, t.op.w0).norm() < 1e-6);
  const Eigen::Vector2d y0 = surrogate_outputs(SurrogateParams{}, x0, t.op.P_wt0, t.op.w0);
  CHECK(y0(0) == doctest::Approx(t.op.F_t0).epsilon(1e-9));
  CHECK(y0(1) == doctest::Approx(t.op.T_s0).epsilon(1e-9));

  const TurbineLti tiny = default_turbine(SurrogateParams{}, 12.0, 3.0e6, 1e-9);
  CHECK((tiny.A - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-6);
}

TEST_CASE("farm model file round trip") {
  FarmModel m = stack_farm({default_turbine(SurrogateParams{}, 12.0, 3.0e6, 1.0),
                            default_turbine(SurrogateParams{}, 10.0, 2.0e6, 1.0)},
                           1.0);
  const std::string path = "farm_roundtrip.json";
  save_farm_model(m, path);
  FarmModel r = load_farm_model(path);
  CHECK(r.n_wt() == m.n_wt());
  CHECK(r.dt == m.dt);
  CHECK((r.A - m.A).norm() == 0.0);
  CHECK((r.B - m.B).norm() == 0.0);
  CHECK((r.C - m.C).norm() == 0.0);
  CHECK((r.D - m.D).norm() == 0.0);
  CHECK((r.E - m.E).norm() == 0.0);
  CHECK((r.F - m.F).norm() == 0.0);
  CHECK(r.turbines[1].op.P_wt0 == m.turbines[1].op.P_wt0);
  CHECK(r.turbines[1].op.w0 == m.turbines[1].op.w0);
}
