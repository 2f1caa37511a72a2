#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wfmpc/surrogate.hpp"

using namespace wfmpc;

namespace {
constexpr double kPi = 3.14159265358979323846;

double aero_power(const SurrogateParams& p, double beta, double tsr, double w) {
  return 0.5 * kPi * p.rho * p.R * p.R * cp_curve(beta, tsr).value * w * w * w;
}
}  // namespace

TEST_CASE("cp_curve partials match central differences") {
  const double h = 1e-6;
  for (double beta : {0.0, 4.0, 12.0}) {
    for (double tsr : {5.0, 6.65, 9.0}) {
      const CpEval e = cp_curve(beta, tsr);
      const double db = (cp_curve(beta + h, tsr).value - cp_curve(beta - h, tsr).value) / (2 * h);
      const double dl = (cp_curve(beta, tsr + h).value - cp_curve(beta, tsr - h).value) / (2 * h);
      CHECK(e.d_beta == doctest::Approx(db).epsilon(1e-6));
      CHECK(e.d_tsr == doctest::Approx(dl).epsilon(1e-6));
    }
  }
}

TEST_CASE("cp_curve stays physical over the working range") {
  for (double beta = 0.0; beta <= 30.0; beta += 2.5)
    for (double tsr = 2.0; tsr <= 12.0; tsr += 1.0) {
      const double v = cp_curve(beta, tsr).value;
      CHECK(v < 0.593); // Betz
      CHECK(std::isfinite(v));
    }
}

TEST_CASE("solve_operating_point balances aerodynamic and electrical power") {
  const SurrogateParams p;
  const OperatingPoint op = solve_operating_point(p, 12.0, 3.0e6);
  CHECK(op.w0 == 12.0);
  CHECK(op.P_wt0 == 3.0e6);
  CHECK(op.omega_r0 == doctest::Approx(p.omega_r_rated));
  CHECK(op.omega_g0 == doctest::Approx(p.omega_r_rated * p.gear_ratio)); // generator side
  const double tsr = op.omega_r0 * p.R / op.w0;
  CHECK(aero_power(p, op.beta0, tsr, op.w0) == doctest::Approx(3.0e6).epsilon(1e-6));
  CHECK(op.beta0 >= 0.0);
  CHECK(op.beta0 <= 35.0);
  CHECK(op.F_t0 > 0.0);
  CHECK(op.T_s0 > 0.0);
}

TEST_CASE("solve_operating_point rejects invalid points") {
  const SurrogateParams p;
  CHECK_THROWS(solve_operating_point(p, 2.0, 1.0e6));  // below cut-in
  CHECK_THROWS(solve_operating_point(p, 5.0, 5.0e6));  // more power than the wind carries
}

TEST_CASE("surrogate outputs at the operating point equal the nominal outputs") {
  const SurrogateParams p;
  const OperatingPoint op = solve_operating_point(p, 11.0, 2.5e6);
  const Eigen::Vector3d x0(op.beta0, op.omega_r0, op.omega_g0);
  const Eigen::Vector2d y = surrogate_outputs(p, x0, op.P_wt0, op.w0);
  CHECK(y(0) == doctest::Approx(op.F_t0).epsilon(1e-12));
  CHECK(y(1) == doctest::Approx(op.T_s0).epsilon(1e-12));
  // T_s0 is the generator torque reaction P/omega at the operating point.
  CHECK(op.T_s0 == doctest::Approx(op.P_wt0 / op.omega_r0).epsilon(1e-9));
}

TEST_CASE("drift direction: more wind accelerates the rotor, pitch loop reacts") {
  const SurrogateParams p;
  const OperatingPoint op = solve_operating_point(p, 12.0, 3.0e6);
  const Eigen::Vector3d x0(op.beta0, op.omega_r0, op.omega_g0);
  const Eigen::Vector3d d = surrogate_rhs(p, op, x0, op.P_wt0, op.w0 + 0.5);
  CHECK(d(1) > 0.0); // rotor acceleration
  Eigen::Vector3d xg = x0;
  xg(2) += 0.05; // filtered generator speed above nominal
  CHECK(surrogate_rhs(p, op, xg, op.P_wt0, op.w0)(0) > 0.0); // pitch increases
}

TEST_CASE("higher wind needs more pitch at the same power") {
  const SurrogateParams p;
  const double b12 = solve_operating_point(p, 12.0, 3.0e6).beta0;
  const double b14 = solve_operating_point(p, 14.0, 3.0e6).beta0;
  CHECK(b14 > b12);
}
