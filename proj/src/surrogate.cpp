#include "wfmpc/surrogate.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace wfmpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Heier coefficient set.
constexpr double c1 = 0.5176, c2 = 116.0, c3 = 0.4, c4 = 5.0, c5 = 21.0, c6 = 0.0068;

double swept_area(const SurrogateParams& p) { return kPi * p.R * p.R; }

}  // namespace

CpEval cp_curve(double beta_deg, double tsr) {
  const double s = tsr + 0.08 * beta_deg;
  const double cube = beta_deg * beta_deg * beta_deg + 1.0;
  const double g = 1.0 / s - 0.035 / cube;
  const double dg_dtsr = -1.0 / (s * s);
  const double dg_dbeta = -0.08 / (s * s) + 0.105 * beta_deg * beta_deg / (cube * cube);
  const double e = std::exp(-c5 * g);
  const double core = c2 * g - c3 * beta_deg - c4;
  CpEval r;
  r.value = c1 * core * e + c6 * tsr;
  const double dcp_dg = c1 * e * (c2 - c5 * core);
  r.d_beta = dcp_dg * dg_dbeta - c1 * c3 * e;
  r.d_tsr = dcp_dg * dg_dtsr + c6;
  return r;
}

Eigen::Vector3d surrogate_rhs(const SurrogateParams& p, const OperatingPoint& op,
                              const Eigen::Vector3d& x, double P_ref, double w) {
  const double beta = x(0), omega_r = x(1), omega_f = x(2);
  const double tsr = omega_r * p.R / w;
  const CpEval cp = cp_curve(beta, tsr);
  const double P_aero = 0.5 * p.rho * swept_area(p) * cp.value * w * w * w;
  Eigen::Vector3d f;
  f(0) = (op.beta0 + p.k_pitch * (omega_f - op.omega_g0) - beta) / p.tau_beta;
  f(1) = (P_aero - P_ref) / (p.J * omega_r);
  f(2) = (p.gear_ratio * omega_r - omega_f) / p.tau_filter;
  return f;
}

Eigen::Vector2d surrogate_outputs(const SurrogateParams& p, const Eigen::Vector3d& x,
                                  double P_ref, double w) {
  const double beta = x(0), omega_r = x(1);
  const CpEval cp = cp_curve(beta, omega_r * p.R / w);
  Eigen::Vector2d y;
  y(0) = 0.5 * p.rho * swept_area(p) * w * w * (p.thrust_gain * cp.value + p.thrust_offset);
  y(1) = P_ref / omega_r;
  return y;
}

OperatingPoint solve_operating_point(const SurrogateParams& p, double w0, double P_wt0) {
  if (w0 < p.cut_in)
    throw std::runtime_error("operating point: wind speed below cut-in");
  if (!(P_wt0 > 0.0)) throw std::runtime_error("operating point: P_wt0 must be positive");
  const double tsr0 = p.omega_r_rated * p.R / w0;
  const double q = 0.5 * p.rho * swept_area(p) * w0 * w0 * w0;
  const double target = P_wt0 / q;
  double lo = 0.0, hi = 35.0;
  const double f_lo = cp_curve(lo, tsr0).value - target;
  const double f_hi = cp_curve(hi, tsr0).value - target;
  if (f_lo < 0.0)
    throw std::runtime_error("operating point: requested power exceeds aerodynamic capability");
  if (f_hi > 0.0)
    throw std::runtime_error("operating point: power balance not reachable within pitch range");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cp_curve(mid, tsr0).value - target >= 0.0) lo = mid; else hi = mid;
  }
  OperatingPoint op;
  op.w0 = w0;
  op.P_wt0 = P_wt0;
  op.beta0 = 0.5 * (lo + hi);
  op.omega_r0 = p.omega_r_rated;
  op.omega_g0 = p.gear_ratio * p.omega_r_rated;
  const Eigen::Vector3d x0(op.beta0, op.omega_r0, op.omega_g0);
  const Eigen::Vector2d y0 = surrogate_outputs(p, x0, P_wt0, w0);
  op.F_t0 = y0(0);
  op.T_s0 = y0(1);
  return op;
}

TurbineLti default_turbine(const SurrogateParams& p, double w0, double P_wt0, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("default_turbine: dt must be positive");
  const OperatingPoint op = solve_operating_point(p, w0, P_wt0);
  const double beta = op.beta0, omega_r = op.omega_r0;
  const double tsr = omega_r * p.R / w0;
  const CpEval cp = cp_curve(beta, tsr);
  const double qA = 0.5 * p.rho * swept_area(p);
  const double P_aero = qA * cp.value * w0 * w0 * w0;
  const double Jw = p.J * omega_r;

  // Continuous-time Jacobians of (beta, omega_r, omega_f) dynamics.
  Eigen::Matrix3d Ac = Eigen::Matrix3d::Zero();
  Ac(0, 0) = -1.0 / p.tau_beta;
  Ac(0, 2) = p.k_pitch / p.tau_beta;
  Ac(1, 0) = qA * w0 * w0 * w0 * cp.d_beta / Jw;
  Ac(1, 1) = qA * w0 * w0 * w0 * cp.d_tsr * (p.R / w0) / Jw
             - (P_aero - P_wt0) / (Jw * omega_r);
  Ac(2, 1) = p.gear_ratio / p.tau_filter;
  Ac(2, 2) = -1.0 / p.tau_filter;

  Eigen::Vector3d Bc(0.0, -1.0 / Jw, 0.0);
  Eigen::Vector3d Ec(0.0,
                     (qA * (3.0 * w0 * w0 * cp.value - w0 * omega_r * p.R * cp.d_tsr)) / Jw,
                     0.0);

  // Output deviations: thrust and shaft torque.
  Eigen::Matrix<double, 2, 3> C = Eigen::Matrix<double, 2, 3>::Zero();
  C(0, 0) = qA * w0 * w0 * p.thrust_gain * cp.d_beta;
  C(0, 1) = qA * w0 * w0 * p.thrust_gain * cp.d_tsr * (p.R / w0);
  C(1, 1) = -P_wt0 / (omega_r * omega_r);
  Eigen::Vector2d D(0.0, 1.0 / omega_r);
  Eigen::Vector2d F(qA * (2.0 * w0 * (p.thrust_gain * cp.value + p.thrust_offset)
                          - w0 * p.thrust_gain * tsr * cp.d_tsr),
                    0.0);

  // Zero-order hold through the augmented exponential
  // exp([Ac, [Bc Ec]; 0, 0] dt) = [Ad, [Bd Ed]; 0, I].
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(5, 5);
  aug.topLeftCorner(3, 3) = Ac;
  aug.block(0, 3, 3, 1) = Bc;
  aug.block(0, 4, 3, 1) = Ec;
  const Eigen::MatrixXd ex = (aug * dt).exp();

  TurbineLti t;
  t.A = ex.topLeftCorner(3, 3);
  t.B = ex.block(0, 3, 3, 1);
  t.E = ex.block(0, 4, 3, 1);
  t.C = C;
  t.D = D;
  t.F = F;
  t.op = op;
  return t;
}

}  // namespace wfmpc
