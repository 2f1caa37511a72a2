#pragma once

#include <Eigen/Dense>

#include "wfmpc/farm_model.hpp"

namespace wfmpc {

// Physical surrogate used to generate turbine linearizations. Above-rated
// operation: the torque loop holds rotor speed near omega_r_rated and a
// proportional pitch loop (gain k_pitch on filtered generator speed) sheds
// excess aerodynamic power. State x = (beta [deg], omega_r [rad/s],
// omega_g_f [rad/s]); inputs P_ref [W] and rotor-effective wind w [m/s].
struct SurrogateParams {
  double rho = 1.225;           // air density [kg/m^3]
  double R = 63.0;              // rotor radius [m]
  double J = 4.0e7;             // drivetrain inertia, rotor side [kg m^2]
  double gear_ratio = 97.0;
  double tau_beta = 2.0;        // pitch actuator time constant [s]
  double tau_filter = 2.0;      // generator-speed filter time constant [s]
  double k_pitch = 0.8;         // [deg per rad/s filtered generator speed]
  double thrust_gain = 1.0;     // a_t in F_t = q A (a_t Cp + b_t)
  double thrust_offset = 0.043; // b_t
  double omega_r_rated = 1.267; // [rad/s]
  double cut_in = 3.0;          // minimum wind speed for a valid point [m/s]
};

struct CpEval {
  double value = 0.0;
  double d_beta = 0.0; // dCp/dbeta [1/deg]
  double d_tsr = 0.0;  // dCp/dlambda
};

// Power coefficient (Heier form) and its partials; beta in degrees.
CpEval cp_curve(double beta_deg, double tsr);

// Continuous-time state derivative at absolute state/input values.
Eigen::Vector3d surrogate_rhs(const SurrogateParams& p, const OperatingPoint& op,
                              const Eigen::Vector3d& x, double P_ref, double w);

// Absolute outputs (thrust [N], shaft torque [N m]).
Eigen::Vector2d surrogate_outputs(const SurrogateParams& p, const Eigen::Vector3d& x,
                                  double P_ref, double w);

// Solves the pitch angle at which aerodynamic power balances P_wt0 at wind
// w0 and rated rotor speed. Throws std::runtime_error when w0 is below
// cut-in or no pitch in [0, 35] deg balances the power.
OperatingPoint solve_operating_point(const SurrogateParams& p, double w0, double P_wt0);

// Analytic linearization at the operating point, discretized by zero-order
// hold at sample time dt.
TurbineLti default_turbine(const SurrogateParams& p, double w0, double P_wt0, double dt);

}  // namespace wfmpc
