#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace wfmpc {

// Linearization point of one turbine. Closed-loop signals elsewhere in the
// library are deviations from these absolute values.
struct OperatingPoint {
  double w0 = 0.0;       // rotor-effective wind speed [m/s]
  double P_wt0 = 0.0;    // power reference [W]
  double beta0 = 0.0;    // collective pitch [deg]
  double omega_r0 = 0.0; // rotor speed [rad/s]
  double omega_g0 = 0.0; // (filtered) generator speed [rad/s]
  double F_t0 = 0.0;     // thrust [N]
  double T_s0 = 0.0;     // shaft torque [N m]
};

// Discrete-time deviation model of one turbine,
//   x+ = A x + B u + E w,   y = C x + D u + F w,
// u = power-reference deviation [W], w = wind-speed deviation [m/s],
// y = (thrust, shaft torque) deviations [N, N m].
struct TurbineLti {
  Eigen::MatrixXd A, B, C, D, E, F;
  OperatingPoint op;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ny() const { return static_cast<int>(C.rows()); }
  int nw() const { return static_cast<int>(E.cols()); }
};

// Farm-level model: block-diagonal composition of turbine models. Turbines
// couple only through the wind field and the dispatch constraints, not
// through the dynamics.
struct FarmModel {
  std::vector<TurbineLti> turbines;
  double dt = 1.0; // sample time [s]
  Eigen::MatrixXd A, B, C, D, E, F;

  int n_wt() const { return static_cast<int>(turbines.size()); }
  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ny() const { return static_cast<int>(C.rows()); }
  int nw() const { return static_cast<int>(E.cols()); }
};

// Validates per-turbine dimensions and assembles the block-diagonal farm
// matrices. Throws std::invalid_argument on inconsistent dimensions.
FarmModel stack_farm(std::vector<TurbineLti> turbines, double dt);

// One step of the deviation dynamics; returns (x_next, y).
std::pair<Eigen::VectorXd, Eigen::VectorXd> step(const FarmModel& m,
                                                 const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& u,
                                                 const Eigen::VectorXd& w);

// JSON model file with either explicit matrices per turbine or surrogate
// parameters from which a turbine is linearized on load.
FarmModel load_farm_model(const std::string& path);
void save_farm_model(const FarmModel& m, const std::string& path);

}  // namespace wfmpc
