#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wfmpc/drmpc.hpp"
#include "wfmpc/farm_model.hpp"
#include "wfmpc/wind_sim.hpp"

namespace wfmpc {

// Electrical power-output surrogate: first-order tracking of the reference,
// saturated by the available aerodynamic power
//   P_avail = min(P0, 0.5 pi rho R^2 w^3 cp_max).
struct PowerTracking {
  double tau = 0.5;    // tracking time constant [s]
  double P0 = 5.0e6;   // rated electrical power [W]
  double cp_max = 0.45;
  double rho = 1.225;
  double R = 63.0;
};

double available_power(double w, const PowerTracking& pt);

// Closed-loop record. u holds absolute references [W]; y columns are
// absolute thrust [N] and shaft torque [N m]; x the deviation states.
struct SimTrace {
  WindTrace wind;
  Eigen::MatrixXd x;       // T x nx
  Eigen::MatrixXd u;       // T x n_wt
  Eigen::MatrixXd P_out;   // T x n_wt
  Eigen::MatrixXd F_t;     // T x n_wt
  Eigen::MatrixXd T_s;     // T x n_wt
  Eigen::VectorXd lambda;  // T
  Eigen::VectorXd solve_ms;// T, wall-clock solver time (0 for open loop)
  std::vector<char> fallback; // T
  double P_demand = 0.0;   // farm reference [W]
  double dt = 1.0;
};

// Open-loop scheduler: constant per-turbine reference P_wt0.
SimTrace run_scheduler(const FarmModel& m, const WindTrace& wind, const PowerTracking& pt);

// Proportional dispatch of the farm reference by available power, saturated
// at [0, P0] per turbine.
SimTrace run_swf_dispatch(const FarmModel& m, const WindTrace& wind, const PowerTracking& pt);

// Receding-horizon dispatch. The controller is reset, then stepped once per
// sample with the measured deviation state and the whitened wind state.
// Wall-clock solve times are always collected in-memory; whether they reach
// the trace file is the CSV writer's concern.
SimTrace run_drmpc(const FarmModel& m, const WindTrace& wind, DrmpcController& ctrl,
                   const PowerTracking& pt);

}  // namespace wfmpc
