#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace wfmpc {

// Row configuration of a single-row farm with equidistant spacing along the
// prevailing wind direction. Wake model: each turbine sees the upstream
// turbine's wind, delayed by the advection time and scaled by a static
// deficit factor 1 - a_w (R / (R + k_w d))^2, plus added turbulence of
// standard deviation delta_TI * w0.
struct WindScenario {
  double w0 = 12.0;       // free-stream mean [m/s]
  double TI = 0.1;        // free-stream turbulence intensity
  int n_wt = 5;
  double spacing = 400.0; // [m]
  int T = 900;            // samples
  double dt = 1.0;        // [s]
  std::uint64_t seed = 1;
  double turb_corr = 0.95; // AR(1) coefficient of turbulence deviations
  double a_w = 0.2;        // wake deficit coefficient
  double k_w = 0.075;      // wake expansion coefficient
  double delta_TI = 0.05;  // wake-added turbulence intensity
  double rotor_R = 63.0;   // rotor radius used by the deficit factor [m]
};

// Effective wind speeds, column i = turbine i (0 = upstream). Entries are
// absolute speeds [m/s], floored at 0.05 w0.
struct WindTrace {
  Eigen::MatrixXd w; // T x n_wt
  WindScenario scenario;
};

// Static deficit factor applied per upstream hop.
double wake_deficit_factor(const WindScenario& sc);

// Advection delay in samples, round(spacing / (w0 dt)).
int wake_delay_samples(const WindScenario& sc);

// Mean effective wind per turbine implied by the deficit chain (no
// turbulence): w0 * factor^i.
Eigen::VectorXd mean_effective_wind(const WindScenario& sc);

// Free-stream speed at the upstream turbine: w0 plus a stationary AR(1)
// deviation with marginal std TI * w0. Pure in (scenario, seed).
Eigen::VectorXd generate_free_stream(const WindScenario& sc);

// Full farm trace: deficit- and delay-propagated upstream wind plus
// independent added-turbulence AR(1) streams per downstream turbine.
// Throws std::invalid_argument when the advection delay is >= T.
WindTrace generate_wind(const WindScenario& sc);

// Propagates an externally supplied upstream series through the wake chain
// (used by generate_wind; exposed for tests).
WindTrace apply_wake(const Eigen::VectorXd& upstream, const WindScenario& sc);

void save_wind_csv(const WindTrace& tr, const std::string& path);
WindTrace load_wind_csv(const std::string& path);

}  // namespace wfmpc
