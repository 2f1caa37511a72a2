#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wfmpc/ambiguity.hpp"
#include "wfmpc/arma.hpp"
#include "wfmpc/drmpc.hpp"
#include "wfmpc/metrics.hpp"
#include "wfmpc/sim.hpp"
#include "wfmpc/surrogate.hpp"
#include "wfmpc/wind_sim.hpp"

namespace wfmpc {

// Experiment description: scenario, turbine parameters, identification and
// controller settings. JSON-serializable; every field has a shipped default
// so an empty file is a valid experiment.
struct ExperimentConfig {
  WindScenario scenario;          // seed field is the default seed
  SurrogateParams turbine;
  double per_turbine_ref = 3.0e6; // nominal reference P_wt0 [W]
  double rated_power = 5.0e6;     // P0 [W]
  std::string model_file;         // optional explicit farm model

  std::vector<int> arma_orders = {2, 3};
  int train_samples = 1000;
  std::uint64_t train_seed_offset = 1000003;
  std::string arma_model_file;    // optional pre-fitted models

  double kappa = 2.36;            // 0 selects the beta-based default
  double beta = 0.05;
  std::string ambiguity_file;     // optional pre-estimated set

  DrmpcWeights weights;
  double constraint_mw = 1.0;     // +- magnitude on input deviations [MW]
  double constraint_prob = 0.9;
  bool strict_m_row_sums = false;
  int horizon = 5;
  double power_tau = 0.5;
  MetricsNorms norms;
};

ExperimentConfig load_experiment(const std::string& path);
void save_experiment(const ExperimentConfig& cfg, const std::string& path);

// Farm model from the config: explicit file if given, otherwise identical
// surrogate linearizations at the free-stream operating point. Wake deficits
// enter through the wind predictions and the available-power saturation,
// not through per-turbine plant models.
FarmModel make_farm(const ExperimentConfig& cfg);

WindScenario make_scenario(const ExperimentConfig& cfg, std::uint64_t seed);

struct FittedWind {
  std::vector<ArmaModel> models;
  AmbiguitySet amb;
};

// Identification pipeline on an independent training trace: per turbine,
// fit each candidate order, keep the lowest held-out one-step RMSE, then
// estimate the residual covariance by whitening the training series.
FittedWind fit_wind_models(const ExperimentConfig& cfg, std::uint64_t seed);

// Candidate-order selection for a single series; returns the chosen model.
ArmaModel identify_selected(const Eigen::VectorXd& series, const std::vector<int>& orders);

DrmpcController make_controller(const ExperimentConfig& cfg, const FarmModel& farm,
                                const FittedWind& fw);

PowerTracking make_power_tracking(const ExperimentConfig& cfg);

// One closed-loop run; kind is "scheduler", "swf" or "drmpc". Solve times
// are always collected in the trace; the CSV writer decides whether to
// persist them.
SimTrace run_experiment(const ExperimentConfig& cfg, const std::string& kind,
                        std::uint64_t seed);

// Paired-seed comparison battery: scheduler baseline, SWF, and DR-MPC at
// the given r values, all on the identical wind realization.
std::vector<CompareRow> run_comparison(const ExperimentConfig& cfg, std::uint64_t seed,
                                       const std::vector<double>& r_values);

}  // namespace wfmpc
