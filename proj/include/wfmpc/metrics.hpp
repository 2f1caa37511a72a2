#pragma once

#include <string>
#include <vector>

#include "wfmpc/sim.hpp"

namespace wfmpc {

// Trace-level performance metrics.
//   J_p = sqrt( (1/T) sum_k sum_i (P_out - P_ref)^2 / (N_wt P0) )
//   J_s: std over time of the per-step farm shaft-torque total / (N_wt Ts0).
//   J_t: std over time of the per-step farm thrust total / (N_wt Tt0).
// Standard deviations use the population convention (divisor T).
struct MetricsReport {
  double J_p = 0.0;
  double J_s = 0.0;
  double J_t = 0.0;
};

struct MetricsNorms {
  double P0 = 5.0e6;
  double Ts0 = 2.5e6;
  double Tt0 = 0.27e6;
};

MetricsReport compute_metrics(const SimTrace& tr, const MetricsNorms& n);

// One row of a controller comparison; percentages are relative to the
// baseline row (baseline = 100).
struct CompareRow {
  std::string method;
  double r = 0.0; // input weight, 0 for non-MPC rows
  MetricsReport m;
  double pct_p = 100.0, pct_s = 100.0, pct_t = 100.0;
};

// Fills percentage columns against rows[0].
void fill_percentages(std::vector<CompareRow>& rows);

std::string format_compare_table(const std::vector<CompareRow>& rows);
void save_compare_csv(const std::vector<CompareRow>& rows, const std::string& path);
std::vector<CompareRow> load_compare_csv(const std::string& path);

}  // namespace wfmpc
