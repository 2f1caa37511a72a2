#pragma once

#include <Eigen/Dense>
#include <string>

namespace wfmpc {

// Moment ambiguity set for the stacked innovation vector: zero mean,
// covariance dominated by kappa * diag(sigma_diag). Keyed by the scenario
// (w0, TI) it was estimated under.
struct AmbiguitySet {
  double w0 = 0.0;
  double TI = 0.0;
  double beta = 0.05;           // 1 - confidence
  int N_s = 0;                  // residual sample count
  double kappa = 0.0;           // 0 means "not configured"
  Eigen::VectorXd sigma_diag;   // per-turbine residual variances [m^2/s^2]
};

// Per-turbine residual variances (zero-mean convention, divisor N_s) from a
// T x n_wt residual matrix.
Eigen::VectorXd residual_covariance(const Eigen::MatrixXd& residuals);

// Configured radius when set, otherwise the built-in default for the
// supported confidence level (1 - beta = 0.95 -> 2.36). Throws
// std::invalid_argument for other confidence levels without a configured
// radius.
double ambiguity_radius(const AmbiguitySet& amb);

// Worst-case covariance of the stacked (epsbar, 1) vector over the set:
// diag(I_N kron kappa Sigma_eps, 1). Stored factored as the horizon-stacked
// innovation covariance diagonal plus the trailing unit entry.
struct WorstCaseCov {
  Eigen::VectorXd stacked_diag; // N * n_wt entries: kappa * sigma_i^2 repeated per step
  int N = 0;
  int n_wt = 0;
};

WorstCaseCov worst_case_cov(const AmbiguitySet& amb, int N);

void save_ambiguity(const AmbiguitySet& amb, const std::string& path);
AmbiguitySet load_ambiguity(const std::string& path);

}  // namespace wfmpc
