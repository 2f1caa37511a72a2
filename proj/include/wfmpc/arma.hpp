#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace wfmpc {

// ARMA(p, p-1) wind model in observer canonical state-space form
// (Eq. structure: first column of A_psi carries the AR coefficients, the
// superdiagonal is identity, B_psi = (1, b_1, ..., b_{p-1})^T, C_psi picks
// the first state), so C_psi B_psi = 1 and the one-step whitening
// eps(k) = w(k+1) - C_psi A_psi psi(k) is exact.
struct ArmaModel {
  int p = 0;
  Eigen::VectorXd a;      // AR coefficients, size p
  Eigen::VectorXd b;      // MA coefficients, size p-1
  double mean = 0.0;      // sample mean removed before fitting [m/s]
  Eigen::MatrixXd A_psi;  // p x p
  Eigen::VectorXd B_psi;  // p
  Eigen::RowVectorXd C_psi; // 1 x p
};

struct CanonicalForm {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
};

CanonicalForm canonical_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Largest AR root modulus (companion eigenvalues of a).
double ar_root_radius(const Eigen::VectorXd& a);

// Two-stage least-squares identification (long-AR residuals, then joint
// regression on lagged values and lagged residuals). The series is centered
// by its sample mean, which is stored on the model. Throws
// std::runtime_error when the fitted AR part is not strictly stable or the
// series is too short for the requested order.
ArmaModel identify(const Eigen::VectorXd& w_series, int p);

// Per-simulation filter state; psi(k) summarizes the wind history, and
// C_psi psi(k) reproduces the latest observed deviation exactly.
struct ArmaState {
  Eigen::VectorXd psi;
  long k = 0;
};

ArmaState init_state(const ArmaModel& m, double w_dev0);

// Consumes the next observed deviation, returns the one-step innovation and
// advances the state.
double whiten(ArmaState& st, const ArmaModel& m, double w_dev_next);

// Stacked horizon predictor for the farm: per-turbine models composed
// block-diagonally, then stacked over an N-step horizon.
//   wbar = W_mean psi + w_off + W_noise epsbar
// with W_noise strictly block-lower-triangular (the first predicted step is
// the current wind, which is deterministic given psi). wbar lives in the
// plant's deviation coordinates: psi tracks deviations from each model's own
// mean, and w_off carries the constant gap between that mean and the plant
// operating wind (nonzero for wake-shadowed turbines linearized at the free
// stream).
struct FarmPredictor {
  int N = 0;
  int n_wt = 0;
  std::vector<ArmaModel> models;
  Eigen::MatrixXd A_psi, C_psi; // block-diagonal farm matrices
  Eigen::VectorXd B_psi_flat;   // concatenated per-turbine B columns
  Eigen::MatrixXd B_psi;        // n_psi x n_wt, column per turbine
  Eigen::MatrixXd W_mean;       // (N n_wt) x n_psi
  Eigen::VectorXd w_off;        // N n_wt
  Eigen::MatrixXd W_noise;      // (N n_wt) x (N n_wt)
  int n_psi() const { return static_cast<int>(A_psi.rows()); }
};

// op_wind (one entry per turbine) sets w_off = model mean - operating wind,
// repeated each step; empty means zero offset.
FarmPredictor build_farm_predictor(std::vector<ArmaModel> models, int N,
                                   const Eigen::VectorXd& op_wind = Eigen::VectorXd());

// Mean wind-deviation prediction over the horizon (plant coordinates),
// blocks [w(0|k) .. w(N-1|k)].
Eigen::VectorXd predict(const FarmPredictor& fp, const Eigen::VectorXd& psi);

// Fitted-model file (JSON): per-turbine orders and coefficients plus the
// (w0, TI) scenario key.
void save_arma_models(const std::vector<ArmaModel>& models, double w0, double TI,
                      const std::string& path);
std::vector<ArmaModel> load_arma_models(const std::string& path, double* w0 = nullptr,
                                        double* TI = nullptr);

}  // namespace wfmpc
