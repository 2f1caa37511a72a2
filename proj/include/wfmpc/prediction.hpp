#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wfmpc/arma.hpp"
#include "wfmpc/farm_model.hpp"

namespace wfmpc {

// Horizon-stacked matrices over N steps. States stack to N+1 blocks
// (x_0 .. x_N); inputs and disturbances stack to N blocks (u_0 .. u_{N-1}).
// The stacked output rows follow the convention that feedthrough enters one
// block late: Dbar and Fbar carry D, F on the first subdiagonal and have a
// zero first block row, so y_0 = C x_0 and y_t = C x_t + D u_{t-1} + F w_{t-1}.
struct HorizonMatrices {
  int N = 0, nx = 0, nu = 0, ny = 0, nw = 0;
  Eigen::MatrixXd Abar; // (N+1)nx x nx
  Eigen::MatrixXd Bbar; // (N+1)nx x N nu, strictly block-lower-triangular
  Eigen::MatrixXd Ebar; // (N+1)nx x N nw, same structure as Bbar
  Eigen::MatrixXd Cbar; // (N+1)ny x (N+1)nx, block-diagonal
  Eigen::MatrixXd Dbar; // (N+1)ny x N nu
  Eigen::MatrixXd Fbar; // (N+1)ny x N nw
};

HorizonMatrices build_horizon(const FarmModel& m, int N);

// Simplified affine disturbance-feedback policy
//   ubar = vbar + Mbar epsbar
// with Mbar block-Toeplitz and strictly block-lower-triangular: block (t, s)
// equals M_{t-s} for 1 <= t-s <= N-1 and zero otherwise. The same block
// M_b acts on the innovation b steps back regardless of absolute time.
struct SadfPolicy {
  int N = 0, nu = 0, nw = 0;
  Eigen::VectorXd v;              // N nu
  std::vector<Eigen::MatrixXd> M; // N-1 blocks, M[b-1] = M_b (nu x nw)

  Eigen::MatrixXd Mbar() const;   // assembled N nu x N nw matrix
};

SadfPolicy zero_policy(int N, int nu, int nw);

// Stacked input for a concrete innovation realization.
Eigen::VectorXd realized_input(const SadfPolicy& pol, const Eigen::VectorXd& epsbar);

// Affine output prediction ybar = y_tilde + Psi epsbar for the closed policy:
//   y_tilde = Cbar Abar x0 + (Cbar Bbar + Dbar) v + (Cbar Ebar + Fbar) W_mean psi
//   Psi     = (Cbar Bbar + Dbar) Mbar + (Cbar Ebar + Fbar) W_noise
struct OutputPrediction {
  Eigen::VectorXd y_tilde; // (N+1) ny
  Eigen::MatrixXd Psi;     // (N+1)ny x N nw
};

OutputPrediction build_output_prediction(const HorizonMatrices& hm, const FarmPredictor& fp,
                                         const SadfPolicy& pol, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& psi);

// Nominal state trajectory zbar = Abar x0 + Bbar v + Ebar W_mean psi.
Eigen::VectorXd nominal_states(const HorizonMatrices& hm, const FarmPredictor& fp,
                               const SadfPolicy& pol, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& psi);

}  // namespace wfmpc
