#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "wfmpc/ambiguity.hpp"
#include "wfmpc/arma.hpp"
#include "wfmpc/farm_model.hpp"
#include "wfmpc/prediction.hpp"
#include "wfmpc/socp.hpp"

namespace wfmpc {

// Normalized per-step input constraints l_j^T u_t <= 1 (rows of L), each
// required to hold with probability at least p under the ambiguity set.
struct InputConstraintSet {
  Eigen::MatrixXd L; // s x nu
  double p = 0.9;
  bool strict_m_row_sums = false; // additionally zero-sum the feedback blocks
};

// Symmetric +-magnitude bounds per turbine.
InputConstraintSet box_constraints(int n_wt, double magnitude_w, double p);

struct DrmpcWeights {
  double r = 500.0;             // scalar input weight
  double lambda_penalty = 5.0;  // weight on the interpolation variable
};

// Output weight (N+1 blocks): per turbine diag(1/(F_t0^2 N), 100/(T_s0^2 N))
// from its operating point. Input weight (N blocks): r/(P0^2 N) per entry.
Eigen::VectorXd output_weight_diag(const FarmModel& m, int N);
Eigen::VectorXd input_weight_diag(const FarmModel& m, int N, double r, double P0);

struct DrmpcConfig {
  int N = 5;
  DrmpcWeights weights;
  InputConstraintSet constraints;
  double P0 = 5.0e6; // scaling base for inputs [W]
  socp::SolverSettings solver;
};

// Precomputed assembly context: horizon stacks, predictor maps, worst-case
// covariance, weights, and the decision-vector layout
//   theta = [ v / P0 ; vec(M_1)/P0 ; ... ; vec(M_{N-1})/P0 ; lambda ].
struct AssemblyData {
  HorizonMatrices hm;
  FarmPredictor fp;
  WorstCaseCov wcc;
  InputConstraintSet cons;
  Eigen::VectorXd Qy_diag;  // (N+1) ny
  Eigen::VectorXd Ru_diag;  // N nu
  double lambda_penalty = 5.0;
  double P0 = 5.0e6;
  double kappa = 0.0;

  Eigen::MatrixXd Su;     // Cbar Bbar + Dbar
  Eigen::MatrixXd Sw;     // Cbar Ebar + Fbar
  Eigen::MatrixXd Psi_c;  // Sw * W_noise (noise-to-output map at Mbar = 0)
  Eigen::MatrixXd K_qsu;  // Su^T diag(Qy) Su
  Eigen::MatrixXd W2;     // Su^T diag(Qy) Psi_c diag(stacked_diag)

  int n_v() const { return hm.N * hm.nu; }
  int n_m() const { return (hm.N - 1) * hm.nu * hm.nw; }
  int dim() const { return n_v() + n_m() + 1; }
  int m_index(int b, int r, int c) const; // theta index of M_b(r, c)
  int lambda_index() const { return dim() - 1; }
};

AssemblyData make_assembly(const FarmModel& m, const FarmPredictor& fp,
                           const AmbiguitySet& amb, const DrmpcConfig& cfg);

SadfPolicy unpack_policy(const AssemblyData& ad, const Eigen::VectorXd& theta);
Eigen::VectorXd pack_policy(const AssemblyData& ad, const SadfPolicy& pol, double lambda);

// Exact expansion of the worst-case expected cost
//   y~^T Qy y~ + v^T Ru v + tr(Cov [Psi^T Qy Psi + Mbar^T Ru Mbar])
//   + lambda_penalty lambda^2
// as 0.5 theta^T P theta + q^T theta + c0. x is the measured state; z_prev
// the interpolation anchor z*_{1|k-1} (nullptr fixes lambda = 0).
struct CostData {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double c0 = 0.0;
};

CostData build_cost(const AssemblyData& ad, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& psi, const Eigen::VectorXd* z_prev);

// Chance constraints as second-order cones in theta:
//   l_j^T v_t + sqrt(p/(1-p)) || Cov^{1/2} Mbar^T l_{t,j} || <= 1.
std::vector<socp::SocConstraint> build_chance_constraints(const AssemblyData& ad);

// Per-step sum-zero rows (and the strict feedback row sums / fixed lambda
// when applicable).
struct EqualityData {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

EqualityData build_equalities(const AssemblyData& ad, bool lambda_free);

// Full program for one control step. Throws std::invalid_argument when
// z_prev is missing for a step that interpolates (lambda free).
socp::Problem assemble_program(const AssemblyData& ad, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& psi, const Eigen::VectorXd* z_prev,
                               bool lambda_free);

// Error-feedback form of the policy: ubar = Kbar xbar + gbar with Kbar
// strictly causal (block-lower-triangular in the state index, zero last
// block column). Built from the disturbance-feedback policy through the
// causal left inverse of Ebar.
struct ErrorFeedback {
  Eigen::MatrixXd K; // N nu x (N+1) nx
  Eigen::VectorXd g; // N nu
};

ErrorFeedback error_feedback(const FarmModel& m, const HorizonMatrices& hm,
                             const SadfPolicy& pol, const Eigen::VectorXd& z0);

// Shifted previous policy: drop the first block of v, append a zero block;
// shift the feedback bands down (M'_b = M_b for b < N-1, M'_{N-1} = 0).
SadfPolicy fallback(const SadfPolicy& prev);

struct StepResult {
  SadfPolicy policy;
  double lambda = 0.0;
  double objective = 0.0;
  bool fallback_used = false;
  socp::Status status = socp::Status::numerical_failure;
  double kkt_residual = 0.0;
  int newton_iters = 0;
  Eigen::VectorXd z0;     // x_{0|k} after interpolation
  Eigen::VectorXd z_next; // z*_{1|k}
  Eigen::VectorXd u_dev;  // applied input deviation
};

// Receding-horizon controller. apply() returns absolute power references.
// Deterministic: identical (state, psi) sequences give identical outputs.
class DrmpcController {
public:
  DrmpcController(FarmModel model, FarmPredictor pred, AmbiguitySet amb, DrmpcConfig cfg,
                  std::shared_ptr<socp::SolverBackend> backend = nullptr);

  Eigen::VectorXd apply(const Eigen::VectorXd& x, const Eigen::VectorXd& psi);

  const StepResult& last() const { return last_; }
  const AssemblyData& assembly() const { return ad_; }
  const FarmModel& model() const { return model_; }
  long step_count() const { return k_; }
  void reset();

private:
  FarmModel model_;
  AmbiguitySet amb_;
  DrmpcConfig cfg_;
  AssemblyData ad_;
  std::shared_ptr<socp::SolverBackend> backend_;
  StepResult last_;
  std::optional<SadfPolicy> prev_policy_;
  Eigen::VectorXd z_prev_; // z*_{1|k-1}
  long k_ = 0;
};

}  // namespace wfmpc
