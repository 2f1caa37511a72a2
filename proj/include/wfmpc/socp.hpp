#pragma once

#include <Eigen/Dense>
#include <vector>

namespace wfmpc::socp {

// One second-order-cone constraint ||G x + h||_2 <= c^T x + d.
struct SocConstraint {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  double d = 0.0;
};

// minimize 0.5 x^T P x + q^T x + c0
// s.t.     A x = b, cones, lb <= x <= ub
// P must be symmetric positive semidefinite. Bound vectors may be empty
// (no bounds) or carry +-infinity entries.
struct Problem {
  int n = 0;
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  double c0 = 0.0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<SocConstraint> cones;
  Eigen::VectorXd lb, ub;
};

enum class Status { optimal, infeasible, numerical_failure };

struct Solution {
  Status status = Status::numerical_failure;
  Eigen::VectorXd x;
  double objective = 0.0;
  // max of: equality residual (inf norm), stationarity residual against
  // best-fit nonnegative multipliers on the active constraints, and the
  // final duality gap.
  double kkt_residual = 0.0;
  int newton_iters = 0;
};

struct SolverSettings {
  double gap_tol = 1e-10;      // target duality gap of the barrier path
  double newton_tol = 1e-11;   // centering stop: half squared Newton decrement
  // Intermediate centerings along the path stop at this (looser) decrement:
  // they only have to stay inside the quadratic-convergence region of the
  // next barrier subproblem. The final centering uses newton_tol.
  double center_tol = 1e-4;
  // Line searches stop resolving decreases once t*f differences fall below
  // floating noise; a stall with half squared decrement below this bound is
  // treated as centered rather than failed.
  double stall_tol = 1e-6;
  double mu = 30.0;            // barrier parameter growth per outer step
  int max_newton = 600;        // total Newton iteration budget
  double feas_margin = 1e-9;   // strictness margin for Phase I
};

// Backend interface so callers can swap the optimizer (or inject failures
// in tests).
class SolverBackend {
public:
  virtual ~SolverBackend() = default;
  virtual Solution solve(const Problem& prob,
                         const Eigen::VectorXd* warm_start = nullptr) = 0;
};

// Primal log-barrier path-following solver. Equality constraints are
// eliminated through an orthonormal nullspace basis (QR of A^T); each
// centering problem is solved by damped Newton with backtracking line
// search. Fully deterministic: fixed iteration rules, no randomization.
// A Phase-I pass (minimizing the maximum constraint violation) runs when
// no strictly feasible start is available; its optimum decides
// infeasibility.
class BarrierSolver : public SolverBackend {
public:
  explicit BarrierSolver(SolverSettings s = {}) : st_(s) {}
  Solution solve(const Problem& prob,
                 const Eigen::VectorXd* warm_start = nullptr) override;

private:
  SolverSettings st_;
};

}  // namespace wfmpc::socp
