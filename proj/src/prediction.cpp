#include "wfmpc/prediction.hpp"

#include <stdexcept>

namespace wfmpc {

HorizonMatrices build_horizon(const FarmModel& m, int N) {
  if (N < 1) throw std::invalid_argument("build_horizon: horizon must be >= 1");
  HorizonMatrices h;
  h.N = N;
  h.nx = m.nx();
  h.nu = m.nu();
  h.ny = m.ny();
  h.nw = m.nw();

  // State powers A^0 .. A^N.
  std::vector<Eigen::MatrixXd> Ap(N + 1);
  Ap[0] = Eigen::MatrixXd::Identity(h.nx, h.nx);
  for (int t = 1; t <= N; ++t) Ap[t] = m.A * Ap[t - 1];

  h.Abar.resize((N + 1) * h.nx, h.nx);
  for (int t = 0; t <= N; ++t) h.Abar.middleRows(t * h.nx, h.nx) = Ap[t];

  h.Bbar = Eigen::MatrixXd::Zero((N + 1) * h.nx, N * h.nu);
  h.Ebar = Eigen::MatrixXd::Zero((N + 1) * h.nx, N * h.nw);
  for (int t = 1; t <= N; ++t)
    for (int s = 0; s < t; ++s) {
      h.Bbar.block(t * h.nx, s * h.nu, h.nx, h.nu) = Ap[t - 1 - s] * m.B;
      h.Ebar.block(t * h.nx, s * h.nw, h.nx, h.nw) = Ap[t - 1 - s] * m.E;
    }

  h.Cbar = Eigen::MatrixXd::Zero((N + 1) * h.ny, (N + 1) * h.nx);
  for (int t = 0; t <= N; ++t) h.Cbar.block(t * h.ny, t * h.nx, h.ny, h.nx) = m.C;

  // Feedthrough one block late: y_t couples to u_{t-1}, w_{t-1}.
  h.Dbar = Eigen::MatrixXd::Zero((N + 1) * h.ny, N * h.nu);
  h.Fbar = Eigen::MatrixXd::Zero((N + 1) * h.ny, N * h.nw);
  for (int t = 1; t <= N; ++t) {
    h.Dbar.block(t * h.ny, (t - 1) * h.nu, h.ny, h.nu) = m.D;
    h.Fbar.block(t * h.ny, (t - 1) * h.nw, h.ny, h.nw) = m.F;
  }
  return h;
}

Eigen::MatrixXd SadfPolicy::Mbar() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N * nu, N * nw);
  for (int t = 0; t < N; ++t)
    for (int s = 0; s < t; ++s) {
      const int b = t - s;
      if (b <= static_cast<int>(M.size()))
        out.block(t * nu, s * nw, nu, nw) = M[b - 1];
    }
  return out;
}

SadfPolicy zero_policy(int N, int nu, int nw) {
  SadfPolicy p;
  p.N = N;
  p.nu = nu;
  p.nw = nw;
  p.v = Eigen::VectorXd::Zero(N * nu);
  p.M.assign(std::max(0, N - 1), Eigen::MatrixXd::Zero(nu, nw));
  return p;
}

Eigen::VectorXd realized_input(const SadfPolicy& pol, const Eigen::VectorXd& epsbar) {
  if (epsbar.size() != pol.N * pol.nw)
    throw std::invalid_argument("realized_input: epsbar dimension mismatch");
  return pol.v + pol.Mbar() * epsbar;
}

namespace {

void check_compat(const HorizonMatrices& hm, const FarmPredictor& fp, const SadfPolicy& pol,
                  const Eigen::VectorXd& x0, const Eigen::VectorXd& psi) {
  if (fp.N != hm.N || fp.n_wt != hm.nw)
    throw std::invalid_argument("prediction: predictor/horizon mismatch");
  if (pol.N != hm.N || pol.nu != hm.nu || pol.nw != hm.nw)
    throw std::invalid_argument("prediction: policy dimension mismatch");
  if (x0.size() != hm.nx) throw std::invalid_argument("prediction: x0 dimension mismatch");
  if (psi.size() != fp.n_psi()) throw std::invalid_argument("prediction: psi dimension mismatch");
}

}  // namespace

OutputPrediction build_output_prediction(const HorizonMatrices& hm, const FarmPredictor& fp,
                                         const SadfPolicy& pol, const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& psi) {
  check_compat(hm, fp, pol, x0, psi);
  const Eigen::MatrixXd Su = hm.Cbar * hm.Bbar + hm.Dbar;
  const Eigen::MatrixXd Sw = hm.Cbar * hm.Ebar + hm.Fbar;
  OutputPrediction p;
  p.y_tilde = hm.Cbar * (hm.Abar * x0) + Su * pol.v + Sw * predict(fp, psi);
  p.Psi = Su * pol.Mbar() + Sw * fp.W_noise;
  return p;
}

Eigen::VectorXd nominal_states(const HorizonMatrices& hm, const FarmPredictor& fp,
                               const SadfPolicy& pol, const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& psi) {
  check_compat(hm, fp, pol, x0, psi);
  return hm.Abar * x0 + hm.Bbar * pol.v + hm.Ebar * predict(fp, psi);
}

}  // namespace wfmpc
