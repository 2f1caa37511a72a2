#include "wfmpc/sim.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace wfmpc {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct LoopState {
  SimTrace tr;
  Eigen::VectorXd x;
  Eigen::VectorXd w_op;   // per-turbine operating wind
  Eigen::VectorXd p_ref0; // per-turbine nominal reference
  double alpha = 0.0;     // power-tracking pole
};

LoopState init_loop(const FarmModel& m, const WindTrace& wind, const PowerTracking& pt) {
  const int T = static_cast<int>(wind.w.rows());
  const int n = m.n_wt();
  if (wind.w.cols() != n) throw std::invalid_argument("sim: wind trace width != turbine count");
  if (m.nu() != n || m.nw() != n)
    throw std::invalid_argument("sim: expected one input and one wind channel per turbine");
  LoopState ls;
  ls.tr.wind = wind;
  ls.tr.x.resize(T, m.nx());
  ls.tr.u.resize(T, n);
  ls.tr.P_out.resize(T, n);
  ls.tr.F_t.resize(T, n);
  ls.tr.T_s.resize(T, n);
  ls.tr.lambda = Eigen::VectorXd::Zero(T);
  ls.tr.solve_ms = Eigen::VectorXd::Zero(T);
  ls.tr.fallback.assign(T, 0);
  ls.tr.dt = m.dt;
  ls.x = Eigen::VectorXd::Zero(m.nx());
  ls.w_op.resize(n);
  ls.p_ref0.resize(n);
  for (int i = 0; i < n; ++i) {
    ls.w_op(i) = m.turbines[i].op.w0;
    ls.p_ref0(i) = m.turbines[i].op.P_wt0;
  }
  ls.tr.P_demand = ls.p_ref0.sum();
  ls.alpha = std::exp(-m.dt / pt.tau);
  return ls;
}

// Records step k given absolute references, advances plant and power states.
void advance(const FarmModel& m, const PowerTracking& pt, LoopState& ls, int k,
             const Eigen::VectorXd& refs) {
  const int n = m.n_wt();
  const Eigen::VectorXd w_abs = ls.tr.wind.w.row(k).transpose();
  const Eigen::VectorXd w_dev = w_abs - ls.w_op;
  const Eigen::VectorXd u_dev = refs - ls.p_ref0;
  ls.tr.x.row(k) = ls.x.transpose();
  ls.tr.u.row(k) = refs.transpose();
  auto [xn, y] = step(m, ls.x, u_dev, w_dev);
  for (int i = 0; i < n; ++i) {
    ls.tr.F_t(k, i) = m.turbines[i].op.F_t0 + y(2 * i + 0);
    ls.tr.T_s(k, i) = m.turbines[i].op.T_s0 + y(2 * i + 1);
    const double target =
        std::min(std::max(refs(i), 0.0), available_power(w_abs(i), pt));
    ls.tr.P_out(k, i) = k == 0 ? target
                               : ls.alpha * ls.tr.P_out(k - 1, i) + (1.0 - ls.alpha) * target;
  }
  ls.x = xn;
}

}  // namespace

double available_power(double w, const PowerTracking& pt) {
  return std::min(pt.P0, 0.5 * kPi * pt.rho * pt.R * pt.R * w * w * w * pt.cp_max);
}

SimTrace run_scheduler(const FarmModel& m, const WindTrace& wind, const PowerTracking& pt) {
  LoopState ls = init_loop(m, wind, pt);
  const int T = static_cast<int>(wind.w.rows());
  for (int k = 0; k < T; ++k) advance(m, pt, ls, k, ls.p_ref0);
  return std::move(ls.tr);
}

SimTrace run_swf_dispatch(const FarmModel& m, const WindTrace& wind, const PowerTracking& pt) {
  LoopState ls = init_loop(m, wind, pt);
  const int T = static_cast<int>(wind.w.rows());
  const int n = m.n_wt();
  Eigen::VectorXd refs(n), avail(n);
  for (int k = 0; k < T; ++k) {
    for (int i = 0; i < n; ++i) avail(i) = available_power(wind.w(k, i), pt);
    const double total = avail.sum();
    for (int i = 0; i < n; ++i) {
      const double share = total > 0.0 ? ls.tr.P_demand * avail(i) / total : 0.0;
      refs(i) = std::max(0.0, std::min(pt.P0, share));
    }
    advance(m, pt, ls, k, refs);
  }
  return std::move(ls.tr);
}

SimTrace run_drmpc(const FarmModel& m, const WindTrace& wind, DrmpcController& ctrl,
                   const PowerTracking& pt) {
  LoopState ls = init_loop(m, wind, pt);
  const int T = static_cast<int>(wind.w.rows());
  const int n = m.n_wt();
  const auto& models = ctrl.assembly().fp.models;
  if (static_cast<int>(models.size()) != n)
    throw std::invalid_argument("run_drmpc: predictor turbine count mismatch");
  ctrl.reset();

  // psi is model-centered; the predictor's constant offset maps it back to
  // plant wind-deviation coordinates.
  std::vector<ArmaState> st(n);
  int n_psi = 0;
  for (int i = 0; i < n; ++i) {
    st[i] = init_state(models[i], wind.w(0, i) - models[i].mean);
    n_psi += models[i].p;
  }
  Eigen::VectorXd psi(n_psi);

  for (int k = 0; k < T; ++k) {
    int off = 0;
    for (int i = 0; i < n; ++i) {
      psi.segment(off, models[i].p) = st[i].psi;
      off += models[i].p;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd refs = ctrl.apply(ls.x, psi);
    const auto t1 = std::chrono::steady_clock::now();
    ls.tr.solve_ms(k) = std::chrono::duration<double, std::milli>(t1 - t0).count();
    ls.tr.lambda(k) = ctrl.last().lambda;
    ls.tr.fallback[k] = ctrl.last().fallback_used ? 1 : 0;
    advance(m, pt, ls, k, refs);
    if (k + 1 < T)
      for (int i = 0; i < n; ++i) whiten(st[i], models[i], wind.w(k + 1, i) - models[i].mean);
  }
  return std::move(ls.tr);
}

}  // namespace wfmpc
