#include "wfmpc/wind_sim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wfmpc/csv.hpp"
#include "wfmpc/rng.hpp"

namespace wfmpc {

namespace {

// Stream ids: turbine i draws from stream i (upstream turbulence for i = 0,
// wake-added turbulence otherwise).
Eigen::VectorXd ar1_series(const WindScenario& sc, std::uint64_t stream, double sigma_marginal) {
  Eigen::VectorXd d(sc.T);
  const double phi = sc.turb_corr;
  if (!(phi >= 0.0 && phi < 1.0))
    throw std::invalid_argument("wind: turb_corr must lie in [0, 1)");
  const double sigma_inn = sigma_marginal * std::sqrt(1.0 - phi * phi);
  double v = sigma_marginal * rng_normal(sc.seed, stream, 0); // stationary start
  for (int k = 0; k < sc.T; ++k) {
    d(k) = v;
    v = phi * v + sigma_inn * rng_normal(sc.seed, stream, k + 1);
  }
  return d;
}

double floor_speed(const WindScenario& sc) { return 0.05 * sc.w0; }

}  // namespace

double wake_deficit_factor(const WindScenario& sc) {
  const double ratio = sc.rotor_R / (sc.rotor_R + sc.k_w * sc.spacing);
  return 1.0 - sc.a_w * ratio * ratio;
}

int wake_delay_samples(const WindScenario& sc) {
  return static_cast<int>(std::lround(sc.spacing / (sc.w0 * sc.dt)));
}

Eigen::VectorXd mean_effective_wind(const WindScenario& sc) {
  Eigen::VectorXd m(sc.n_wt);
  const double f = wake_deficit_factor(sc);
  double v = sc.w0;
  for (int i = 0; i < sc.n_wt; ++i) {
    m(i) = v;
    v *= f;
  }
  return m;
}

Eigen::VectorXd generate_free_stream(const WindScenario& sc) {
  if (sc.T <= 0 || sc.n_wt <= 0) throw std::invalid_argument("wind: empty scenario");
  const double fl = floor_speed(sc);
  Eigen::VectorXd w = ar1_series(sc, 0, sc.TI * sc.w0).array() + sc.w0;
  return w.cwiseMax(fl);
}

WindTrace apply_wake(const Eigen::VectorXd& upstream, const WindScenario& sc) {
  if (upstream.size() != sc.T) throw std::invalid_argument("apply_wake: series length != T");
  const int delay = wake_delay_samples(sc);
  if (sc.n_wt > 1 && delay >= sc.T)
    throw std::invalid_argument("apply_wake: advection delay exceeds the trace length");
  const double f = wake_deficit_factor(sc);
  const double fl = floor_speed(sc);
  WindTrace tr;
  tr.scenario = sc;
  tr.w.resize(sc.T, sc.n_wt);
  tr.w.col(0) = upstream;
  for (int i = 1; i < sc.n_wt; ++i) {
    const Eigen::VectorXd extra = ar1_series(sc, static_cast<std::uint64_t>(i),
                                             sc.delta_TI * sc.w0);
    for (int k = 0; k < sc.T; ++k) {
      const int src = k >= delay ? k - delay : 0;
      tr.w(k, i) = std::max(f * tr.w(src, i - 1) + extra(k), fl);
    }
  }
  return tr;
}

WindTrace generate_wind(const WindScenario& sc) {
  return apply_wake(generate_free_stream(sc), sc);
}

void save_wind_csv(const WindTrace& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t";
  for (int i = 0; i < tr.w.cols(); ++i) out << ",w" << (i + 1);
  out << "\n";
  for (Eigen::Index k = 0; k < tr.w.rows(); ++k) {
    out << format_double(static_cast<double>(k) * tr.scenario.dt);
    for (Eigen::Index i = 0; i < tr.w.cols(); ++i) out << "," << format_double(tr.w(k, i));
    out << "\n";
  }
}

WindTrace load_wind_csv(const std::string& path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2) throw std::runtime_error(path + ": empty wind trace");
  const int n_wt = static_cast<int>(rows[0].size()) - 1;
  if (n_wt < 1 || rows[0][0] != "t")
    throw std::runtime_error(path + ": expected header t,w1,...");
  WindTrace tr;
  const int T = static_cast<int>(rows.size()) - 1;
  tr.w.resize(T, n_wt);
  for (int k = 0; k < T; ++k) {
    const auto& r = rows[k + 1];
    if (static_cast<int>(r.size()) != n_wt + 1)
      throw std::runtime_error(path + ": ragged row");
    for (int i = 0; i < n_wt; ++i) tr.w(k, i) = std::stod(r[i + 1]);
  }
  tr.scenario.n_wt = n_wt;
  tr.scenario.T = T;
  if (T >= 2) tr.scenario.dt = std::stod(rows[2][0]) - std::stod(rows[1][0]);
  tr.scenario.w0 = tr.w.col(0).mean();
  return tr;
}

}  // namespace wfmpc
