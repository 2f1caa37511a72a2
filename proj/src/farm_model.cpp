#include "wfmpc/farm_model.hpp"

#include <stdexcept>

#include "json_util.hpp"
#include "wfmpc/surrogate.hpp"

namespace wfmpc {

namespace {

void check_turbine(const TurbineLti& t, int idx) {
  const auto nx = t.A.rows();
  if (t.A.cols() != nx) throw std::invalid_argument("turbine " + std::to_string(idx) + ": A not square");
  if (t.B.rows() != nx || t.E.rows() != nx)
    throw std::invalid_argument("turbine " + std::to_string(idx) + ": B/E row count != nx");
  if (t.C.cols() != nx) throw std::invalid_argument("turbine " + std::to_string(idx) + ": C col count != nx");
  const auto ny = t.C.rows();
  if (t.D.rows() != ny || t.F.rows() != ny)
    throw std::invalid_argument("turbine " + std::to_string(idx) + ": D/F row count != ny");
  if (t.D.cols() != t.B.cols() || t.F.cols() != t.E.cols())
    throw std::invalid_argument("turbine " + std::to_string(idx) + ": feedthrough col mismatch");
}

// Places src as the next diagonal block, growing dst.
void blkdiag_append(Eigen::MatrixXd& dst, const Eigen::MatrixXd& src) {
  const auto r = dst.rows(), c = dst.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r + src.rows(), c + src.cols());
  out.topLeftCorner(r, c) = dst;
  out.bottomRightCorner(src.rows(), src.cols()) = src;
  dst = std::move(out);
}

}  // namespace

FarmModel stack_farm(std::vector<TurbineLti> turbines, double dt) {
  if (turbines.empty()) throw std::invalid_argument("stack_farm: no turbines");
  if (!(dt > 0.0)) throw std::invalid_argument("stack_farm: dt must be positive");
  FarmModel m;
  m.dt = dt;
  m.A.resize(0, 0); m.B.resize(0, 0); m.C.resize(0, 0);
  m.D.resize(0, 0); m.E.resize(0, 0); m.F.resize(0, 0);
  for (std::size_t i = 0; i < turbines.size(); ++i) {
    check_turbine(turbines[i], static_cast<int>(i));
    blkdiag_append(m.A, turbines[i].A);
    blkdiag_append(m.B, turbines[i].B);
    blkdiag_append(m.C, turbines[i].C);
    blkdiag_append(m.D, turbines[i].D);
    blkdiag_append(m.E, turbines[i].E);
    blkdiag_append(m.F, turbines[i].F);
  }
  m.turbines = std::move(turbines);
  return m;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> step(const FarmModel& m,
                                                 const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& u,
                                                 const Eigen::VectorXd& w) {
  if (x.size() != m.nx() || u.size() != m.nu() || w.size() != m.nw())
    throw std::invalid_argument("step: dimension mismatch");
  Eigen::VectorXd xn = m.A * x + m.B * u + m.E * w;
  Eigen::VectorXd y = m.C * x + m.D * u + m.F * w;
  return {std::move(xn), std::move(y)};
}

FarmModel load_farm_model(const std::string& path) {
  using detail::json;
  json j = detail::load_json_file(path);
  const double dt = j.value("dt", 1.0);
  if (!j.contains("turbines") || !j["turbines"].is_array() || j["turbines"].empty())
    throw std::runtime_error(path + ": missing turbines array");
  std::vector<TurbineLti> turbines;
  for (const auto& tj : j["turbines"]) {
    if (tj.contains("params")) {
      SurrogateParams p;
      const auto& pj = tj["params"];
      p.rho = pj.value("rho", p.rho);
      p.R = pj.value("R", p.R);
      p.J = pj.value("J", p.J);
      p.gear_ratio = pj.value("gear_ratio", p.gear_ratio);
      p.tau_beta = pj.value("tau_beta", p.tau_beta);
      p.tau_filter = pj.value("tau_filter", p.tau_filter);
      p.k_pitch = pj.value("k_pitch", p.k_pitch);
      p.thrust_gain = pj.value("thrust_gain", p.thrust_gain);
      p.thrust_offset = pj.value("thrust_offset", p.thrust_offset);
      p.omega_r_rated = pj.value("omega_r_rated", p.omega_r_rated);
      p.cut_in = pj.value("cut_in", p.cut_in);
      turbines.push_back(default_turbine(p, tj.at("w0").get<double>(),
                                         tj.at("P_wt0").get<double>(), dt));
    } else {
      TurbineLti t;
      t.A = detail::matrix_from_json(tj.at("A"));
      t.B = detail::matrix_from_json(tj.at("B"));
      t.C = detail::matrix_from_json(tj.at("C"));
      t.D = detail::matrix_from_json(tj.at("D"));
      t.E = detail::matrix_from_json(tj.at("E"));
      t.F = detail::matrix_from_json(tj.at("F"));
      const auto& oj = tj.at("operating_point");
      t.op.w0 = oj.value("w0", 0.0);
      t.op.P_wt0 = oj.value("P_wt0", 0.0);
      t.op.beta0 = oj.value("beta0", 0.0);
      t.op.omega_r0 = oj.value("omega_r0", 0.0);
      t.op.omega_g0 = oj.value("omega_g0", 0.0);
      t.op.F_t0 = oj.value("F_t0", 0.0);
      t.op.T_s0 = oj.value("T_s0", 0.0);
      turbines.push_back(std::move(t));
    }
  }
  int n_wt = j.value("n_wt", static_cast<int>(turbines.size()));
  if (n_wt > static_cast<int>(turbines.size()) && turbines.size() == 1)
    turbines.resize(n_wt, turbines[0]);
  if (n_wt != static_cast<int>(turbines.size()))
    throw std::runtime_error(path + ": n_wt inconsistent with turbines array");
  return stack_farm(std::move(turbines), dt);
}

void save_farm_model(const FarmModel& m, const std::string& path) {
  using detail::json;
  json j;
  j["dt"] = m.dt;
  j["n_wt"] = m.n_wt();
  json ts = json::array();
  for (const auto& t : m.turbines) {
    json tj;
    tj["A"] = detail::matrix_to_json(t.A);
    tj["B"] = detail::matrix_to_json(t.B);
    tj["C"] = detail::matrix_to_json(t.C);
    tj["D"] = detail::matrix_to_json(t.D);
    tj["E"] = detail::matrix_to_json(t.E);
    tj["F"] = detail::matrix_to_json(t.F);
    tj["operating_point"] = {
        {"w0", t.op.w0},           {"P_wt0", t.op.P_wt0},   {"beta0", t.op.beta0},
        {"omega_r0", t.op.omega_r0}, {"omega_g0", t.op.omega_g0}, {"F_t0", t.op.F_t0},
        {"T_s0", t.op.T_s0}};
    ts.push_back(tj);
  }
  j["turbines"] = ts;
  detail::save_json_file(j, path);
}

}  // namespace wfmpc
