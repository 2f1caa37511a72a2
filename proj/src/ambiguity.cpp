#include "wfmpc/ambiguity.hpp"

#include <cmath>
#include <stdexcept>

#include "json_util.hpp"

namespace wfmpc {

Eigen::VectorXd residual_covariance(const Eigen::MatrixXd& residuals) {
  if (residuals.rows() < 30)
    throw std::invalid_argument("residual_covariance: need >= 30 post-warm-up samples");
  // Residuals are innovations of a zero-mean model; variances are mean
  // squares without re-centering (divisor N_s).
  Eigen::VectorXd v = residuals.array().square().colwise().mean();
  if ((v.array() <= 0.0).any())
    throw std::invalid_argument("residual_covariance: degenerate (zero-variance) residuals");
  return v;
}

double ambiguity_radius(const AmbiguitySet& amb) {
  if (amb.kappa > 0.0) return amb.kappa;
  if (std::abs(1.0 - amb.beta - 0.95) < 1e-12) return 2.36;
  throw std::invalid_argument(
      "ambiguity_radius: no built-in radius for confidence " + std::to_string(1.0 - amb.beta) +
      "; only 0.95 is tabulated, set kappa explicitly otherwise");
}

WorstCaseCov worst_case_cov(const AmbiguitySet& amb, int N) {
  if (N < 1) throw std::invalid_argument("worst_case_cov: horizon must be >= 1");
  if (amb.sigma_diag.size() == 0) throw std::invalid_argument("worst_case_cov: empty covariance");
  if ((amb.sigma_diag.array() < 0.0).any())
    throw std::invalid_argument("worst_case_cov: negative variance entry");
  const double kappa = ambiguity_radius(amb);
  WorstCaseCov wc;
  wc.N = N;
  wc.n_wt = static_cast<int>(amb.sigma_diag.size());
  wc.stacked_diag.resize(N * wc.n_wt);
  for (int t = 0; t < N; ++t)
    wc.stacked_diag.segment(t * wc.n_wt, wc.n_wt) = kappa * amb.sigma_diag;
  return wc;
}

void save_ambiguity(const AmbiguitySet& amb, const std::string& path) {
  using detail::json;
  json j;
  j["w0"] = amb.w0;
  j["TI"] = amb.TI;
  j["beta"] = amb.beta;
  j["N_s"] = amb.N_s;
  if (amb.kappa > 0.0) j["kappa"] = amb.kappa;
  j["sigma_diag"] = detail::vector_to_json(amb.sigma_diag);
  detail::save_json_file(j, path);
}

AmbiguitySet load_ambiguity(const std::string& path) {
  using detail::json;
  json j = detail::load_json_file(path);
  AmbiguitySet amb;
  amb.w0 = j.value("w0", 0.0);
  amb.TI = j.value("TI", 0.0);
  amb.beta = j.value("beta", 0.05);
  amb.N_s = j.value("N_s", 0);
  amb.kappa = j.value("kappa", 0.0);
  amb.sigma_diag = detail::vector_from_json(j.at("sigma_diag"));
  if ((amb.sigma_diag.array() < 0.0).any())
    throw std::runtime_error(path + ": negative variance entry");
  return amb;
}

}  // namespace wfmpc
