#include "wfmpc/arma.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

#include "json_util.hpp"

namespace wfmpc {

CanonicalForm canonical_form(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int p = static_cast<int>(a.size());
  if (p < 1) throw std::invalid_argument("canonical_form: order must be >= 1");
  if (b.size() != p - 1) throw std::invalid_argument("canonical_form: need p-1 MA coefficients");
  CanonicalForm cf;
  cf.A = Eigen::MatrixXd::Zero(p, p);
  cf.A.col(0) = a;
  for (int i = 0; i + 1 < p; ++i) cf.A(i, i + 1) = 1.0;
  cf.B = Eigen::VectorXd::Zero(p);
  cf.B(0) = 1.0;
  if (p > 1) cf.B.tail(p - 1) = b;
  cf.C = Eigen::RowVectorXd::Zero(p);
  cf.C(0) = 1.0;
  return cf;
}

double ar_root_radius(const Eigen::VectorXd& a) {
  const CanonicalForm cf = canonical_form(a, Eigen::VectorXd::Zero(a.size() - 1));
  Eigen::EigenSolver<Eigen::MatrixXd> es(cf.A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

ArmaModel finish_model(Eigen::VectorXd a, Eigen::VectorXd b, double mean) {
  const double radius = ar_root_radius(a);
  if (radius >= 1.0 - 1e-6)
    throw std::runtime_error(
        "identify: AR part is not strictly stable (root radius " + std::to_string(radius) +
        "); the series looks non-stationary, detrend or difference it first");
  ArmaModel m;
  m.p = static_cast<int>(a.size());
  m.a = std::move(a);
  m.b = std::move(b);
  m.mean = mean;
  const CanonicalForm cf = canonical_form(m.a, m.b);
  m.A_psi = cf.A;
  m.B_psi = cf.B;
  m.C_psi = cf.C;
  return m;
}

}  // namespace

ArmaModel identify(const Eigen::VectorXd& w_series, int p) {
  if (p < 1) throw std::invalid_argument("identify: order must be >= 1");
  const int n = static_cast<int>(w_series.size());
  const double mean = n > 0 ? w_series.mean() : 0.0;
  const Eigen::VectorXd x = w_series.array() - mean;

  // A (numerically) constant series carries no dynamics; the zero model is
  // the exact fit and keeps turbulence-free scenarios usable.
  if (x.squaredNorm() <= 1e-18 * std::max(1, n))
    return finish_model(Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p - 1), mean);

  // Stage 1: long autoregression, residuals stand in for the innovations.
  int L = std::max(10, 2 * p);
  if (L > n / 4) L = n / 4;
  if (L < p || n - (L + p) < std::max(20, 4 * p))
    throw std::runtime_error("identify: series too short for order " + std::to_string(p));
  const int rows1 = n - L;
  Eigen::MatrixXd X1(rows1, L);
  Eigen::VectorXd y1(rows1);
  for (int t = L; t < n; ++t) {
    for (int l = 1; l <= L; ++l) X1(t - L, l - 1) = x(t - l);
    y1(t - L) = x(t);
  }
  const Eigen::VectorXd phi = X1.colPivHouseholderQr().solve(y1);
  Eigen::VectorXd eps_hat = Eigen::VectorXd::Zero(n);
  for (int t = L; t < n; ++t) eps_hat(t) = y1(t - L) - X1.row(t - L).dot(phi);

  if (p == 1) {
    // Pure AR(1): a single regression suffices.
    const int t0 = L + p;
    double num = 0.0, den = 0.0;
    for (int t = t0; t < n; ++t) {
      num += x(t) * x(t - 1);
      den += x(t - 1) * x(t - 1);
    }
    if (den <= 0.0) throw std::runtime_error("identify: degenerate series");
    Eigen::VectorXd a(1);
    a(0) = num / den;
    return finish_model(a, Eigen::VectorXd(0), mean);
  }

  // Stage 2: joint regression on lagged values and lagged stage-1 residuals.
  const int t0 = L + p;
  const int rows2 = n - t0;
  const int q = p - 1;
  Eigen::MatrixXd X2(rows2, p + q);
  Eigen::VectorXd y2(rows2);
  for (int t = t0; t < n; ++t) {
    for (int l = 1; l <= p; ++l) X2(t - t0, l - 1) = x(t - l);
    for (int j = 1; j <= q; ++j) X2(t - t0, p + j - 1) = eps_hat(t - j);
    y2(t - t0) = x(t);
  }
  const Eigen::VectorXd theta = X2.colPivHouseholderQr().solve(y2);
  return finish_model(theta.head(p), theta.tail(q), mean);
}

ArmaState init_state(const ArmaModel& m, double w_dev0) {
  ArmaState st;
  st.psi = Eigen::VectorXd::Zero(m.p);
  st.psi(0) = w_dev0;
  st.k = 0;
  return st;
}

double whiten(ArmaState& st, const ArmaModel& m, double w_dev_next) {
  if (st.psi.size() != m.p) throw std::invalid_argument("whiten: state/model order mismatch");
  const double pred = m.C_psi * m.A_psi * st.psi;
  const double eps = w_dev_next - pred;
  st.psi = m.A_psi * st.psi + m.B_psi * eps;
  st.k += 1;
  return eps;
}

FarmPredictor build_farm_predictor(std::vector<ArmaModel> models, int N,
                                   const Eigen::VectorXd& op_wind) {
  if (models.empty()) throw std::invalid_argument("build_farm_predictor: no models");
  if (N < 1) throw std::invalid_argument("build_farm_predictor: horizon must be >= 1");
  if (op_wind.size() != 0 && op_wind.size() != static_cast<Eigen::Index>(models.size()))
    throw std::invalid_argument("build_farm_predictor: op_wind size mismatch");
  FarmPredictor fp;
  fp.N = N;
  fp.n_wt = static_cast<int>(models.size());
  int n_psi = 0;
  for (const auto& m : models) n_psi += m.p;

  fp.A_psi = Eigen::MatrixXd::Zero(n_psi, n_psi);
  fp.B_psi = Eigen::MatrixXd::Zero(n_psi, fp.n_wt);
  fp.C_psi = Eigen::MatrixXd::Zero(fp.n_wt, n_psi);
  fp.B_psi_flat = Eigen::VectorXd::Zero(n_psi);
  int off = 0;
  for (int i = 0; i < fp.n_wt; ++i) {
    const auto& m = models[i];
    fp.A_psi.block(off, off, m.p, m.p) = m.A_psi;
    fp.B_psi.block(off, i, m.p, 1) = m.B_psi;
    fp.B_psi_flat.segment(off, m.p) = m.B_psi;
    fp.C_psi.block(i, off, 1, m.p) = m.C_psi;
    off += m.p;
  }

  // W_mean block t = C A^t; W_noise block (t, s) = C A^{t-1-s} B for s < t.
  fp.W_mean.resize(N * fp.n_wt, n_psi);
  fp.W_noise = Eigen::MatrixXd::Zero(N * fp.n_wt, N * fp.n_wt);
  std::vector<Eigen::MatrixXd> powers(N);
  powers[0] = Eigen::MatrixXd::Identity(n_psi, n_psi);
  for (int t = 1; t < N; ++t) powers[t] = fp.A_psi * powers[t - 1];
  for (int t = 0; t < N; ++t) {
    fp.W_mean.middleRows(t * fp.n_wt, fp.n_wt) = fp.C_psi * powers[t];
    for (int s = 0; s < t; ++s)
      fp.W_noise.block(t * fp.n_wt, s * fp.n_wt, fp.n_wt, fp.n_wt) =
          fp.C_psi * powers[t - 1 - s] * fp.B_psi;
  }
  fp.w_off = Eigen::VectorXd::Zero(N * fp.n_wt);
  if (op_wind.size() != 0)
    for (int t = 0; t < N; ++t)
      for (int i = 0; i < fp.n_wt; ++i) fp.w_off(t * fp.n_wt + i) = models[i].mean - op_wind(i);
  fp.models = std::move(models);
  return fp;
}

Eigen::VectorXd predict(const FarmPredictor& fp, const Eigen::VectorXd& psi) {
  if (psi.size() != fp.n_psi()) throw std::invalid_argument("predict: psi dimension mismatch");
  return fp.W_mean * psi + fp.w_off;
}

void save_arma_models(const std::vector<ArmaModel>& models, double w0, double TI,
                      const std::string& path) {
  using detail::json;
  json j;
  j["scenario"] = {{"w0", w0}, {"TI", TI}};
  json ts = json::array();
  for (const auto& m : models) {
    json t;
    t["p"] = m.p;
    t["a"] = detail::vector_to_json(m.a);
    t["b"] = detail::vector_to_json(m.b);
    t["mean"] = m.mean;
    ts.push_back(t);
  }
  j["turbines"] = ts;
  detail::save_json_file(j, path);
}

std::vector<ArmaModel> load_arma_models(const std::string& path, double* w0, double* TI) {
  using detail::json;
  json j = detail::load_json_file(path);
  if (w0) *w0 = j.contains("scenario") ? j["scenario"].value("w0", 0.0) : 0.0;
  if (TI) *TI = j.contains("scenario") ? j["scenario"].value("TI", 0.0) : 0.0;
  std::vector<ArmaModel> out;
  for (const auto& t : j.at("turbines")) {
    const Eigen::VectorXd a = detail::vector_from_json(t.at("a"));
    const Eigen::VectorXd b = detail::vector_from_json(t.at("b"));
    const int p = t.value("p", static_cast<int>(a.size()));
    if (p != static_cast<int>(a.size()) || b.size() != p - 1)
      throw std::runtime_error(path + ": inconsistent ARMA orders");
    const double radius = ar_root_radius(a);
    if (radius >= 1.0 - 1e-6)
      throw std::runtime_error(path + ": stored AR part is not strictly stable");
    ArmaModel m;
    m.p = p;
    m.a = a;
    m.b = b;
    m.mean = t.value("mean", 0.0);
    const CanonicalForm cf = canonical_form(a, b);
    m.A_psi = cf.A;
    m.B_psi = cf.B;
    m.C_psi = cf.C;
    out.push_back(std::move(m));
  }
  if (out.empty()) throw std::runtime_error(path + ": no turbine models");
  return out;
}

}  // namespace wfmpc
