#include "wfmpc/drmpc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wfmpc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

InputConstraintSet box_constraints(int n_wt, double magnitude_w, double p) {
  if (!(magnitude_w > 0.0)) throw std::invalid_argument("box_constraints: magnitude must be positive");
  InputConstraintSet s;
  s.L.resize(2 * n_wt, n_wt);
  s.L.topRows(n_wt) = Eigen::MatrixXd::Identity(n_wt, n_wt) / magnitude_w;
  s.L.bottomRows(n_wt) = -Eigen::MatrixXd::Identity(n_wt, n_wt) / magnitude_w;
  s.p = p;
  return s;
}

Eigen::VectorXd output_weight_diag(const FarmModel& m, int N) {
  const int ny = m.ny();
  Eigen::VectorXd block(ny);
  int off = 0;
  for (const auto& t : m.turbines) {
    if (!(t.op.F_t0 > 0.0) || !(t.op.T_s0 > 0.0))
      throw std::invalid_argument("output_weight_diag: operating-point constants missing");
    block(off + 0) = 1.0 / (t.op.F_t0 * t.op.F_t0 * N);
    block(off + 1) = 100.0 / (t.op.T_s0 * t.op.T_s0 * N);
    off += t.ny();
  }
  Eigen::VectorXd d((N + 1) * ny);
  for (int t = 0; t <= N; ++t) d.segment(t * ny, ny) = block;
  return d;
}

Eigen::VectorXd input_weight_diag(const FarmModel& m, int N, double r, double P0) {
  if (r < 0.0) throw std::invalid_argument("input_weight_diag: r must be nonnegative");
  return Eigen::VectorXd::Constant(N * m.nu(), r / (P0 * P0 * N));
}

int AssemblyData::m_index(int b, int r, int c) const {
  return n_v() + (b - 1) * hm.nu * hm.nw + r * hm.nw + c;
}

AssemblyData make_assembly(const FarmModel& m, const FarmPredictor& fp,
                           const AmbiguitySet& amb, const DrmpcConfig& cfg) {
  if (cfg.N < 2) throw std::invalid_argument("make_assembly: horizon must be >= 2");
  if (fp.N != cfg.N) throw std::invalid_argument("make_assembly: predictor horizon mismatch");
  if (fp.n_wt != m.nw()) throw std::invalid_argument("make_assembly: predictor turbine count mismatch");
  if (cfg.constraints.L.cols() != m.nu())
    throw std::invalid_argument("make_assembly: constraint row width != input count");
  if (!(cfg.constraints.p > 0.0 && cfg.constraints.p < 1.0))
    throw std::invalid_argument("make_assembly: probability level must lie in (0,1)");
  if (!(cfg.P0 > 0.0)) throw std::invalid_argument("make_assembly: P0 must be positive");

  AssemblyData ad;
  ad.hm = build_horizon(m, cfg.N);
  ad.fp = fp;
  ad.wcc = worst_case_cov(amb, cfg.N);
  if (ad.wcc.n_wt != m.nw()) throw std::invalid_argument("make_assembly: ambiguity width mismatch");
  ad.cons = cfg.constraints;
  ad.Qy_diag = output_weight_diag(m, cfg.N);
  ad.Ru_diag = input_weight_diag(m, cfg.N, cfg.weights.r, cfg.P0);
  ad.lambda_penalty = cfg.weights.lambda_penalty;
  ad.P0 = cfg.P0;
  ad.kappa = ambiguity_radius(amb);

  ad.Su = ad.hm.Cbar * ad.hm.Bbar + ad.hm.Dbar;
  ad.Sw = ad.hm.Cbar * ad.hm.Ebar + ad.hm.Fbar;
  ad.Psi_c = ad.Sw * fp.W_noise;
  ad.K_qsu = ad.Su.transpose() * ad.Qy_diag.asDiagonal() * ad.Su;
  ad.W2 = ad.Su.transpose() * ad.Qy_diag.asDiagonal() * ad.Psi_c *
          ad.wcc.stacked_diag.asDiagonal();
  return ad;
}

SadfPolicy unpack_policy(const AssemblyData& ad, const Eigen::VectorXd& theta) {
  if (theta.size() != ad.dim()) throw std::invalid_argument("unpack_policy: dimension mismatch");
  const int N = ad.hm.N, nu = ad.hm.nu, nw = ad.hm.nw;
  SadfPolicy pol = zero_policy(N, nu, nw);
  pol.v = ad.P0 * theta.head(ad.n_v());
  for (int b = 1; b < N; ++b)
    for (int r = 0; r < nu; ++r)
      for (int c = 0; c < nw; ++c)
        pol.M[b - 1](r, c) = ad.P0 * theta(ad.m_index(b, r, c));
  return pol;
}

Eigen::VectorXd pack_policy(const AssemblyData& ad, const SadfPolicy& pol, double lambda) {
  const int N = ad.hm.N, nu = ad.hm.nu, nw = ad.hm.nw;
  if (pol.N != N || pol.nu != nu || pol.nw != nw)
    throw std::invalid_argument("pack_policy: policy dimension mismatch");
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(ad.dim());
  theta.head(ad.n_v()) = pol.v / ad.P0;
  for (int b = 1; b < N; ++b)
    for (int r = 0; r < nu; ++r)
      for (int c = 0; c < nw; ++c)
        theta(ad.m_index(b, r, c)) = pol.M[b - 1](r, c) / ad.P0;
  theta(ad.lambda_index()) = lambda;
  return theta;
}

CostData build_cost(const AssemblyData& ad, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& psi, const Eigen::VectorXd* z_prev) {
  const int N = ad.hm.N, nu = ad.hm.nu, nw = ad.hm.nw;
  const int nv = ad.n_v(), dim = ad.dim(), li = ad.lambda_index();
  if (x.size() != ad.hm.nx) throw std::invalid_argument("build_cost: state dimension mismatch");
  if (psi.size() != ad.fp.n_psi()) throw std::invalid_argument("build_cost: psi dimension mismatch");
  if (z_prev && z_prev->size() != ad.hm.nx)
    throw std::invalid_argument("build_cost: z_prev dimension mismatch");
  const double P0 = ad.P0;
  const auto& Q = ad.Qy_diag;
  const auto& sig = ad.wcc.stacked_diag;

  const Eigen::VectorXd y_base =
      ad.hm.Cbar * (ad.hm.Abar * x) + ad.Sw * predict(ad.fp, psi);
  const Eigen::VectorXd y_lam =
      z_prev ? Eigen::VectorXd(ad.hm.Cbar * (ad.hm.Abar * (*z_prev - x)))
             : Eigen::VectorXd(Eigen::VectorXd::Zero(y_base.size()));

  CostData cd;
  cd.P = Eigen::MatrixXd::Zero(dim, dim);
  cd.q = Eigen::VectorXd::Zero(dim);

  // Nominal-output and input quadratics in (v, lambda).
  cd.P.topLeftCorner(nv, nv) = 2.0 * P0 * P0 * ad.K_qsu;
  cd.P.topLeftCorner(nv, nv).diagonal() += 2.0 * P0 * P0 * ad.Ru_diag;
  const Eigen::VectorXd svql = ad.Su.transpose() * (Q.asDiagonal() * y_lam);
  cd.P.block(0, li, nv, 1) = 2.0 * P0 * svql;
  cd.P.block(li, 0, 1, nv) = (2.0 * P0 * svql).transpose();
  cd.P(li, li) = 2.0 * (y_lam.dot(Q.asDiagonal() * y_lam) + ad.lambda_penalty);
  cd.q.head(nv) = 2.0 * P0 * (ad.Su.transpose() * (Q.asDiagonal() * y_base));
  cd.q(li) = 2.0 * y_base.dot(Q.asDiagonal() * y_lam);

  // Trace terms: quadratic over the feedback blocks. For diagonal noise
  // covariance only matching innovation columns couple:
  //   sum_s K_qsu[(s+b1) nu + r1, (s+b2) nu + r2] * sig[s nw + c]  (c1 == c2 == c).
  Eigen::VectorXd acc(nw);
  for (int b1 = 1; b1 < N; ++b1)
    for (int b2 = 1; b2 < N; ++b2) {
      const int s_max = N - 1 - std::max(b1, b2);
      if (s_max < 0) continue;
      for (int r1 = 0; r1 < nu; ++r1)
        for (int r2 = 0; r2 < nu; ++r2) {
          acc.setZero();
          for (int s = 0; s <= s_max; ++s) {
            const double k = ad.K_qsu((s + b1) * nu + r1, (s + b2) * nu + r2);
            acc += k * sig.segment(s * nw, nw);
          }
          for (int c = 0; c < nw; ++c)
            cd.P(ad.m_index(b1, r1, c), ad.m_index(b2, r2, c)) += 2.0 * P0 * P0 * acc(c);
        }
    }
  // Input-weight trace contribution: diagonal in the feedback coordinates.
  for (int b = 1; b < N; ++b)
    for (int r = 0; r < nu; ++r)
      for (int c = 0; c < nw; ++c) {
        double val = 0.0;
        for (int s = 0; s + b <= N - 1; ++s)
          val += ad.Ru_diag((s + b) * nu + r) * sig(s * nw + c);
        cd.P(ad.m_index(b, r, c), ad.m_index(b, r, c)) += 2.0 * P0 * P0 * val;
      }
  // Cross term between the constant noise path and the feedback blocks.
  for (int b = 1; b < N; ++b)
    for (int r = 0; r < nu; ++r)
      for (int c = 0; c < nw; ++c) {
        double val = 0.0;
        for (int s = 0; s + b <= N - 1; ++s) val += ad.W2((s + b) * nu + r, s * nw + c);
        cd.q(ad.m_index(b, r, c)) = 2.0 * P0 * val;
      }

  double c_psi = 0.0;
  for (int j = 0; j < ad.Psi_c.cols(); ++j)
    c_psi += sig(j) * ad.Psi_c.col(j).dot(Q.asDiagonal() * ad.Psi_c.col(j));
  cd.c0 = y_base.dot(Q.asDiagonal() * y_base) + c_psi;
  return cd;
}

std::vector<socp::SocConstraint> build_chance_constraints(const AssemblyData& ad) {
  const int N = ad.hm.N, nu = ad.hm.nu, nw = ad.hm.nw;
  const int dim = ad.dim();
  const double coef = std::sqrt(ad.cons.p / (1.0 - ad.cons.p));
  const double P0 = ad.P0;
  const auto& sig = ad.wcc.stacked_diag;
  std::vector<socp::SocConstraint> cones;
  cones.reserve(static_cast<std::size_t>(N) * ad.cons.L.rows());
  for (int t = 0; t < N; ++t)
    for (int j = 0; j < ad.cons.L.rows(); ++j) {
      const Eigen::VectorXd l = ad.cons.L.row(j).transpose();
      socp::SocConstraint cn;
      cn.G = Eigen::MatrixXd::Zero(t * nw, dim);
      cn.h = Eigen::VectorXd::Zero(t * nw);
      // Row (s, c) of the norm argument: coef * sqrt(sig) * sum_r M_{t-s}(r,c) l_r.
      for (int s = 0; s < t; ++s) {
        const int b = t - s;
        for (int c = 0; c < nw; ++c) {
          const double scale = coef * std::sqrt(sig(s * nw + c)) * P0;
          for (int r = 0; r < nu; ++r)
            cn.G(s * nw + c, ad.m_index(b, r, c)) = scale * l(r);
        }
      }
      cn.c = Eigen::VectorXd::Zero(dim);
      cn.c.segment(t * nu, nu) = -P0 * l;
      cn.d = 1.0;
      cones.push_back(std::move(cn));
    }
  return cones;
}

EqualityData build_equalities(const AssemblyData& ad, bool /*lambda_free*/) {
  const int N = ad.hm.N, nu = ad.hm.nu, nw = ad.hm.nw;
  const int rows = N + (ad.cons.strict_m_row_sums ? (N - 1) * nw : 0);
  EqualityData eq;
  eq.A = Eigen::MatrixXd::Zero(rows, ad.dim());
  eq.b = Eigen::VectorXd::Zero(rows);
  for (int t = 0; t < N; ++t) eq.A.block(t, t * nu, 1, nu).setOnes();
  if (ad.cons.strict_m_row_sums) {
    int row = N;
    for (int b = 1; b < N; ++b)
      for (int c = 0; c < nw; ++c, ++row)
        for (int r = 0; r < nu; ++r) eq.A(row, ad.m_index(b, r, c)) = 1.0;
  }
  return eq;
}

socp::Problem assemble_program(const AssemblyData& ad, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& psi, const Eigen::VectorXd* z_prev,
                               bool lambda_free) {
  if (lambda_free && z_prev == nullptr)
    throw std::invalid_argument("assemble_program: interpolating step needs the previous plan");
  socp::Problem prob;
  prob.n = ad.dim();
  const CostData cd = build_cost(ad, x, psi, lambda_free ? z_prev : nullptr);
  prob.P = cd.P;
  prob.q = cd.q;
  prob.c0 = cd.c0;
  const EqualityData eq = build_equalities(ad, lambda_free);
  prob.A = eq.A;
  prob.b = eq.b;
  prob.cones = build_chance_constraints(ad);
  prob.lb = Eigen::VectorXd::Constant(prob.n, -kInf);
  prob.ub = Eigen::VectorXd::Constant(prob.n, kInf);
  prob.lb(ad.lambda_index()) = 0.0;
  prob.ub(ad.lambda_index()) = lambda_free ? 1.0 : 0.0;
  return prob;
}

ErrorFeedback error_feedback(const FarmModel& m, const HorizonMatrices& hm,
                             const SadfPolicy& pol, const Eigen::VectorXd& z0) {
  const int N = hm.N, nx = hm.nx, nu = hm.nu, nw = hm.nw;
  if (pol.N != N || pol.nu != nu || pol.nw != nw)
    throw std::invalid_argument("error_feedback: policy dimension mismatch");
  if (z0.size() != nx) throw std::invalid_argument("error_feedback: z0 dimension mismatch");

  // Causal left inverse of Ebar: recovers w_t from (x_t, x_{t+1}) through
  // the per-step least squares E^+ (x_{t+1} - A x_t).
  const Eigen::MatrixXd EtE = m.E.transpose() * m.E;
  Eigen::LLT<Eigen::MatrixXd> llt(EtE);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("error_feedback: disturbance matrix is not full column rank");
  const Eigen::MatrixXd Ep = llt.solve(m.E.transpose());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N * nw, (N + 1) * nx);
  for (int t = 0; t < N; ++t) {
    T.block(t * nw, (t + 1) * nx, nw, nx) = Ep;
    T.block(t * nw, t * nx, nw, nx) = -Ep * m.A;
  }

  const Eigen::MatrixXd Mbar = pol.Mbar();
  const Eigen::MatrixXd MT = Mbar * T;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N * nu, N * nu);
  // I + Mbar T Bbar is unit lower triangular, hence invertible.
  const Eigen::MatrixXd W = I + MT * hm.Bbar;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
  ErrorFeedback ef;
  ef.K = lu.solve(MT);
  ef.g = lu.solve(pol.v - MT * (hm.Abar * z0));
  // The gain is strictly causal and its first block row vanishes (the first
  // feedback band acts one step back); pin those blocks to exact zeros
  // instead of leaving solve roundoff in them.
  for (int t = 0; t < N; ++t)
    ef.K.block(t * nu, (t + 1) * nx, nu, (N - t) * nx).setZero();
  ef.K.topRows(nu).setZero();
  return ef;
}

SadfPolicy fallback(const SadfPolicy& prev) {
  SadfPolicy out = zero_policy(prev.N, prev.nu, prev.nw);
  for (int t = 0; t + 1 < prev.N; ++t)
    out.v.segment(t * prev.nu, prev.nu) = prev.v.segment((t + 1) * prev.nu, prev.nu);
  for (int b = 1; b + 1 < prev.N; ++b) out.M[b - 1] = prev.M[b - 1];
  return out;
}

DrmpcController::DrmpcController(FarmModel model, FarmPredictor pred, AmbiguitySet amb,
                                 DrmpcConfig cfg, std::shared_ptr<socp::SolverBackend> backend)
    : model_(std::move(model)), amb_(std::move(amb)), cfg_(std::move(cfg)) {
  ad_ = make_assembly(model_, pred, amb_, cfg_);
  backend_ = backend ? std::move(backend)
                     : std::make_shared<socp::BarrierSolver>(cfg_.solver);
}

void DrmpcController::reset() {
  prev_policy_.reset();
  z_prev_.resize(0);
  k_ = 0;
  last_ = StepResult{};
}

Eigen::VectorXd DrmpcController::apply(const Eigen::VectorXd& x, const Eigen::VectorXd& psi) {
  if (x.size() != model_.nx()) throw std::invalid_argument("apply: state dimension mismatch");
  if (psi.size() != ad_.fp.n_psi()) throw std::invalid_argument("apply: psi dimension mismatch");
  const bool lambda_free = prev_policy_.has_value();
  const socp::Problem prob =
      assemble_program(ad_, x, psi, lambda_free ? &z_prev_ : nullptr, lambda_free);

  // Warm start: shifted previous policy (feasible for symmetric constraint
  // sets), or the zero policy; lambda starts at the interior midpoint.
  Eigen::VectorXd ws;
  if (prev_policy_) {
    ws = pack_policy(ad_, fallback(*prev_policy_), 0.5);
  } else {
    ws = Eigen::VectorXd::Zero(ad_.dim());
  }
  const socp::Solution sol = backend_->solve(prob, &ws);

  StepResult res;
  res.status = sol.status;
  res.kkt_residual = sol.kkt_residual;
  res.newton_iters = sol.newton_iters;
  if (sol.status == socp::Status::optimal) {
    res.policy = unpack_policy(ad_, sol.x);
    res.lambda = lambda_free ? sol.x(ad_.lambda_index()) : 0.0;
    res.objective = sol.objective;
    res.fallback_used = false;
  } else {
    // Numerical failure: reuse the shifted previous plan (asserted feasible
    // for the shipped symmetric constraints); without one, hold the nominal
    // point.
    res.policy = prev_policy_ ? fallback(*prev_policy_)
                              : zero_policy(ad_.hm.N, ad_.hm.nu, ad_.hm.nw);
    res.lambda = lambda_free ? 1.0 : 0.0;
    const CostData cd = build_cost(ad_, x, psi, lambda_free ? &z_prev_ : nullptr);
    const Eigen::VectorXd theta = pack_policy(ad_, res.policy, res.lambda);
    res.objective = 0.5 * theta.dot(cd.P * theta) + cd.q.dot(theta) + cd.c0;
    res.fallback_used = true;
  }

  res.z0 = lambda_free ? Eigen::VectorXd((1.0 - res.lambda) * x + res.lambda * z_prev_)
                       : x;
  const Eigen::VectorXd zbar = nominal_states(ad_.hm, ad_.fp, res.policy, res.z0, psi);
  res.z_next = zbar.segment(ad_.hm.nx, ad_.hm.nx);
  res.u_dev = res.policy.v.head(ad_.hm.nu);

  prev_policy_ = res.policy;
  z_prev_ = res.z_next;
  last_ = res;
  ++k_;

  Eigen::VectorXd refs(model_.nu());
  int off = 0;
  for (const auto& t : model_.turbines) {
    refs.segment(off, t.nu()).setConstant(t.op.P_wt0);
    off += t.nu();
  }
  refs += res.u_dev;
  return refs;
}

}  // namespace wfmpc
