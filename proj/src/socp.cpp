#include "wfmpc/socp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wfmpc::socp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Problem after equality elimination x = x_p + Z xi, with bound constraints
// folded into one-sided linear inequalities g^T xi <= h.
struct RCone {
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  double d = 0.0;
  Eigen::MatrixXd curv; // G^T G - c c^T, constant part of the barrier Hessian
};

struct RLin {
  Eigen::VectorXd g;
  double h = 0.0;
};

struct Reduced {
  int n = 0;
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  std::vector<RCone> cones;
  std::vector<RLin> lins;
  double mdeg() const { return 2.0 * cones.size() + 1.0 * lins.size(); }
};

struct ConeState {
  Eigen::VectorXd u;
  double z = 0.0, w = 0.0; // w = z^2 - u^T u
};

bool cone_state(const RCone& cn, const Eigen::VectorXd& xi, ConeState& st) {
  st.u = cn.G * xi + cn.h;
  st.z = cn.c.dot(xi) + cn.d;
  st.w = st.z * st.z - st.u.squaredNorm();
  return st.z > 0.0 && st.w > 0.0;
}

bool strictly_feasible(const Reduced& r, const Eigen::VectorXd& xi) {
  ConeState st;
  for (const auto& cn : r.cones)
    if (!cone_state(cn, xi, st)) return false;
  for (const auto& ln : r.lins)
    if (!(r.n == 0 ? ln.h > 0.0 : ln.h - ln.g.dot(xi) > 0.0)) return false;
  return true;
}

// Stationarity certificate at a candidate optimum: the smallest residual of
// grad f + sum mu_i a_i over nonnegative multipliers on the near-active
// constraint gradients. The gradients are evaluated without any 1/slack
// factor, so the certificate is limited by plain evaluation roundoff rather
// than by the cancellation inside nearly active cone residuals (which at the
// final barrier value would drown the true residual by several orders).
double fit_stationarity(const Reduced& r, const Eigen::VectorXd& xi) {
  if (r.n == 0) return 0.0;
  const Eigen::VectorXd gf = r.P * xi + r.q;
  std::vector<Eigen::VectorXd> acts;
  ConeState st;
  for (const auto& cn : r.cones) {
    cone_state(cn, xi, st);
    const double un = st.u.norm();
    if (st.z - un <= 1e-5 * (1.0 + std::abs(st.z)))
      acts.push_back(un > 0.0 ? Eigen::VectorXd(cn.G.transpose() * (st.u / un) - cn.c)
                              : Eigen::VectorXd(-cn.c));
  }
  for (const auto& ln : r.lins)
    if (ln.h - ln.g.dot(xi) <= 1e-5 * (1.0 + std::abs(ln.h))) acts.push_back(ln.g);

  Eigen::VectorXd resid = gf;
  // Nonnegative least squares by deterministic column dropping: refit
  // without the most negative multiplier until none remain.
  std::vector<std::size_t> keep(acts.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  while (!keep.empty()) {
    Eigen::MatrixXd Am(r.n, static_cast<int>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) Am.col(static_cast<int>(i)) = acts[keep[i]];
    const Eigen::VectorXd mu = Am.colPivHouseholderQr().solve(-gf);
    int worst = -1;
    double wv = -1e-12;
    for (int i = 0; i < mu.size(); ++i)
      if (mu(i) < wv) {
        wv = mu(i);
        worst = i;
      }
    if (worst < 0) {
      resid = gf + Am * mu;
      break;
    }
    keep.erase(keep.begin() + worst);
  }
  return resid.cwiseAbs().maxCoeff();
}

enum class CenterOutcome { converged, stalled, failed };

// Scalar restriction of the merit function to the Newton ray: every term is
// quadratic in the step, so one directional pass per iteration makes each
// line-search trial a handful of scalar operations and yields the largest
// feasible step at no extra cost.
struct RayCache {
  double f0 = 0.0, f1 = 0.0, f2 = 0.0; // f(xi + a d) = f0 + f1 a + 1/2 f2 a^2
  // per cone: w(a) = (z0 + a dz)^2 - (a0 + 2 a1 a + a2 a^2), need w > 0, z > 0
  std::vector<std::array<double, 5>> cone; // z0, dz, a0, a1, a2
  std::vector<std::array<double, 2>> lin;  // s0, ds: s(a) = s0 - a ds > 0

  double merit_at(double t, double alpha) const {
    double val = t * (f0 + alpha * (f1 + 0.5 * alpha * f2));
    for (const auto& c : cone) {
      const double z = c[0] + alpha * c[1];
      const double w = z * z - (c[2] + alpha * (2.0 * c[3] + alpha * c[4]));
      if (!(z > 0.0 && w > 0.0)) return kInf;
      val -= std::log(w);
    }
    for (const auto& l : lin) {
      const double s = l[0] - alpha * l[1];
      if (!(s > 0.0)) return kInf;
      val -= std::log(s);
    }
    return val;
  }

  // Largest step keeping every cone and halfspace strictly feasible.
  double max_step() const {
    double amax = kInf;
    for (const auto& c : cone) {
      if (c[1] < 0.0) amax = std::min(amax, -c[0] / c[1]);
      // Roots of w(a) = (dz^2 - a2) a^2 + 2 (z0 dz - a1) a + w0.
      const double A = c[1] * c[1] - c[4];
      const double B = c[0] * c[1] - c[3];
      const double C = c[0] * c[0] - c[2];
      if (std::abs(A) < 1e-300) {
        if (B < 0.0) amax = std::min(amax, -C / (2.0 * B));
        continue;
      }
      const double disc = B * B - A * C;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        // Stable quadratic roots of A a^2 + 2 B a + C = 0.
        const double qn = -(B + (B >= 0.0 ? sq : -sq));
        const double r1 = qn / A, r2 = qn != 0.0 ? C / qn : kInf;
        if (r1 > 0.0) amax = std::min(amax, r1);
        if (r2 > 0.0) amax = std::min(amax, r2);
      }
    }
    for (const auto& l : lin)
      if (l[1] > 0.0) amax = std::min(amax, l[0] / l[1]);
    return amax;
  }
};

// Damped Newton centering of t*f + barrier. A stall (no resolvable merit
// decrease, singular system, or budget exhaustion) with an already-small
// Newton decrement counts as centered to working precision; larger
// decrements make it a failure.
CenterOutcome center(const Reduced& r, double t, Eigen::VectorXd& xi,
                     const SolverSettings& st, double tol, int& iters_left, int max_inner) {
  const int nc = static_cast<int>(r.cones.size());
  std::vector<ConeState> cs(nc);
  Eigen::MatrixXd rank1(r.n, nc); // scaled gvec columns, batched rank update
  Eigen::VectorXd grad(r.n), dxi(r.n), du;
  Eigen::MatrixXd H(r.n, r.n);
  RayCache ray;
  ray.cone.resize(nc);
  ray.lin.resize(r.lins.size());

  double last_dec2 = kInf;
  double last_phi = 0.0;
  double quad_prev = kInf;
  // The merit function carries t*f, so its floating noise floor grows with
  // t; a stall below that floor is indistinguishable from centered.
  const auto stall = [&] {
    const double floor = std::max(st.stall_tol, 1e-13 * std::abs(last_phi));
    return 0.5 * last_dec2 <= floor ? CenterOutcome::stalled : CenterOutcome::failed;
  };

  for (int it = 0; it < max_inner; ++it) {
    if (iters_left <= 0) return stall();
    --iters_left;

    grad.noalias() = t * (r.P * xi + r.q);
    H = t * r.P;
    for (int i = 0; i < nc; ++i) {
      const RCone& cn = r.cones[i];
      if (!cone_state(cn, xi, cs[i])) return CenterOutcome::failed; // left the domain
      const double w = cs[i].w;
      Eigen::VectorXd gvec = cn.G.transpose() * cs[i].u - cs[i].z * cn.c;
      grad += (2.0 / w) * gvec;
      H += (2.0 / w) * cn.curv;
      rank1.col(i) = (2.0 / w) * gvec;
    }
    if (nc > 0) H.noalias() += rank1 * rank1.transpose();
    for (const auto& ln : r.lins) {
      const double s = ln.h - ln.g.dot(xi);
      if (!(s > 0.0)) return CenterOutcome::failed;
      grad += ln.g / s;
      H.noalias() += (ln.g / s) * (ln.g / s).transpose();
    }

    double ridge = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(H);
      if (llt.info() == Eigen::Success) {
        dxi = llt.solve(-grad);
        if (dxi.allFinite()) break;
      }
      if (attempt >= 6) return stall();
      ridge = ridge == 0.0 ? 1e-12 * (1.0 + H.trace() / std::max(1, r.n)) : ridge * 100.0;
      H.diagonal().array() += ridge;
    }

    const double decrement2 = -grad.dot(dxi); // = dxi^T H dxi when H spd
    last_dec2 = decrement2;
    if (0.5 * decrement2 <= tol) return CenterOutcome::converged;

    // Directional coefficients of the merit restriction.
    ray.f0 = 0.5 * xi.dot(r.P * xi) + r.q.dot(xi);
    ray.f1 = (r.P * xi + r.q).dot(dxi);
    ray.f2 = dxi.dot(r.P * dxi);
    for (int i = 0; i < nc; ++i) {
      const RCone& cn = r.cones[i];
      du.noalias() = cn.G * dxi;
      ray.cone[i] = {cs[i].z, cn.c.dot(dxi), cs[i].u.squaredNorm(), cs[i].u.dot(du),
                     du.squaredNorm()};
    }
    for (std::size_t j = 0; j < r.lins.size(); ++j)
      ray.lin[j] = {r.lins[j].h - r.lins[j].g.dot(xi), r.lins[j].g.dot(dxi)};

    double alpha = std::min(1.0, 0.99 * ray.max_step());
    bool stepped = false;
    // Inside the quadratic-convergence region (Newton decrement <= 1/4) the
    // feasibility-capped full step converges on its own; merit differences
    // there sit below the floating noise of t*f, so an Armijo test cannot
    // judge progress. Once the decrement stops contracting the iterate is at
    // its roundoff floor and the centering is as good as it will get.
    if (decrement2 <= 0.0625) {
      if (decrement2 >= 0.9 * quad_prev) return stall();
      quad_prev = decrement2;
      last_phi = t * ray.f0;
      xi += alpha * dxi;
      stepped = true;
    } else {
      const double phi0 = ray.merit_at(t, 0.0);
      last_phi = phi0;
      for (int ls = 0; ls < 60 && alpha > 0.0; ++ls) {
        if (ray.merit_at(t, alpha) <= phi0 - 0.01 * alpha * decrement2) {
          xi += alpha * dxi;
          stepped = true;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (!stepped) return stall();
    if (xi.norm() > 1e13) return CenterOutcome::failed; // runaway: unbounded or badly scaled
  }
  return stall();
}

struct PathResult {
  bool converged = false;
  double t_final = 1.0;
  int iters = 0;
};

// Follows the central path until mdeg / t <= gap_tol. Early-exit predicate
// (used by Phase I) stops as soon as it returns true.
template <typename StopFn>
PathResult follow_path(const Reduced& r, Eigen::VectorXd& xi, const SolverSettings& st,
                       StopFn early_stop) {
  PathResult res;
  int iters_left = st.max_newton;
  const double mdeg = std::max(1.0, r.mdeg());
  double t = 1.0;
  for (int outer = 0; outer < 200; ++outer) {
    // Intermediate centerings only need to land inside the region of
    // quadratic convergence for the next t; only the last one, which fixes
    // the reported iterate, is driven to newton_tol.
    const bool last = mdeg / t <= st.gap_tol;
    const double tol = last ? st.newton_tol : std::max(st.newton_tol, st.center_tol);
    const CenterOutcome co = center(r, t, xi, st, tol, iters_left, 100);
    res.t_final = t;
    res.iters = st.max_newton - iters_left;
    if (co == CenterOutcome::failed) return res;
    if (early_stop(xi) || last) {
      res.converged = true;
      return res;
    }
    if (iters_left <= 0) return res; // budget spent before reaching the gap target
    t *= st.mu;
  }
  return res;
}

}  // namespace

Solution BarrierSolver::solve(const Problem& prob, const Eigen::VectorXd* warm_start) {
  Solution sol;
  const int n = prob.n;
  if (n <= 0 || prob.P.rows() != n || prob.P.cols() != n || prob.q.size() != n)
    throw std::invalid_argument("socp: inconsistent objective dimensions");
  for (const auto& cn : prob.cones)
    if (cn.G.cols() != n || cn.c.size() != n || cn.h.size() != cn.G.rows())
      throw std::invalid_argument("socp: inconsistent cone dimensions");

  // Collect equalities: declared rows plus pinned variables (lb == ub).
  Eigen::MatrixXd A = prob.A.rows() > 0 ? prob.A : Eigen::MatrixXd(0, n);
  Eigen::VectorXd b = prob.b.size() > 0 ? prob.b : Eigen::VectorXd(0);
  if (A.rows() != b.size() || (A.rows() > 0 && A.cols() != n))
    throw std::invalid_argument("socp: inconsistent equality dimensions");
  const bool has_lb = prob.lb.size() == n, has_ub = prob.ub.size() == n;
  auto is_pinned = [&](int j) {
    return has_lb && has_ub && prob.lb(j) == prob.ub(j) && std::isfinite(prob.lb(j));
  };
  std::vector<int> pinned;
  for (int j = 0; j < n; ++j)
    if (is_pinned(j)) pinned.push_back(j);
  if (!pinned.empty()) {
    Eigen::MatrixXd A2(A.rows() + pinned.size(), n);
    Eigen::VectorXd b2(A.rows() + pinned.size());
    A2.topRows(A.rows()) = A;
    b2.head(b.size()) = b;
    for (std::size_t i = 0; i < pinned.size(); ++i) {
      A2.row(A.rows() + i).setZero();
      A2(A.rows() + i, pinned[i]) = 1.0;
      b2(A.rows() + i) = prob.lb(pinned[i]);
    }
    A = std::move(A2);
    b = std::move(b2);
  }

  // Particular solution and nullspace basis.
  Eigen::VectorXd x_p = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(n, n);
  if (A.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    x_p = cod.solve(b);
    if ((A * x_p - b).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) {
      sol.status = Status::infeasible;
      sol.x = x_p;
      return sol;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.transpose());
    const int rank = static_cast<int>(qr.rank());
    const Eigen::MatrixXd Q = qr.householderQ();
    Z = Q.rightCols(n - rank);
  }
  const int nz = static_cast<int>(Z.cols());

  // Reduced problem.
  Reduced r;
  r.n = nz;
  const Eigen::MatrixXd Psym = 0.5 * (prob.P + prob.P.transpose());
  r.P = Z.transpose() * Psym * Z;
  r.q = Z.transpose() * (Psym * x_p + prob.q);
  for (const auto& cn : prob.cones) {
    RCone rc;
    rc.G = cn.G * Z;
    rc.h = cn.G * x_p + cn.h;
    rc.c = Z.transpose() * cn.c;
    rc.d = cn.c.dot(x_p) + cn.d;
    rc.curv = rc.G.transpose() * rc.G - rc.c * rc.c.transpose();
    r.cones.push_back(std::move(rc));
  }
  for (int j = 0; j < n; ++j) {
    if (is_pinned(j)) continue;
    if (has_ub && prob.ub(j) < kInf)
      r.lins.push_back({Z.row(j).transpose(), prob.ub(j) - x_p(j)});
    if (has_lb && prob.lb(j) > -kInf)
      r.lins.push_back({-Z.row(j).transpose(), x_p(j) - prob.lb(j)});
  }

  auto finish = [&](const Eigen::VectorXd& xi, double t_final, int iters, bool converged) {
    sol.x = x_p + Z * xi;
    sol.newton_iters = iters;
    sol.objective = 0.5 * sol.x.dot(Psym * sol.x) + prob.q.dot(sol.x) + prob.c0;
    double r_eq = 0.0;
    if (A.rows() > 0) r_eq = (A * sol.x - b).cwiseAbs().maxCoeff();
    const double r_stat = fit_stationarity(r, xi);
    const double r_gap = r.mdeg() / t_final;
    sol.kkt_residual = std::max({r_eq, r_stat, r_gap});
    sol.status = converged ? Status::optimal : Status::numerical_failure;
  };

  // All variables pinned by equalities: feasibility decides everything.
  if (nz == 0) {
    Eigen::VectorXd xi(0);
    double viol = 0.0;
    ConeState st;
    for (const auto& cn : r.cones) {
      cone_state(cn, xi, st);
      viol = std::max(viol, st.u.norm() - st.z);
    }
    for (const auto& ln : r.lins) viol = std::max(viol, -ln.h);
    if (viol > 1e-9) {
      sol.status = Status::infeasible;
      sol.x = x_p;
      return sol;
    }
    finish(xi, 1.0 / st_.gap_tol, 0, true);
    return sol;
  }

  // Unconstrained (after elimination) quadratic program.
  if (r.cones.empty() && r.lins.empty()) {
    Eigen::MatrixXd H = r.P;
    Eigen::VectorXd xi;
    double ridge = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(H);
      if (llt.info() == Eigen::Success) {
        xi = llt.solve(-r.q);
        if (xi.allFinite()) break;
      }
      if (attempt >= 6) {
        sol.status = Status::numerical_failure;
        sol.x = x_p;
        return sol;
      }
      ridge = ridge == 0.0 ? 1e-12 * (1.0 + H.trace() / nz) : ridge * 100.0;
      H.diagonal().array() += ridge;
    }
    finish(xi, 1.0 / st_.gap_tol, 1, true);
    return sol;
  }

  // Starting point: projected warm start, the particular solution, or Phase I.
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(nz);
  bool have_start = false;
  if (warm_start && warm_start->size() == n) {
    const Eigen::VectorXd xi_ws = Z.transpose() * (*warm_start - x_p);
    if (strictly_feasible(r, xi_ws)) {
      xi = xi_ws;
      have_start = true;
    }
  }
  if (!have_start && strictly_feasible(r, xi)) have_start = true;

  int phase1_iters = 0;
  if (!have_start) {
    // Phase I: minimize the common slack sigma (bounded below at -1; only
    // its sign matters).
    Reduced p1;
    p1.n = nz + 1;
    // Tiny Tikhonov term: the slack objective alone is flat along directions
    // that inflate a cone's interior measure, leaving the barrier subproblems
    // unbounded below. The regularizer bounds them; at this weight it cannot
    // move the sign of the optimal slack for sanely scaled problems.
    p1.P = 1e-8 * Eigen::MatrixXd::Identity(p1.n, p1.n);
    p1.q = Eigen::VectorXd::Zero(p1.n);
    p1.q(nz) = 1.0;
    double worst = 0.0;
    ConeState st;
    for (const auto& cn : r.cones) {
      RCone rc;
      rc.G = Eigen::MatrixXd::Zero(cn.G.rows(), p1.n);
      rc.G.leftCols(nz) = cn.G;
      rc.h = cn.h;
      rc.c = Eigen::VectorXd::Zero(p1.n);
      rc.c.head(nz) = cn.c;
      rc.c(nz) = 1.0;
      rc.d = cn.d;
      rc.curv = rc.G.transpose() * rc.G - rc.c * rc.c.transpose();
      p1.cones.push_back(std::move(rc));
      cone_state(cn, xi, st);
      worst = std::max(worst, st.u.norm() - st.z);
    }
    for (const auto& ln : r.lins) {
      RLin rl;
      rl.g = Eigen::VectorXd::Zero(p1.n);
      rl.g.head(nz) = ln.g;
      rl.g(nz) = -1.0;
      rl.h = ln.h;
      p1.lins.push_back(std::move(rl));
      worst = std::max(worst, -ln.h);
    }
    {
      RLin lb_sigma; // sigma >= -1
      lb_sigma.g = Eigen::VectorXd::Zero(p1.n);
      lb_sigma.g(nz) = -1.0;
      lb_sigma.h = 1.0;
      p1.lins.push_back(std::move(lb_sigma));
    }
    Eigen::VectorXd xi1 = Eigen::VectorXd::Zero(p1.n);
    xi1(nz) = worst + 1.0;
    const double margin = st_.feas_margin;
    const PathResult pr = follow_path(p1, xi1, st_,
                                      [&](const Eigen::VectorXd& v) { return v(nz) < -margin; });
    phase1_iters = pr.iters;
    if (!pr.converged || xi1(nz) >= -margin) {
      sol.status = pr.converged ? Status::infeasible : Status::numerical_failure;
      sol.x = x_p + Z * xi1.head(nz);
      sol.newton_iters = phase1_iters;
      return sol;
    }
    xi = xi1.head(nz);
  }

  const PathResult pr = follow_path(r, xi, st_, [](const Eigen::VectorXd&) { return false; });
  finish(xi, pr.t_final, phase1_iters + pr.iters, pr.converged);
  return sol;
}

}  // namespace wfmpc::socp
