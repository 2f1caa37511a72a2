#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wfmpc/csv.hpp"
#include "wfmpc/wind_sim.hpp"

using namespace wfmpc;

namespace {

double col_mean(const Eigen::MatrixXd& m, int c) { return m.col(c).mean(); }

double col_var(const Eigen::MatrixXd& m, int c) {
  const Eigen::VectorXd d = m.col(c).array() - m.col(c).mean();
  return d.squaredNorm() / static_cast<double>(d.size());
}

// Lag of the maximum cross-correlation between deviations of columns a and b
// (b delayed by `lag` against a), searched over [0, max_lag].
int xcorr_peak(const Eigen::MatrixXd& w, int a, int b, int max_lag) {
  const Eigen::VectorXd da = w.col(a).array() - w.col(a).mean();
  const Eigen::VectorXd db = w.col(b).array() - w.col(b).mean();
  int best = -1;
  double best_val = -1e300;
  const int T = static_cast<int>(w.rows());
  for (int lag = 0; lag <= max_lag; ++lag) {
    const double v = da.head(T - lag).dot(db.tail(T - lag));
    if (v > best_val) {
      best_val = v;
      best = lag;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("free stream: TI = 0 gives the constant mean") {
  WindScenario sc;
  sc.TI = 0.0;
  sc.T = 200;
  const Eigen::VectorXd f = generate_free_stream(sc);
  CHECK((f.array() - sc.w0).abs().maxCoeff() == 0.0);
}

TEST_CASE("free stream: stationary variance matches (TI w0)^2 at 1e5 samples") {
  WindScenario sc;
  sc.T = 100000;
  sc.seed = 3;
  const Eigen::VectorXd f = generate_free_stream(sc);
  const double mean = f.mean();
  const double var = (f.array() - mean).square().sum() / f.size();
  CHECK(var == doctest::Approx(1.44).epsilon(0.05));
  CHECK(mean == doctest::Approx(12.0).epsilon(0.01));
}

TEST_CASE("determinism: identical seeds give identical traces") {
  WindScenario sc;
  sc.T = 500;
  sc.seed = 11;
  const WindTrace a = generate_wind(sc);
  const WindTrace b = generate_wind(sc);
  CHECK((a.w - b.w).norm() == 0.0);
  sc.seed = 12;
  const WindTrace c = generate_wind(sc);
  CHECK((a.w - c.w).norm() != 0.0);
}

TEST_CASE("wake chain: delay arithmetic and the no-wake passthrough") {
  WindScenario sc;
  CHECK(wake_delay_samples(sc) == 33); // round(400 / 12)

  sc.a_w = 0.0;
  sc.delta_TI = 0.0;
  sc.T = 300;
  sc.n_wt = 3;
  const Eigen::VectorXd up = generate_free_stream(sc);
  const WindTrace tr = apply_wake(up, sc);
  CHECK((tr.w.col(0) - up).norm() == 0.0); // first turbine is the free stream
  const int d = wake_delay_samples(sc);
  for (int k = d; k < sc.T; ++k) {
    CHECK(tr.w(k, 1) == doctest::Approx(tr.w(k - d, 0)).epsilon(1e-12));
    CHECK(tr.w(k, 2) == doctest::Approx(tr.w(k - d, 1)).epsilon(1e-12));
  }
}

TEST_CASE("wake chain: per-turbine means approach w0 times the deficit powers") {
  WindScenario sc;
  sc.T = 100000;
  sc.seed = 5;
  const WindTrace tr = generate_wind(sc);
  const double f = wake_deficit_factor(sc);
  CHECK(f > 0.0);
  CHECK(f < 1.0);
  for (int i = 0; i < sc.n_wt; ++i)
    CHECK(col_mean(tr.w, i) ==
          doctest::Approx(sc.w0 * std::pow(f, i)).epsilon(0.01));
  // mean_effective_wind states exactly that chain
  const Eigen::VectorXd mw = mean_effective_wind(sc);
  for (int i = 0; i < sc.n_wt; ++i)
    CHECK(mw(i) == doctest::Approx(sc.w0 * std::pow(f, i)).epsilon(1e-12));
}

TEST_CASE("wake chain: added turbulence raises downstream variance") {
  WindScenario sc;
  sc.T = 100000;
  sc.seed = 9;
  const WindTrace tr = generate_wind(sc);
  // downstream = scaled upstream + independent added turbulence
  CHECK(col_var(tr.w, 1) > wake_deficit_factor(sc) * wake_deficit_factor(sc) * col_var(tr.w, 0));
}

TEST_CASE("wake chain: upstream deficits arrive downstream after the advection delay") {
  WindScenario sc;
  sc.T = 4000;
  sc.seed = 21;
  const WindTrace tr = generate_wind(sc);
  CHECK(xcorr_peak(tr.w, 0, 1, 60) == wake_delay_samples(sc));
  CHECK(xcorr_peak(tr.w, 1, 2, 60) == wake_delay_samples(sc));
}

TEST_CASE("generated winds stay positive (floored)") {
  WindScenario sc;
  sc.TI = 0.4; // deep dips
  sc.T = 50000;
  sc.seed = 2;
  const WindTrace tr = generate_wind(sc);
  CHECK(tr.w.minCoeff() >= 0.05 * sc.w0 - 1e-12);
}

TEST_CASE("delay must fit in the horizon") {
  WindScenario sc;
  sc.T = 10; // delay 33 >= T
  CHECK_THROWS_AS(generate_wind(sc), std::invalid_argument);
}

TEST_CASE("wind CSV round trip preserves every sample") {
  WindScenario sc;
  sc.T = 120;
  sc.seed = 77;
  const WindTrace tr = generate_wind(sc);
  save_wind_csv(tr, "wind_roundtrip.csv");
  const WindTrace r = load_wind_csv("wind_roundtrip.csv");
  REQUIRE(r.w.rows() == tr.w.rows());
  REQUIRE(r.w.cols() == tr.w.cols());
  CHECK((r.w - tr.w).norm() == 0.0);
}
