#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wfmpc/config.hpp"
#include "wfmpc/csv.hpp"

namespace {

wfmpc::ExperimentConfig load_cfg(const std::string& path) {
  if (path.empty()) return {};
  return wfmpc::load_experiment(path);
}

// Gnuplot-ready power plot data: farm totals, then per-turbine (ref, out)
// pairs, space separated with a comment header.
void write_plot_data(const wfmpc::SimTrace& tr, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  const int T = static_cast<int>(tr.P_out.rows());
  const int n = static_cast<int>(tr.P_out.cols());
  f << "# t Pref_farm Pout_farm";
  for (int i = 1; i <= n; ++i) f << " Pref" << i << " Pout" << i;
  f << "\n";
  for (int k = 0; k < T; ++k) {
    f << wfmpc::format_double(k * tr.dt) << ' '
      << wfmpc::format_double(tr.u.row(k).sum()) << ' '
      << wfmpc::format_double(tr.P_out.row(k).sum());
    for (int i = 0; i < n; ++i)
      f << ' ' << wfmpc::format_double(tr.u(k, i)) << ' '
        << wfmpc::format_double(tr.P_out(k, i));
    f << '\n';
  }
}

void print_report(const wfmpc::MetricsReport& m) {
  std::printf("J_p = %.6f\nJ_s = %.6f\nJ_t = %.6f\n", m.J_p, m.J_s, m.J_t);
}

int cmd_wind(const std::string& config, std::uint64_t seed, bool seed_set,
             const std::string& out) {
  auto cfg = load_cfg(config);
  const auto sc = wfmpc::make_scenario(cfg, seed_set ? seed : cfg.scenario.seed);
  const auto tr = wfmpc::generate_wind(sc);
  wfmpc::save_wind_csv(tr, out);
  std::printf("wrote %s (%d samples, %d turbines)\n", out.c_str(), sc.T, sc.n_wt);
  return 0;
}

int cmd_identify(const std::string& wind_csv, const std::vector<int>& orders,
                 const std::string& out, const std::string& amb_out, double beta,
                 double kappa) {
  const auto tr = wfmpc::load_wind_csv(wind_csv);
  const int n = static_cast<int>(tr.w.cols());
  std::vector<wfmpc::ArmaModel> models;
  models.reserve(n);
  for (int i = 0; i < n; ++i) {
    models.push_back(wfmpc::identify_selected(tr.w.col(i), orders));
    const auto& m = models.back();
    std::printf("turbine %d: ARMA(%d,%d), mean %.3f m/s, AR root radius %.4f\n", i + 1,
                m.p, m.p - 1, m.mean, wfmpc::ar_root_radius(m.a));
  }
  const double w0 = tr.w.col(0).mean();
  const double ti = std::sqrt((tr.w.col(0).array() - w0).square().mean()) / w0;
  wfmpc::save_arma_models(models, w0, ti, out);
  std::printf("wrote %s\n", out.c_str());

  if (!amb_out.empty()) {
    const int T = static_cast<int>(tr.w.rows());
    Eigen::MatrixXd res(T - 1, n);
    for (int i = 0; i < n; ++i) {
      auto st = wfmpc::init_state(models[i], tr.w(0, i) - models[i].mean);
      for (int k = 1; k < T; ++k)
        res(k - 1, i) = wfmpc::whiten(st, models[i], tr.w(k, i) - models[i].mean);
    }
    wfmpc::AmbiguitySet amb;
    amb.w0 = w0;
    amb.TI = ti;
    amb.beta = beta;
    amb.N_s = T - 1;
    amb.kappa = kappa;
    amb.sigma_diag = wfmpc::residual_covariance(res);
    wfmpc::save_ambiguity(amb, amb_out);
    std::printf("wrote %s\n", amb_out.c_str());
  }
  return 0;
}

int cmd_simulate(const std::string& config, const std::string& controller,
                 std::uint64_t seed, bool seed_set, const std::string& out,
                 bool record_timing, const std::string& plot_out) {
  auto cfg = load_cfg(config);
  const std::uint64_t s = seed_set ? seed : cfg.scenario.seed;
  const auto tr = wfmpc::run_experiment(cfg, controller, s);
  if (!out.empty()) {
    wfmpc::save_trace_csv(tr, out, record_timing);
    std::printf("wrote %s\n", out.c_str());
  }
  if (!plot_out.empty()) {
    write_plot_data(tr, plot_out);
    std::printf("wrote %s\n", plot_out.c_str());
  }
  print_report(wfmpc::compute_metrics(tr, cfg.norms));
  if (controller == "drmpc") {
    const int fb = std::accumulate(tr.fallback.begin(), tr.fallback.end(), 0);
    std::printf("fallback steps: %d / %d\n", fb, static_cast<int>(tr.fallback.size()));
    std::printf("mean solve time: %.2f ms\n", tr.solve_ms.mean());
  }
  return 0;
}

int cmd_metrics(const std::string& trace_csv, const std::string& baseline_csv,
                const std::string& config) {
  const auto cfg = load_cfg(config);
  const auto m = wfmpc::compute_metrics(wfmpc::load_trace_csv(trace_csv), cfg.norms);
  print_report(m);
  if (!baseline_csv.empty()) {
    const auto b = wfmpc::compute_metrics(wfmpc::load_trace_csv(baseline_csv), cfg.norms);
    std::printf("vs baseline: J_p %.2f%%  J_s %.2f%%  J_t %.2f%%\n", 100.0 * m.J_p / b.J_p,
                100.0 * m.J_s / b.J_s, 100.0 * m.J_t / b.J_t);
  }
  return 0;
}

int cmd_compare(const std::string& config, std::uint64_t seed, bool seed_set,
                const std::vector<double>& r_values, const std::string& out) {
  auto cfg = load_cfg(config);
  const std::uint64_t s = seed_set ? seed : cfg.scenario.seed;
  const auto rows = wfmpc::run_comparison(cfg, s, r_values);
  std::fputs(wfmpc::format_compare_table(rows).c_str(), stdout);
  if (!out.empty()) {
    wfmpc::save_compare_csv(rows, out);
    std::printf("wrote %s\n", out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wind farm dispatch toolkit: wind synthesis, ARMA identification, "
               "distributionally robust MPC, baselines and metrics"};
  app.require_subcommand(1);

  std::string config, out, plot_out, baseline, wind_csv, trace_csv, controller = "drmpc";
  std::uint64_t seed = 0;
  bool record_timing = false;
  std::vector<int> orders = {2, 3};
  std::vector<double> r_values = {1.0, 500.0, 1000.0, 10000.0};
  double beta = 0.05, kappa = 2.36;
  std::string amb_out;

  auto* wind = app.add_subcommand("wind", "generate a wake-propagated wind trace CSV");
  wind->add_option("--config", config, "experiment config JSON");
  auto* wseed = wind->add_option("--seed", seed, "override scenario seed");
  wind->add_option("--out", out, "output CSV")->required();

  auto* ident = app.add_subcommand("identify", "fit ARMA wind models from a wind CSV");
  ident->add_option("wind", wind_csv, "input wind CSV")->required();
  ident->add_option("--order", orders, "candidate ARMA orders p (fits ARMA(p,p-1))");
  ident->add_option("--out", out, "model file")->default_val("arma_models.json");
  ident->add_option("--ambiguity-out", amb_out, "also write the moment ambiguity set");
  ident->add_option("--beta", beta, "ambiguity confidence complement");
  ident->add_option("--kappa", kappa, "covariance inflation radius (0 = table default)");

  auto* sim = app.add_subcommand("simulate", "closed-loop run with CSV trace output");
  sim->add_option("--config", config, "experiment config JSON");
  sim->add_option("--controller", controller, "scheduler | swf | drmpc")
      ->check(CLI::IsMember({"scheduler", "swf", "drmpc"}));
  auto* sseed = sim->add_option("--seed", seed, "override scenario seed");
  sim->add_option("--out", out, "trace CSV path");
  sim->add_flag("--record-timing", record_timing,
                "persist measured solve times (off keeps the CSV deterministic)");
  sim->add_option("--plot-out", plot_out, "gnuplot power-plot data file");

  auto* met = app.add_subcommand("metrics", "metrics of a saved trace");
  met->add_option("trace", trace_csv, "trace CSV")->required();
  met->add_option("--baseline", baseline, "baseline trace CSV for ratios");
  met->add_option("--config", config, "config JSON supplying the normalizations");

  auto* cmp = app.add_subcommand("compare", "paired-seed controller comparison table");
  cmp->add_option("--config", config, "experiment config JSON");
  auto* cseed = cmp->add_option("--seed", seed, "override scenario seed");
  cmp->add_option("--r", r_values, "input-weight values for the DR-MPC rows")
      ->delimiter(',');
  cmp->add_option("--out", out, "comparison CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (wind->parsed()) return cmd_wind(config, seed, !wseed->empty(), out);
    if (ident->parsed()) return cmd_identify(wind_csv, orders, out, amb_out, beta, kappa);
    if (sim->parsed())
      return cmd_simulate(config, controller, seed, !sseed->empty(), out, record_timing,
                          plot_out);
    if (met->parsed()) return cmd_metrics(trace_csv, baseline, config);
    if (cmp->parsed()) return cmd_compare(config, seed, !cseed->empty(), r_values, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
