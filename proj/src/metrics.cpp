#include "wfmpc/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wfmpc/csv.hpp"

namespace wfmpc {

namespace {

// Population standard deviation of the row sums of M, i.e. of the farm totals.
double total_std(const Eigen::MatrixXd& M) {
  const Eigen::VectorXd totals = M.rowwise().sum();
  const double mean = totals.mean();
  return std::sqrt((totals.array() - mean).square().mean());
}

}  // namespace

MetricsReport compute_metrics(const SimTrace& tr, const MetricsNorms& norms) {
  const int T = static_cast<int>(tr.P_out.rows());
  const int n = static_cast<int>(tr.P_out.cols());
  if (T == 0 || n == 0) throw std::invalid_argument("compute_metrics: empty trace");
  if (tr.u.rows() != T || tr.u.cols() != n)
    throw std::invalid_argument("compute_metrics: reference block shape mismatch");

  MetricsReport rep;
  const double sq = (tr.P_out - tr.u).array().square().sum();
  rep.J_p = std::sqrt(sq / (static_cast<double>(T) * n * norms.P0));
  rep.J_s = total_std(tr.T_s) / (n * norms.Ts0);
  rep.J_t = total_std(tr.F_t) / (n * norms.Tt0);
  return rep;
}

void fill_percentages(std::vector<CompareRow>& rows) {
  if (rows.empty()) return;
  const CompareRow base = rows[0];
  if (base.m.J_p <= 0.0 || base.m.J_s <= 0.0 || base.m.J_t <= 0.0)
    throw std::invalid_argument("fill_percentages: baseline metrics must be positive");
  for (auto& r : rows) {
    r.pct_p = 100.0 * r.m.J_p / base.m.J_p;
    r.pct_s = 100.0 * r.m.J_s / base.m.J_s;
    r.pct_t = 100.0 * r.m.J_t / base.m.J_t;
  }
}

std::string format_compare_table(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-16s %10s %10s %10s %9s %9s %9s\n", "method", "J_p",
                "J_s", "J_t", "Jp%", "Js%", "Jt%");
  os << buf;
  for (const auto& r : rows) {
    std::string name = r.method;
    if (r.r > 0.0) {
      std::snprintf(buf, sizeof(buf), "%s(r=%g)", r.method.c_str(), r.r);
      name = buf;
    }
    std::snprintf(buf, sizeof(buf), "%-16s %10.4f %10.4f %10.4f %8.2f%% %8.2f%% %8.2f%%\n",
                  name.c_str(), r.m.J_p, r.m.J_s, r.m.J_t, r.pct_p, r.pct_s, r.pct_t);
    os << buf;
  }
  return os.str();
}

void save_compare_csv(const std::vector<CompareRow>& rows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_compare_csv: cannot open " + path);
  f << "method,r,J_p,J_s,J_t,pct_p,pct_s,pct_t\n";
  for (const auto& r : rows) {
    f << r.method << ',' << format_double(r.r) << ',' << format_double(r.m.J_p) << ','
      << format_double(r.m.J_s) << ',' << format_double(r.m.J_t) << ','
      << format_double(r.pct_p) << ',' << format_double(r.pct_s) << ','
      << format_double(r.pct_t) << '\n';
  }
}

std::vector<CompareRow> load_compare_csv(const std::string& path) {
  const auto cells = read_csv(path);
  if (cells.empty() || cells[0].size() != 8 || cells[0][0] != "method")
    throw std::runtime_error("load_compare_csv: unexpected header in " + path);
  std::vector<CompareRow> rows;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (c.size() != 8) throw std::runtime_error("load_compare_csv: ragged row");
    CompareRow r;
    r.method = c[0];
    r.r = std::stod(c[1]);
    r.m.J_p = std::stod(c[2]);
    r.m.J_s = std::stod(c[3]);
    r.m.J_t = std::stod(c[4]);
    r.pct_p = std::stod(c[5]);
    r.pct_s = std::stod(c[6]);
    r.pct_t = std::stod(c[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace wfmpc
