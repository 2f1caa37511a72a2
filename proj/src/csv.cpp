#include "wfmpc/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wfmpc {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_csv: cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

void save_trace_csv(const SimTrace& tr, const std::string& path, bool record_timing) {
  const int T = static_cast<int>(tr.P_out.rows());
  const int n = static_cast<int>(tr.P_out.cols());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_trace_csv: cannot open " + path);
  f << 't';
  for (int i = 1; i <= n; ++i) f << ",w" << i;
  for (int i = 1; i <= n; ++i) f << ",u" << i;
  for (int i = 1; i <= n; ++i) f << ",Pout" << i;
  for (int i = 1; i <= n; ++i) f << ",Ft" << i;
  for (int i = 1; i <= n; ++i) f << ",Ts" << i;
  f << ",lambda,solve_ms\n";
  for (int k = 0; k < T; ++k) {
    f << format_double(k * tr.dt);
    for (int i = 0; i < n; ++i) f << ',' << format_double(tr.wind.w(k, i));
    for (int i = 0; i < n; ++i) f << ',' << format_double(tr.u(k, i));
    for (int i = 0; i < n; ++i) f << ',' << format_double(tr.P_out(k, i));
    for (int i = 0; i < n; ++i) f << ',' << format_double(tr.F_t(k, i));
    for (int i = 0; i < n; ++i) f << ',' << format_double(tr.T_s(k, i));
    f << ',' << format_double(tr.lambda(k));
    f << ',' << format_double(record_timing ? tr.solve_ms(k) : 0.0);
    f << '\n';
  }
}

SimTrace load_trace_csv(const std::string& path) {
  const auto cells = read_csv(path);
  if (cells.size() < 2) throw std::runtime_error("load_trace_csv: no data rows in " + path);
  const auto& hdr = cells[0];
  if (hdr.size() < 8 || hdr[0] != "t")
    throw std::runtime_error("load_trace_csv: unexpected header in " + path);
  // Layout: t, n wind, n refs, n Pout, n Ft, n Ts, lambda, solve_ms.
  const int n = static_cast<int>((hdr.size() - 3) / 5);
  if (static_cast<std::size_t>(5 * n + 3) != hdr.size())
    throw std::runtime_error("load_trace_csv: column count not of form 5n+3");
  const int T = static_cast<int>(cells.size()) - 1;

  SimTrace tr;
  tr.wind.w.resize(T, n);
  tr.u.resize(T, n);
  tr.P_out.resize(T, n);
  tr.F_t.resize(T, n);
  tr.T_s.resize(T, n);
  tr.lambda.resize(T);
  tr.solve_ms.resize(T);
  tr.fallback.assign(T, 0);
  tr.x.resize(0, 0);
  for (int k = 0; k < T; ++k) {
    const auto& c = cells[k + 1];
    if (c.size() != hdr.size()) throw std::runtime_error("load_trace_csv: ragged row");
    int j = 1;
    for (int i = 0; i < n; ++i) tr.wind.w(k, i) = std::stod(c[j++]);
    for (int i = 0; i < n; ++i) tr.u(k, i) = std::stod(c[j++]);
    for (int i = 0; i < n; ++i) tr.P_out(k, i) = std::stod(c[j++]);
    for (int i = 0; i < n; ++i) tr.F_t(k, i) = std::stod(c[j++]);
    for (int i = 0; i < n; ++i) tr.T_s(k, i) = std::stod(c[j++]);
    tr.lambda(k) = std::stod(c[j++]);
    tr.solve_ms(k) = std::stod(c[j++]);
  }
  if (T >= 2) tr.dt = std::stod(cells[2][0]) - std::stod(cells[1][0]);
  tr.wind.scenario.T = T;
  tr.wind.scenario.n_wt = n;
  return tr;
}

}  // namespace wfmpc
