#pragma once

#include <string>
#include <vector>

#include "wfmpc/sim.hpp"

namespace wfmpc {

// Closed-loop trace file. Fixed header
//   t,w1..wN,u1..uN,Pout1..PoutN,Ft1..FtN,Ts1..TsN,lambda,solve_ms
// with one row per sample. Numbers are printed with 17 significant digits
// so write -> read -> write round-trips are byte-identical. The solve_ms
// column is written as 0 unless record_timing is set: wall-clock times are
// not reproducible and would break trace determinism.
void save_trace_csv(const SimTrace& tr, const std::string& path, bool record_timing = false);
SimTrace load_trace_csv(const std::string& path);

// Shared low-level helpers.
std::string format_double(double v);
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace wfmpc
