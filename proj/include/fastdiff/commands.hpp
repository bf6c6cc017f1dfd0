#pragma once

// Batch commands behind the fastdiff executable. Each returns a process exit
// status: 0 success, 1 solver failure, 2 config error, 3 verification failure.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fastdiff/config.hpp"

namespace fastdiff {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolver = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVerify = 3;

inline const char* const kSeriesHeader =
    "t,Y,phi1,phi2,J,linf_bulk,linf_boundary,mass_residual,energy_violation,newton_iters,"
    "step_residual";

struct CheckLine {
  std::string name;
  bool pass = true;
  std::string measured;
};

std::string format_check(const CheckLine& c);

/// Writes series.csv, meta.txt and state_final.txt into config.output_dir.
int cmd_run(const RunConfig& config, int n_samples, std::uint64_t seed, std::ostream& log);

/// Runs the invariant battery on the configured problem and prints the table.
int cmd_verify(const RunConfig& config, std::ostream& out);

/// Best-constant estimate; prints the report and writes well.txt.
int cmd_depth(const RunConfig& config, int n_samples, std::uint64_t seed, std::ostream& out);

}  // namespace fastdiff
