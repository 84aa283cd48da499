#pragma once

// Experiment driver behind the zrsim CLI.  Each command reads its keys from a
// KvConfig, writes CSV / JSON / binary outputs into the run directory and
// returns a process exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zr/config.hpp"
#include "zr/evolution.hpp"

namespace zr {

inline constexpr const char* kToolVersion = "zrsim 1.0.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // unexpected internal error
  kExitValidation = 2,
  kExitDivergence = 3,
  kExitCapExceeded = 4,
};

struct RunContext {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // --seed, wins over the `seed` key
  int threads = 1;
  bool timing = false;  // wall time in reports breaks byte determinism, so opt-in
  std::ostream* log = nullptr;  // human summary; nullptr for silence
};

// Dispatches by name ("simulate", "epsilon-scaling", "region", "fuzz",
// "picard", "norms") and maps exceptions to exit codes.
int run_command(const std::string& command, const KvConfig& config, const RunContext& ctx);

int cmd_simulate(const KvConfig& config, const RunContext& ctx);
int cmd_epsilon_scaling(const KvConfig& config, const RunContext& ctx);
int cmd_region(const KvConfig& config, const RunContext& ctx);
int cmd_fuzz(const KvConfig& config, const RunContext& ctx);
int cmd_picard(const KvConfig& config, const RunContext& ctx);
int cmd_norms(const KvConfig& config, const RunContext& ctx);

// grid.*, model.*, initial.*, run.* keys.  Validation messages name the key.
SimConfig sim_config_from(const KvConfig& config, std::optional<std::uint64_t> master_seed);

// %.17g
std::string format_double(double x);

// Snapshot layout, all little-endian:
//   8 bytes  "ZRSNAP01"
//   u32      version (1)
//   u32      d
//   u32 x d  points per axis
//   f64 x d  box length per axis
//   psi, rho, phi: N^d (re, im) f64 pairs each, row-major, axis 0 slowest
void write_snapshot(const std::filesystem::path& path, const ZRState& state);
ZRState read_snapshot(const std::filesystem::path& path);

struct EpsilonRow {
  double epsilon = 0.0;
  double t_proxy = 0.0;
  bool diverged = false;
};

struct EpsilonScaling {
  std::vector<EpsilonRow> rows;
  std::optional<double> alpha_hat;  // slope of log T_proxy against log(1/eps)
  bool non_decreasing = true;
};

// Throws DivergenceError when every run diverges at t = 0 (degenerate fit).
EpsilonScaling epsilon_scaling(const SimConfig& base, const std::vector<double>& epsilons, double t_max,
                               int threads);

// Least-squares slope of y against x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace zr
