#pragma once

// Time integration: Strang split-step for the physical system, the run
// driver, and the smooth time cutoffs used by the Duhamel iteration.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zr/errors.hpp"
#include "zr/model.hpp"

namespace zr {

// ------------------------------------------------------------------ cutoff

// Even C-infinity bump: 1 on |t| <= 1, 0 on |t| >= 2, monotone in between.
double bump(double t);
// bump(t / T)
double bump_scaled(double t, double T);

struct CutoffProfile {
  double T = 1.0;
  std::vector<double> times;
  std::vector<double> lambda;    // bump(t)
  std::vector<double> lambda_T;  // bump(t / T)
};

CutoffProfile make_cutoff(double T, std::span<const double> times);

// ------------------------------------------------------------- trajectory

struct Diagnostics {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double max_abs_psi = 0.0;
  double l2_rho = 0.0;
  double l2_phi = 0.0;
};

Diagnostics diagnose(const ZRState& state, const ModelParams& params, double t, bool dealiased = false);

// `snapshots` is either empty or aligned one-to-one with `times`.
struct Trajectory {
  std::vector<double> times;
  std::vector<Diagnostics> diagnostics;
  std::vector<ZRState> snapshots;
  std::optional<ZRState> final_state;
  double final_time = 0.0;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time, std::shared_ptr<const Trajectory> partial = nullptr)
      : Error(what), time_(time), partial_(std::move(partial)) {}
  double time() const { return time_; }
  // Trajectory up to the last good step (set by run_simulation).
  const Trajectory* partial() const { return partial_.get(); }

 private:
  double time_;
  std::shared_ptr<const Trajectory> partial_;
};

// --------------------------------------------------------------- stepping

struct StepOptions {
  bool dealias = true;
  double dt_max = 1.0;
};

// Exact flow of the linear part over time t (any sign).
ZRState linear_flow(const ZRState& state, double t, const ModelParams& params);
// Exact flow of the coupling part over time t: |psi|^2 is frozen, rho and
// phi move linearly, psi picks up the time-averaged phase.
ZRState nonlinear_flow(const ZRState& state, double t, const ModelParams& params, bool dealias);

// L(dt/2) N(dt) L(dt/2).  t0 is only used to label divergence errors.
ZRState strang_step(const ZRState& state, double dt, const ModelParams& params, const StepOptions& options = {},
                    double t0 = 0.0);

// ------------------------------------------------------------ run config

enum class InitialRecipe { gaussian, plane_wave, random_band_limited };

struct InitialData {
  InitialRecipe recipe = InitialRecipe::gaussian;
  double amplitude = 1.0;
  double width = 4.0;
  // Rescale psi to this discrete H^1 norm when set.
  std::optional<double> h1_norm;
  std::array<int, 3> mode{1, 0, 0};
  std::optional<std::uint64_t> seed;
  int kmax = 4;
  double rho_amplitude = 0.0;
  double phi_amplitude = 0.0;
};

struct SimConfig {
  int dim = 2;
  int points_per_axis = 64;
  double box_length = 32.0 * 3.14159265358979323846;
  double dt = 1e-3;
  double dt_max = 1.0;
  double t_end = 1.0;
  ModelParams params;
  InitialData initial;
  int stride = 10;
  bool dealias = true;
  // A run stops once any field's sup norm exceeds this factor times the
  // largest initial sup norm (existence-time proxy).
  double divergence_factor = 1e6;
  bool keep_snapshots = false;

  void validate() const;
  Grid grid() const;
};

ZRState make_initial_state(const SimConfig& config);

// Number of steps and the uniform step actually used to reach t_end.
struct StepPlan {
  long steps = 0;
  double dt = 0.0;
};
StepPlan plan_steps(double t_end, double dt);

Trajectory run_simulation(const SimConfig& config);
Trajectory run_simulation(const SimConfig& config, const ZRState& initial);

}  // namespace zr
