#include "zr/evolution.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "zr/rng.hpp"

namespace zr {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = 3.14159265358979323846;

// exp(-1/(1-s^2)) on (-1, 1)
double kernel(double s) {
  const double q = 1.0 - s * s;
  return q > 0.0 ? std::exp(-1.0 / q) : 0.0;
}

double kernel_integral(double a, double b) {
  using Q = boost::math::quadrature::gauss_kronrod<double, 61>;
  return Q::integrate(kernel, a, b, 8, 1e-13);
}

const double kKernelMass = kernel_integral(-1.0, 1.0);

bool all_finite(const ComplexField& f) {
  for (const auto& v : f.values())
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

double state_sup(const ZRState& s) {
  return std::max({s.psi.max_abs(), s.rho.max_abs(), s.phi.max_abs()});
}

}  // namespace

double bump(double t) {
  const double a = std::abs(t);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  // map [1,2] onto [-1,1] and take the normalized tail mass of the kernel
  const double s = 2.0 * a - 3.0;
  if (s <= 0.0) return 1.0 - kernel_integral(-1.0, s) / kKernelMass;
  return kernel_integral(s, 1.0) / kKernelMass;
}

double bump_scaled(double t, double T) { return bump(t / T); }

CutoffProfile make_cutoff(double T, std::span<const double> times) {
  if (!(T > 0.0 && T <= 1.0)) throw ConfigError("cutoff scale T must lie in (0, 1]");
  CutoffProfile p;
  p.T = T;
  p.times.assign(times.begin(), times.end());
  p.lambda.reserve(times.size());
  p.lambda_T.reserve(times.size());
  for (double t : times) {
    p.lambda.push_back(bump(t));
    p.lambda_T.push_back(bump_scaled(t, T));
  }
  return p;
}

Diagnostics diagnose(const ZRState& state, const ModelParams& params, double t, bool dealiased) {
  Diagnostics d;
  d.t = t;
  d.mass = mass(state);
  d.energy = energy(state, params, dealiased);
  d.max_abs_psi = state.psi.max_abs();
  d.l2_rho = state.rho.l2_norm();
  d.l2_phi = state.phi.l2_norm();
  return d;
}

ZRState linear_flow(const ZRState& state, double t, const ModelParams& params) {
  state.validate();
  const Grid& g = state.grid();
  ComplexField ph = transform(state.psi, Direction::forward);
  ComplexField rh = transform(state.rho, Direction::forward);
  ComplexField fh = transform(state.phi, Direction::forward);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double k2 = g.xi_squared(k);
    ph[k] *= std::polar(1.0, -params.epsilon * k2 * t);
    const double w = std::sqrt(k2);
    const cplx r0 = rh[k], f0 = fh[k];
    if (w == 0.0) {
      fh[k] = f0 - t * r0;
    } else {
      const double c = std::cos(w * t), s = std::sin(w * t);
      rh[k] = c * r0 + w * s * f0;
      fh[k] = -(s / w) * r0 + c * f0;
    }
  }
  ComplexField rho = transform(rh, Direction::inverse);
  ComplexField phi = transform(fh, Direction::inverse);
  rho.project_real();
  phi.project_real();
  return ZRState{transform(ph, Direction::inverse), std::move(rho), std::move(phi), std::nullopt, std::nullopt};
}

ZRState nonlinear_flow(const ZRState& state, double t, const ModelParams& params, bool dealias) {
  state.validate();
  const Grid& g = state.grid();
  const std::size_t n = g.size();
  const Multiplier dx = make_multiplier(g, Symbol::dx);
  const Multiplier mask = make_multiplier(g, Symbol::dealias);

  ComplexField dens(g);
  for (std::size_t i = 0; i < n; ++i) dens[i] = std::norm(state.psi[i]);
  ComplexField dh = transform(dens, Direction::forward);
  if (dealias) apply_multiplier_inplace(mask, dh);
  ComplexField dxh = apply_multiplier(dx, dh);
  ComplexField nf = dealias ? transform(dh, Direction::inverse) : dens;
  ComplexField nx = transform(dxh, Direction::inverse);

  ComplexField phix = spectral_dx(state.phi);

  // rho, phi_x at the substep midpoint
  ComplexField mid(g);
  for (std::size_t i = 0; i < n; ++i) {
    const double rbar = state.rho[i].real() - 0.5 * t * params.D * nx[i].real();
    const double fxbar = phix[i].real() - 0.5 * t * nx[i].real();
    mid[i] = rbar + params.D * fxbar;
  }
  if (dealias) {
    mid = apply_in_physical(mask, mid);
    mid.project_real();
  }

  ZRState out{state.psi, state.rho, state.phi, std::nullopt, std::nullopt};
  const double et = params.epsilon * t;
  for (std::size_t i = 0; i < n; ++i) {
    const double nfi = nf[i].real();
    out.rho[i] = state.rho[i].real() - t * params.D * nx[i].real();
    out.phi[i] = state.phi[i].real() - t * nfi;
    const double v = params.sigma2 * nfi + params.W * mid[i].real();
    out.psi[i] = state.psi[i] * std::polar(1.0, -et * v);
  }
  return out;
}

ZRState strang_step(const ZRState& state, double dt, const ModelParams& params, const StepOptions& options,
                    double t0) {
  if (!std::isfinite(dt)) throw ContractViolation("dt must be finite");
  if (std::abs(dt) > options.dt_max) throw ContractViolation("dt exceeds dt_max");
  if (dt == 0.0) return ZRState{state.psi, state.rho, state.phi, std::nullopt, std::nullopt};
  ZRState s = linear_flow(state, 0.5 * dt, params);
  s = nonlinear_flow(s, dt, params, options.dealias);
  s = linear_flow(s, 0.5 * dt, params);
  if (!all_finite(s.psi) || !all_finite(s.rho) || !all_finite(s.phi))
    throw DivergenceError("non-finite values after step", t0 + dt);
  return s;
}

// ------------------------------------------------------------ run config

void SimConfig::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError("dim: must be 2 or 3");
  if (points_per_axis < 4 || (points_per_axis & (points_per_axis - 1)) != 0)
    throw ConfigError("points_per_axis: must be a power of two >= 4");
  if (!(box_length > 0.0) || !std::isfinite(box_length)) throw ConfigError("box_length: must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt: must be positive");
  if (!(dt_max > 0.0)) throw ConfigError("dt_max: must be positive");
  if (dt > dt_max) throw ConfigError("dt: exceeds dt_max");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end: must be >= 0");
  if (stride < 1) throw ConfigError("stride: must be >= 1");
  if (!(divergence_factor > 1.0)) throw ConfigError("divergence_factor: must exceed 1");
  params.validate();
  if (!(initial.width > 0.0)) throw ConfigError("initial.width: must be positive");
  if (!std::isfinite(initial.amplitude)) throw ConfigError("initial.amplitude: must be finite");
  if (initial.h1_norm && !(*initial.h1_norm >= 0.0)) throw ConfigError("initial.h1_norm: must be >= 0");
  if (initial.recipe == InitialRecipe::random_band_limited) {
    if (!initial.seed) throw ConfigError("seed: required for the random_band_limited recipe");
    if (initial.kmax < 1 || initial.kmax > points_per_axis / 3)
      throw ConfigError("initial.kmax: must lie in [1, points_per_axis/3]");
  }
}

Grid SimConfig::grid() const { return Grid(dim, points_per_axis, box_length); }

namespace {

ComplexField random_band_limited(const Grid& g, SplitMix64& rng, int kmax, bool real) {
  ComplexField h(g, Space::frequency);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto idx = g.unflatten(k);
    bool inside = true;
    for (int a = 0; a < g.dim(); ++a) inside = inside && std::abs(g.mode(idx[a])) <= kmax;
    // draw for every mode so the stream does not depend on kmax quirks
    const double re = rng.normal(), im = rng.normal();
    if (inside) h[k] = cplx(re, im);
  }
  ComplexField f = transform(h, Direction::inverse);
  if (real) f.project_real();
  const double m = f.max_abs();
  if (m > 0.0) f *= 1.0 / m;
  return f;
}

}  // namespace

ZRState make_initial_state(const SimConfig& config) {
  config.validate();
  const Grid g = config.grid();
  const InitialData& in = config.initial;
  ComplexField psi(g), rho(g), phi(g);
  const int d = g.dim();
  const double L = config.box_length;

  switch (in.recipe) {
    case InitialRecipe::gaussian: {
      const double w2 = 2.0 * in.width * in.width;
      for (std::size_t k = 0; k < g.size(); ++k) {
        const auto idx = g.unflatten(k);
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += std::pow(g.coordinate(a, idx[a]), 2);
        const double e = std::exp(-r2 / w2);
        psi[k] = in.amplitude * e;
        rho[k] = in.rho_amplitude * e;
        phi[k] = in.phi_amplitude * e;
      }
      break;
    }
    case InitialRecipe::plane_wave: {
      for (std::size_t k = 0; k < g.size(); ++k) {
        const auto idx = g.unflatten(k);
        double arg = 0.0;
        for (int a = 0; a < d; ++a) arg += 2.0 * kPi * in.mode[a] / L * g.coordinate(a, idx[a]);
        psi[k] = in.amplitude * std::polar(1.0, arg);
        rho[k] = in.rho_amplitude * std::cos(arg);
        phi[k] = in.phi_amplitude * std::cos(arg);
      }
      break;
    }
    case InitialRecipe::random_band_limited: {
      SplitMix64 rng(*in.seed);
      psi = random_band_limited(g, rng, in.kmax, false);
      psi *= in.amplitude;
      rho = random_band_limited(g, rng, in.kmax, true);
      rho *= in.rho_amplitude;
      phi = random_band_limited(g, rng, in.kmax, true);
      phi *= in.phi_amplitude;
      break;
    }
  }
  if (in.h1_norm) {
    const double h = h1_norm(psi);
    if (h == 0.0) throw ConfigError("initial.h1_norm: cannot rescale a zero field");
    psi *= *in.h1_norm / h;
  }
  return ZRState{std::move(psi), std::move(rho), std::move(phi), std::nullopt, std::nullopt};
}

StepPlan plan_steps(double t_end, double dt) {
  if (t_end == 0.0) return {0, 0.0};
  const double ratio = t_end / dt;
  long n = static_cast<long>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    n = static_cast<long>(std::ceil(ratio));
  n = std::max(n, 1L);
  return {n, t_end / static_cast<double>(n)};
}

Trajectory run_simulation(const SimConfig& config) { return run_simulation(config, make_initial_state(config)); }

Trajectory run_simulation(const SimConfig& config, const ZRState& initial) {
  config.validate();
  initial.validate();
  const StepPlan plan = plan_steps(config.t_end, config.dt);
  const StepOptions opts{config.dealias, config.dt_max};
  const double ref = state_sup(initial);
  const double limit = config.divergence_factor * (ref > 0.0 ? ref : 1.0);

  Trajectory traj;
  auto record = [&](const ZRState& s, double t) {
    traj.times.push_back(t);
    traj.diagnostics.push_back(diagnose(s, config.params, t, config.dealias));
    if (config.keep_snapshots) traj.snapshots.push_back(s);
  };

  ZRState cur{initial.psi, initial.rho, initial.phi, std::nullopt, std::nullopt};
  record(cur, 0.0);
  double t = 0.0;
  for (long k = 1; k <= plan.steps; ++k) {
    const double t_next = k == plan.steps ? config.t_end : static_cast<double>(k) * plan.dt;
    auto fail = [&](const std::string& why) {
      traj.final_state = cur;
      traj.final_time = t;
      throw DivergenceError(why + " at t=" + std::to_string(t_next), t_next,
                            std::make_shared<const Trajectory>(std::move(traj)));
    };
    try {
      ZRState next = strang_step(cur, plan.dt, config.params, opts, t);
      if (state_sup(next) > limit) {
        fail("sup norm exceeded the divergence threshold");
      }
      cur = std::move(next);
    } catch (const DivergenceError& e) {
      if (e.partial()) throw;
      fail("non-finite values");
    }
    t = t_next;
    if (k % config.stride == 0 || k == plan.steps) record(cur, t);
  }
  traj.final_state = cur;
  traj.final_time = t;
  return traj;
}

}  // namespace zr
