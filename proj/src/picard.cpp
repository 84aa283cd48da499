#include "zr/picard.hpp"

#include <cmath>
#include <string>

#include "zr/errors.hpp"
#include "zr/evolution.hpp"

namespace zr {

namespace {

constexpr cplx kI{0.0, 1.0};

using Slices = std::array<std::vector<ComplexField>, kPicardComponents>;  // frequency space, per time

std::array<std::vector<double>, kPicardComponents> dispersions(const Grid& g, double eps) {
  std::array<std::vector<double>, kPicardComponents> p;
  for (auto& v : p) v.resize(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double w = std::sqrt(g.xi_squared(k));
    p[0][k] = eps * g.xi_squared(k);
    p[1][k] = w;
    p[2][k] = -w;
    p[3][k] = w;
    p[4][k] = -w;
  }
  return p;
}

PlusMinusState slice_state(const PicardIterate& it, int j, double scale) {
  auto f = [&](int c) {
    ComplexField x = it.fields[static_cast<std::size_t>(c)].slice_field(j);
    if (scale != 1.0) x *= scale;
    return x;
  };
  return PlusMinusState{f(0), f(1), f(2), f(3), f(4)};
}

// Source terms q at one time slice, frequency space.
std::array<ComplexField, kPicardComponents> sources(const PlusMinusState& s, const ModelParams& params,
                                                    bool acoustic) {
  const Grid& g = s.grid();
  ComplexField qpsi = nonlinearity_F(s, params);
  qpsi *= params.epsilon;
  std::array<ComplexField, kPicardComponents> q{transform(qpsi, Direction::forward),
                                                ComplexField(g, Space::frequency), ComplexField(g, Space::frequency),
                                                ComplexField(g, Space::frequency), ComplexField(g, Space::frequency)};
  if (acoustic) {
    const ComplexField psi_t = psi_time_derivative(s, params);
    q[1] = transform(nonlinearity_G(s.psi, psi_t, params, +1, &s.rho_plus), Direction::forward);
    q[2] = transform(nonlinearity_G(s.psi, psi_t, params, -1, &s.rho_minus), Direction::forward);
    q[3] = transform(nonlinearity_H(s.psi, psi_t, params, +1, &s.varphi_plus), Direction::forward);
    q[4] = transform(nonlinearity_H(s.psi, psi_t, params, -1, &s.varphi_minus), Direction::forward);
  }
  return q;
}

struct Lattice {
  Grid grid;
  double Tw;
  int n_t;
  std::vector<double> t, lam, lamT, lam2T;
  std::array<std::vector<double>, kPicardComponents> p;
  std::array<ComplexField, kPicardComponents> u0;
};

// One application of the cutoff Duhamel map.  prev == nullptr gives the
// free part (zero integral) through the same arithmetic.
PicardIterate apply_map(const Lattice& L, const PicardIterate* prev, const ModelParams& params,
                        bool acoustic) {
  const std::size_t n = L.grid.size();
  const int j0 = L.n_t / 2;
  const double dt = 2.0 * L.Tw / L.n_t;

  Slices g;
  for (auto& v : g) v.assign(static_cast<std::size_t>(L.n_t), ComplexField(L.grid, Space::frequency));
  if (prev) {
    for (int j = 0; j < L.n_t; ++j) {
      const double scr = L.lam2T[j];
      if (scr == 0.0) continue;
      auto q = sources(slice_state(*prev, j, scr), params, acoustic);
      for (int c = 0; c < kPicardComponents; ++c) {
        auto& dst = g[c][static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < n; ++k) dst[k] = std::polar(1.0, L.t[j] * L.p[c][k]) * q[c][k];
      }
    }
  }

  PicardIterate out{{SpaceTimeField(L.grid, L.Tw, L.n_t), SpaceTimeField(L.grid, L.Tw, L.n_t),
                     SpaceTimeField(L.grid, L.Tw, L.n_t), SpaceTimeField(L.grid, L.Tw, L.n_t),
                     SpaceTimeField(L.grid, L.Tw, L.n_t)}};
  for (int c = 0; c < kPicardComponents; ++c) {
    // cumulative trapezoid outward from t = 0
    std::vector<ComplexField> I(static_cast<std::size_t>(L.n_t), ComplexField(L.grid, Space::frequency));
    const auto& gc = g[c];
    for (int j = j0 + 1; j < L.n_t; ++j)
      for (std::size_t k = 0; k < n; ++k) I[j][k] = I[j - 1][k] + 0.5 * dt * (gc[j - 1][k] + gc[j][k]);
    for (int j = j0 - 1; j >= 0; --j)
      for (std::size_t k = 0; k < n; ++k) I[j][k] = I[j + 1][k] - 0.5 * dt * (gc[j][k] + gc[j + 1][k]);

    for (int j = 0; j < L.n_t; ++j) {
      ComplexField h(L.grid, Space::frequency);
      for (std::size_t k = 0; k < n; ++k) {
        const cplx prop = std::polar(1.0, -L.t[j] * L.p[c][k]);
        h[k] = L.lam[j] * prop * L.u0[c][k] - kI * L.lamT[j] * prop * I[j][k];
      }
      out.fields[c].set_slice(j, transform(h, Direction::inverse));
    }
  }
  return out;
}

// sup over t of sqrt(sum_c ||a_c(t) - b_c(t)||^2), b optional.
double sup_norm(const PicardIterate& a, const PicardIterate* b) {
  const auto& f0 = a.fields[0];
  const double dV = f0.grid().cell_volume();
  double best = 0.0;
  for (int j = 0; j < f0.n_t(); ++j) {
    double s = 0.0;
    for (int c = 0; c < kPicardComponents; ++c) {
      auto x = a.fields[c].slice(j);
      if (b) {
        auto y = b->fields[c].slice(j);
        for (std::size_t k = 0; k < x.size(); ++k) s += std::norm(x[k] - y[k]);
      } else {
        for (const auto& v : x) s += std::norm(v);
      }
    }
    best = std::max(best, std::sqrt(s * dV));
  }
  return best;
}

}  // namespace

PicardResult picard_iterate(const PlusMinusState& initial, double T, int n_iters, const ModelParams& params,
                            const PicardOptions& options) {
  if (!(T > 0.0 && T <= 1.0)) throw ConfigError("T must lie in (0, 1]");
  if (n_iters < 0) throw ConfigError("iters must be >= 0");
  if (options.burn_in < 0) throw ConfigError("burn_in must be >= 0");
  params.validate();
  const double Tw = options.half_window.value_or(2.0 * T);

  Lattice L{initial.grid(), Tw, options.n_t, {}, {}, {}, {}, dispersions(initial.grid(), params.epsilon),
            {transform(initial.psi, Direction::forward), transform(initial.rho_plus, Direction::forward),
             transform(initial.rho_minus, Direction::forward), transform(initial.varphi_plus, Direction::forward),
             transform(initial.varphi_minus, Direction::forward)}};
  // validates n_t and the window
  SpaceTimeField probe(L.grid, Tw, options.n_t);
  for (int j = 0; j < L.n_t; ++j) {
    const double t = probe.time(j);
    L.t.push_back(t);
    L.lam.push_back(bump(t));
    L.lamT.push_back(bump_scaled(t, T));
    L.lam2T.push_back(bump_scaled(t, 2.0 * T));
  }

  PicardResult r;
  r.T = T;
  r.n_iters = n_iters;
  PicardIterate cur = apply_map(L, nullptr, params, options.acoustic_sources);
  r.iterate_norms.push_back(sup_norm(cur, nullptr));
  if (options.keep_iterates) r.iterates.push_back(cur);
  for (int it = 1; it <= n_iters; ++it) {
    PicardIterate next = apply_map(L, &cur, params, options.acoustic_sources);
    r.differences.push_back(sup_norm(next, &cur));
    r.iterate_norms.push_back(sup_norm(next, nullptr));
    cur = std::move(next);
    if (options.keep_iterates) r.iterates.push_back(cur);
  }

  const int first = std::max(2, options.burn_in);
  bool any_valid = false;
  double factor = 0.0;
  for (int n = first; n <= n_iters; ++n) {
    const double prev = r.differences[n - 2];
    const double floor = options.roundoff_floor * r.iterate_norms[n - 1];
    PicardResult::Ratio ratio{n, std::nullopt};
    if (prev > floor && prev > 0.0) {
      ratio.value = r.differences[n - 1] / prev;
      factor = std::max(factor, *ratio.value);
      any_valid = true;
    }
    r.ratios.push_back(ratio);
  }
  const bool d1_zero = !r.differences.empty() && r.differences[0] == 0.0;
  r.converged_to_roundoff = !any_valid && !d1_zero && !r.ratios.empty();
  r.contraction_factor = any_valid ? factor : 0.0;
  r.contracting = r.contraction_factor < 1.0;
  return r;
}

}  // namespace zr
