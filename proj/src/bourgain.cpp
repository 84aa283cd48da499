#include "zr/bourgain.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "zr/evolution.hpp"
#include "zr/rng.hpp"

namespace zr {

double Dispersion::phase(double xi_squared) const {
  switch (kind) {
    case DispersionKind::schrodinger: return scale * xi_squared;
    case DispersionKind::wave_plus: return scale * std::sqrt(xi_squared);
    case DispersionKind::wave_minus: return -scale * std::sqrt(xi_squared);
    case DispersionKind::none: return 0.0;
  }
  return 0.0;
}

Dispersion dispersion_from_name(std::string_view name) {
  if (name == "schrodinger") return {DispersionKind::schrodinger, 1.0};
  if (name == "wave_plus") return {DispersionKind::wave_plus, 1.0};
  if (name == "wave_minus") return {DispersionKind::wave_minus, 1.0};
  if (name == "none") return {DispersionKind::none, 1.0};
  throw ConfigError("unknown dispersion '" + std::string(name) + "'");
}

std::string_view dispersion_name(DispersionKind kind) {
  switch (kind) {
    case DispersionKind::schrodinger: return "schrodinger";
    case DispersionKind::wave_plus: return "wave_plus";
    case DispersionKind::wave_minus: return "wave_minus";
    case DispersionKind::none: return "none";
  }
  return "none";
}

namespace {

double bracket(double x2) { return std::sqrt(1.0 + x2); }

// weighted sum over the space-time spectrum: sum w(tau, xi2) |c|^2
template <class W>
double weighted_sum(const SpaceTimeField& f, W&& weight) {
  const std::vector<cplx> c = f.spectrum();
  const std::size_t G = f.slice_size();
  const Grid& g = f.grid();
  double acc = 0.0;
  for (int m = 0; m < f.n_t(); ++m) {
    const double tau = f.tau(m);
    for (std::size_t k = 0; k < G; ++k) acc += weight(tau, g.xi_squared(k)) * std::norm(c[m * G + k]);
  }
  return acc;
}

// per-slice spatial unitary DFT, time-major layout kept
std::vector<cplx> spatial_spectra(const SpaceTimeField& f) {
  std::vector<cplx> out(f.size());
  const auto shape = f.grid().shape();
  const std::size_t G = f.slice_size();
  for (int j = 0; j < f.n_t(); ++j)
    unitary_dft(shape, f.slice(j), std::span<cplx>(out).subspan(j * G, G), -1);
  return out;
}

SpaceTimeField from_spatial_spectra(const Grid& grid, double half_window, int n_t, const std::vector<cplx>& s) {
  SpaceTimeField f(grid, half_window, n_t);
  const auto shape = grid.shape();
  const std::size_t G = grid.size();
  for (int j = 0; j < n_t; ++j) unitary_dft(shape, std::span<const cplx>(s).subspan(j * G, G), f.slice(j), +1);
  return f;
}

}  // namespace

double xsb_norm(const SpaceTimeField& f, double s, double b, const Dispersion& disp) {
  const double acc = weighted_sum(f, [&](double tau, double xi2) {
    const double sig = tau + disp.phase(xi2);
    return std::pow(1.0 + xi2, s) * std::pow(1.0 + sig * sig, b);
  });
  return std::sqrt(acc * f.cell_weight());
}

double hsb_norm(const SpaceTimeField& f, double s, double b) {
  return xsb_norm(f, s, b, Dispersion{DispersionKind::none, 1.0});
}

double ys_norm(const SpaceTimeField& f, double s, const Dispersion& disp) {
  const std::vector<cplx> c = f.spectrum();
  const std::size_t G = f.slice_size();
  const Grid& g = f.grid();
  const double N = static_cast<double>(f.size());
  // continuum transform u^ = dt dV sqrt(N) c
  const double scale = f.cell_weight() * std::sqrt(N);
  const double dtau = 1.0 / (2.0 * f.half_window());
  double acc = 0.0;
  for (std::size_t k = 0; k < G; ++k) {
    const double xi2 = g.xi_squared(k);
    const double p = disp.phase(xi2);
    double l1 = 0.0;
    for (int m = 0; m < f.n_t(); ++m) {
      const double sig = f.tau(m) + p;
      l1 += std::abs(c[m * G + k]) / bracket(sig * sig);
    }
    l1 *= dtau * scale * std::pow(1.0 + xi2, 0.5 * s);
    acc += l1 * l1;
  }
  return std::sqrt(acc / g.volume());
}

double mixed_norm(const SpaceTimeField& f, double q, double r) {
  if (!(q >= 1.0) || !(r >= 1.0)) throw ConfigError("mixed norm exponents must be >= 1");
  const double dV = f.grid().cell_volume();
  const double dt = f.dt();
  double outer = 0.0;
  for (int j = 0; j < f.n_t(); ++j) {
    double inner = 0.0;
    if (std::isinf(r)) {
      for (const auto& v : f.slice(j)) inner = std::max(inner, std::abs(v));
    } else {
      for (const auto& v : f.slice(j)) inner += std::pow(std::abs(v), r);
      inner = std::pow(dV * inner, 1.0 / r);
    }
    if (std::isinf(q))
      outer = std::max(outer, inner);
    else
      outer += std::pow(inner, q);
  }
  return std::isinf(q) ? outer : std::pow(dt * outer, 1.0 / q);
}

double hs_slice_norm(const SpaceTimeField& f, int j, double s) {
  const std::size_t G = f.slice_size();
  std::vector<cplx> c(G);
  unitary_dft(f.grid().shape(), f.slice(j), c, -1);
  double acc = 0.0;
  for (std::size_t k = 0; k < G; ++k) acc += std::pow(1.0 + f.grid().xi_squared(k), s) * std::norm(c[k]);
  return std::sqrt(acc * f.grid().cell_volume());
}

SpaceTimeField demodulate(const SpaceTimeField& f, const Dispersion& disp) {
  std::vector<cplx> s = spatial_spectra(f);
  const std::size_t G = f.slice_size();
  for (int j = 0; j < f.n_t(); ++j) {
    const double t = f.time(j);
    for (std::size_t k = 0; k < G; ++k) s[j * G + k] *= std::polar(1.0, t * disp.phase(f.grid().xi_squared(k)));
  }
  return from_spatial_spectra(f.grid(), f.half_window(), f.n_t(), s);
}

void multiply_by_cutoff(SpaceTimeField& f, double T) {
  for (int j = 0; j < f.n_t(); ++j) {
    const double lam = bump_scaled(f.time(j), T);
    for (auto& v : f.slice(j)) v *= lam;
  }
}

SpaceTimeField free_evolution(const ComplexField& u0, double half_window, int n_t, const Dispersion& disp,
                              std::optional<double> cutoff_T) {
  if (u0.space() != Space::physical) throw ContractViolation("free_evolution expects physical-space data");
  const Grid& g = u0.grid();
  const std::size_t G = g.size();
  std::vector<cplx> c0(G);
  unitary_dft(g.shape(), u0.values(), c0, -1);
  SpaceTimeField probe(g, half_window, n_t);
  std::vector<cplx> s(probe.size());
  for (int j = 0; j < n_t; ++j) {
    const double t = probe.time(j);
    const double lam = cutoff_T ? bump_scaled(t, *cutoff_T) : 1.0;
    for (std::size_t k = 0; k < G; ++k) s[j * G + k] = lam * std::polar(1.0, -t * disp.phase(g.xi_squared(k))) * c0[k];
  }
  return from_spatial_spectra(g, half_window, n_t, s);
}

SpaceTimeField retarded_convolution(const SpaceTimeField& q, const Dispersion& disp) {
  const Grid& g = q.grid();
  const std::size_t G = g.size();
  const int nt = q.n_t();
  const int j0 = q.zero_index();
  const double h = q.dt();
  const std::vector<cplx> qs = spatial_spectra(q);
  std::vector<cplx> ws(qs.size());
  for (std::size_t k = 0; k < G; ++k) {
    const double p = disp.phase(g.xi_squared(k));
    // integrand in the interaction picture; slow for forcing near tau = -p
    auto gk = [&](int j) { return std::polar(1.0, p * q.time(j)) * qs[j * G + k]; };
    cplx W = 0.0;
    ws[j0 * G + k] = 0.0;
    for (int j = j0; j + 1 < nt; ++j) {
      W += 0.5 * h * (gk(j) + gk(j + 1));
      ws[(j + 1) * G + k] = std::polar(1.0, -p * q.time(j + 1)) * W;
    }
    W = 0.0;
    for (int j = j0 - 1; j >= 0; --j) {
      W -= 0.5 * h * (gk(j) + gk(j + 1));
      ws[j * G + k] = std::polar(1.0, -p * q.time(j)) * W;
    }
  }
  return from_spatial_spectra(g, q.half_window(), nt, ws);
}

SpaceTimeField random_band_limited_field(const Grid& grid, double half_window, int n_t, const BandLimitedSpec& spec,
                                         std::uint64_t seed) {
  const int n = grid.points_per_axis();
  if (spec.kmax < 0 || 2 * spec.kmax >= n) throw ConfigError("kmax must lie in [0, N/2)");
  if (spec.mt_max < 0 || 2 * spec.mt_max >= n_t) throw ConfigError("mt_max must lie in [0, N_t/2)");
  SpaceTimeField f(grid, half_window, n_t);
  std::vector<cplx> c(f.size());
  const double amp = std::sqrt(static_cast<double>(f.size()));
  const int d = grid.dim();
  const std::size_t G = grid.size();
  SplitMix64 rng(seed);
  for (int mt = -spec.mt_max; mt <= spec.mt_max; ++mt) {
    const int jt = mt < 0 ? mt + n_t : mt;
    std::array<int, 3> k{-spec.kmax, d > 1 ? -spec.kmax : 0, d > 2 ? -spec.kmax : 0};
    while (true) {
      std::array<int, 3> idx{0, 0, 0};
      for (int a = 0; a < d; ++a) idx[a] = k[a] < 0 ? k[a] + n : k[a];
      const double re = rng.normal(), im = rng.normal();
      c[jt * G + grid.flatten(idx)] = amp * cplx(re, im);
      int a = d - 1;  // odometer, last axis fastest
      while (a >= 0 && k[a] == spec.kmax) k[a--] = -spec.kmax;
      if (a < 0) break;
      ++k[a];
    }
  }
  f = SpaceTimeField::from_spectrum(grid, half_window, n_t, c);
  if (spec.carrier) {
    std::vector<cplx> s = spatial_spectra(f);
    for (int j = 0; j < n_t; ++j) {
      const double t = f.time(j);
      for (std::size_t k = 0; k < G; ++k) s[j * G + k] *= std::polar(1.0, -t * spec.carrier->phase(grid.xi_squared(k)));
    }
    f = from_spatial_spectra(grid, half_window, n_t, s);
  }
  if (spec.cutoff_T) multiply_by_cutoff(f, *spec.cutoff_T);
  return f;
}

LinearEstimateReport check_linear_estimate(const SpaceTimeField& q, const ComplexField* u0, double T, double s,
                                           double b, double b_prime, const Dispersion& disp) {
  std::vector<std::string> bad;
  if (!(b_prime <= 0.0)) bad.emplace_back("b' <= 0");
  if (!(0.0 <= b)) bad.emplace_back("0 <= b");
  if (!(b <= b_prime + 1.0)) bad.emplace_back("b <= b' + 1");
  if (!(T > 0.0 && T <= 1.0)) bad.emplace_back("0 < T <= 1");
  if (!(q.half_window() >= 2.0 * T)) bad.emplace_back("window half-length >= 2T");
  if (!bad.empty()) {
    std::string msg = "linear estimate hypotheses violated:";
    for (const auto& x : bad) msg += " [" + x + "]";
    throw PreconditionError(msg);
  }
  LinearEstimateReport r;
  SpaceTimeField w = retarded_convolution(q, disp);
  multiply_by_cutoff(w, T);
  r.lhs = xsb_norm(w, s, b, disp);
  r.rhs2 = std::pow(T, 1.0 - b + b_prime) * xsb_norm(q, s, b_prime, disp);
  r.rhs1 = r.rhs2 + std::pow(T, 0.5 - b) * ys_norm(q, s, disp);
  r.ratio1 = r.rhs1 > 0.0 ? r.lhs / r.rhs1 : 0.0;
  r.estimate2_applicable = b_prime > -0.5;
  if (r.estimate2_applicable) r.ratio2 = r.rhs2 > 0.0 ? r.lhs / r.rhs2 : 0.0;
  if (u0) {
    const SpaceTimeField fe = free_evolution(*u0, q.half_window(), q.n_t(), disp, T);
    std::vector<cplx> c(u0->size());
    unitary_dft(u0->grid().shape(), u0->values(), c, -1);
    double hs = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) hs += std::pow(1.0 + u0->grid().xi_squared(k), s) * std::norm(c[k]);
    hs = std::sqrt(hs * u0->grid().cell_volume());
    r.homogeneous_ratio = hs > 0.0 ? xsb_norm(fe, s, b, disp) / hs : 0.0;
  }
  return r;
}

StrichartzReport strichartz_ratio(const SpaceTimeField& w0, double a, double a_prime, double gamma, double eta,
                                  double b0, int d, double T, const Dispersion& disp) {
  const bool wave = disp.kind == DispersionKind::wave_plus || disp.kind == DispersionKind::wave_minus;
  StrichartzReport r;
  r.exponents = strichartz_exponents(a, a_prime, gamma, eta, b0, d, wave);
  std::vector<std::string> bad = r.exponents.violated;
  if (d != w0.grid().dim()) bad.emplace_back("d matches the grid dimension");
  if (!(T > 0.0)) bad.emplace_back("T > 0");
  if (!(w0.half_window() >= 2.0 * T)) bad.emplace_back("window half-length >= 2T");
  if (!bad.empty()) {
    std::string msg = "Strichartz hypotheses violated:";
    for (const auto& x : bad) msg += " [" + x + "]";
    throw PreconditionError(msg);
  }
  SpaceTimeField w = w0;
  multiply_by_cutoff(w, T);
  std::vector<cplx> c = w.spectrum();
  const std::size_t G = w.slice_size();
  double vn = 0.0;
  std::vector<cplx> h(c.size());
  for (int m = 0; m < w.n_t(); ++m)
    for (std::size_t k = 0; k < G; ++k) {
      const double sig = w.tau(m) + disp.phase(w.grid().xi_squared(k));
      const double br = bracket(sig * sig);
      const double v = std::pow(br, a_prime) * std::abs(c[m * G + k]);
      vn += v * v;
      h[m * G + k] = std::pow(br, -a) * v;
    }
  r.v_norm = std::sqrt(vn * w.cell_weight());
  const SpaceTimeField hf = SpaceTimeField::from_spectrum(w.grid(), w.half_window(), w.n_t(), h);
  r.lhs = mixed_norm(hf, r.exponents.q, r.exponents.r);
  r.ratio = r.v_norm > 0.0 ? r.lhs / r.v_norm : 0.0;
  r.T_theta = std::pow(T, r.exponents.theta);
  r.scaled_ratio = r.ratio / r.T_theta;
  return r;
}

double embedding_ratio(const SpaceTimeField& f, double s, double b, const Dispersion& disp) {
  double sup = 0.0;
  for (int j = 0; j < f.n_t(); ++j) sup = std::max(sup, hs_slice_norm(f, j, s));
  const double x = xsb_norm(f, s, b, disp);
  return x > 0.0 ? sup / x : 0.0;
}

namespace {

template <class Fn>
BatchReport run_batch(const BatchSetup& setup, Fn&& per_field) {
  if (setup.count < 1) throw ConfigError("batch count must be >= 1");
  BatchReport rep;
  rep.ratios.assign(setup.count, 0.0);
  auto job = [&](std::size_t i) {
    const SpaceTimeField f =
        random_band_limited_field(setup.grid, setup.half_window, setup.n_t, setup.spec, derive_seed(setup.seed, i));
    rep.ratios[i] = per_field(f);
  };
  const int nt = std::max(1, std::min<int>(setup.threads, static_cast<int>(setup.count)));
  if (nt == 1) {
    for (std::size_t i = 0; i < setup.count; ++i) job(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> err(static_cast<std::size_t>(nt));
    for (int w = 0; w < nt; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < setup.count; i += nt) job(i);
        } catch (...) {
          err[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : err)
      if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < setup.count; ++i)
    if (rep.ratios[i] > rep.max_ratio) {
      rep.max_ratio = rep.ratios[i];
      rep.argmax = i;
    }
  return rep;
}

}  // namespace

BatchReport embedding_batch(const BatchSetup& setup, double s, double b, const Dispersion& disp) {
  return run_batch(setup, [&](const SpaceTimeField& f) { return embedding_ratio(f, s, b, disp); });
}

BatchReport linear_estimate_batch(const BatchSetup& setup, double T, double s, double b, double b_prime,
                                  const Dispersion& disp) {
  return run_batch(setup, [&](const SpaceTimeField& f) {
    const LinearEstimateReport r = check_linear_estimate(f, nullptr, T, s, b, b_prime, disp);
    return r.ratio2 ? *r.ratio2 : r.ratio1;
  });
}

}  // namespace zr
