#include "zr/model.hpp"

#include <cmath>
#include <string>

#include "zr/errors.hpp"

namespace zr {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_physical(const ComplexField& f, const char* what) {
  if (f.space() != Space::physical) throw ContractViolation(std::string(what) + " must be in physical space");
}

void require_same_grid(const Grid& g, const ComplexField& f, const char* what) {
  if (!(f.grid() == g)) throw ContractViolation(std::string(what) + " lives on a different grid");
}

ComplexField density(const ComplexField& psi) {
  ComplexField n(psi.grid());
  for (std::size_t i = 0; i < psi.size(); ++i) n[i] = std::norm(psi[i]);
  return n;
}

// 2 Re(conj(psi) psi_t)
ComplexField density_rate(const ComplexField& psi, const ComplexField& psi_t) {
  ComplexField nt(psi.grid());
  for (std::size_t i = 0; i < psi.size(); ++i) nt[i] = 2.0 * (std::conj(psi[i]) * psi_t[i]).real();
  return nt;
}

// a*f + b*g across the frequency lattice: out_hat[k] = sa[k] fa[k] + sb[k] fb[k].
ComplexField combine_spectral(const Multiplier& ma, cplx ca, const ComplexField& fa, const Multiplier& mb,
                              cplx cb, const ComplexField& fb) {
  ComplexField ha = transform(fa, Direction::forward);
  ComplexField hb = transform(fb, Direction::forward);
  ComplexField out(fa.grid(), Space::frequency);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = ca * ma[k] * ha[k] + cb * mb[k] * hb[k];
  return transform(out, Direction::inverse);
}

}  // namespace

void ModelParams::validate() const {
  if (!(W >= 0.0) || !std::isfinite(W)) throw ConfigError("W must be >= 0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if (!std::isfinite(sigma2) || !std::isfinite(D)) throw ConfigError("sigma2 and D must be finite");
}

void ZRState::validate() const {
  const Grid& g = psi.grid();
  require_physical(psi, "psi");
  require_physical(rho, "rho");
  require_physical(phi, "phi");
  require_same_grid(g, rho, "rho");
  require_same_grid(g, phi, "phi");
  if (rho_t) {
    require_physical(*rho_t, "rho_t");
    require_same_grid(g, *rho_t, "rho_t");
  }
  if (phi_t) {
    require_physical(*phi_t, "phi_t");
    require_same_grid(g, *phi_t, "phi_t");
  }
}

ComplexField spectral_dx(const ComplexField& f) {
  return apply_in_physical(make_multiplier(f.grid(), Symbol::dx), f);
}

double h1_norm(const ComplexField& f) {
  require_physical(f, "field");
  ComplexField h = transform(f, Direction::forward);
  double s = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) s += (1.0 + f.grid().xi_squared(k)) * std::norm(h[k]);
  return std::sqrt(s * f.grid().cell_volume());
}

PlusMinusState decompose_components(const ComplexField& psi, const WaveComponents& w) {
  const Grid& g = psi.grid();
  for (const auto* f : {&w.rho, &w.varphi, &w.rho_t, &w.varphi_t}) {
    require_physical(*f, "wave component");
    require_same_grid(g, *f, "wave component");
  }
  const Multiplier id = make_multiplier(g, Symbol::bracket_pow, {.s = 0.0});
  const Multiplier winv = make_multiplier(g, Symbol::omega_inv);
  return PlusMinusState{
      psi,
      combine_spectral(id, 1.0, w.rho, winv, kI, w.rho_t),
      combine_spectral(id, 1.0, w.rho, winv, -kI, w.rho_t),
      combine_spectral(id, 1.0, w.varphi, winv, kI, w.varphi_t),
      combine_spectral(id, 1.0, w.varphi, winv, -kI, w.varphi_t),
  };
}

PlusMinusState decompose(const ZRState& state) {
  state.validate();
  if (!state.rho_t || !state.phi_t)
    throw ContractViolation("decompose needs the rho_t and phi_t slots");
  WaveComponents w{state.rho, spectral_dx(state.phi), *state.rho_t, spectral_dx(*state.phi_t)};
  return decompose_components(state.psi, w);
}

WaveComponents recombine(const PlusMinusState& pm) {
  const Grid& g = pm.grid();
  const Multiplier id = make_multiplier(g, Symbol::bracket_pow, {.s = 0.0});
  const Multiplier w = make_multiplier(g, Symbol::omega);
  // omega (a - b) / (2i) = -i/2 omega a + i/2 omega b
  return WaveComponents{
      combine_spectral(id, 0.5, pm.rho_plus, id, 0.5, pm.rho_minus),
      combine_spectral(id, 0.5, pm.varphi_plus, id, 0.5, pm.varphi_minus),
      combine_spectral(w, -0.5 * kI, pm.rho_plus, w, 0.5 * kI, pm.rho_minus),
      combine_spectral(w, -0.5 * kI, pm.varphi_plus, w, 0.5 * kI, pm.varphi_minus),
  };
}

ZRState with_time_derivatives(const ZRState& state, const ModelParams& params) {
  state.validate();
  const Grid& g = state.grid();
  ComplexField n = density(state.psi);
  // rho_t = -Lap phi - D n_x ;  phi_t = -rho - n
  ComplexField rho_t =
      combine_spectral(make_multiplier(g, Symbol::laplacian), -1.0, state.phi, make_multiplier(g, Symbol::dx),
                       -params.D, n);
  rho_t.project_real();
  ComplexField phi_t(g);
  for (std::size_t i = 0; i < g.size(); ++i) phi_t[i] = -state.rho[i].real() - n[i].real();
  ZRState out = state;
  out.rho_t = std::move(rho_t);
  out.phi_t = std::move(phi_t);
  return out;
}

ComplexField nonlinearity_F(const PlusMinusState& pm, const ModelParams& params) {
  const Grid& g = pm.grid();
  for (const auto* f : {&pm.psi, &pm.rho_plus, &pm.rho_minus, &pm.varphi_plus, &pm.varphi_minus}) {
    require_physical(*f, "plus/minus field");
    require_same_grid(g, *f, "plus/minus field");
  }
  ComplexField out(g);
  const double halfW = 0.5 * params.W;
  const double halfWD = 0.5 * params.W * params.D;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx p = pm.psi[i];
    out[i] = params.sigma2 * std::norm(p) * p + halfW * (pm.rho_plus[i] + pm.rho_minus[i]) * p +
             halfWD * (pm.varphi_plus[i] + pm.varphi_minus[i]) * p;
  }
  return out;
}

ComplexField psi_time_derivative(const PlusMinusState& pm, const ModelParams& params) {
  ComplexField lap = apply_in_physical(make_multiplier(pm.grid(), Symbol::laplacian), pm.psi);
  ComplexField f = nonlinearity_F(pm, params);
  const cplx c = kI * params.epsilon;
  for (std::size_t i = 0; i < lap.size(); ++i) lap[i] = c * (lap[i] - f[i]);
  return lap;
}

ComplexField nonlinearity_G(const ComplexField& psi, const ComplexField& psi_t, const ModelParams& params,
                            int sign, const ComplexField* own) {
  if (sign != 1 && sign != -1) throw ContractViolation("branch sign must be +1 or -1");
  require_physical(psi, "psi");
  require_physical(psi_t, "psi_t");
  require_same_grid(psi.grid(), psi_t, "psi_t");
  const Grid& g = psi.grid();
  const double s = sign;
  const double first = params.rho_source_sign == RhoSourceSign::derived ? -s : s;

  ComplexField nh = transform(density(psi), Direction::forward);
  ComplexField nth = transform(density_rate(psi, psi_t), Direction::forward);
  ComplexField oh(g, Space::frequency);
  const bool extra = params.cutoff_extra_terms && own != nullptr;
  if (extra) oh = transform(*own, Direction::forward);

  const Multiplier winv = make_multiplier(g, Symbol::omega_inv);
  const Multiplier lap = make_multiplier(g, Symbol::laplacian);
  const Multiplier winv_dx = make_multiplier(g, Symbol::omega_inv_dx);
  ComplexField out(g, Space::frequency);
  for (std::size_t k = 0; k < g.size(); ++k) {
    out[k] = first * winv[k] * lap[k] * nh[k] + s * params.D * winv_dx[k] * nth[k];
    if (extra) out[k] -= s * winv[k] * oh[k];
  }
  return transform(out, Direction::inverse);
}

ComplexField nonlinearity_H(const ComplexField& psi, const ComplexField& psi_t, const ModelParams& params,
                            int sign, const ComplexField* own) {
  if (sign != 1 && sign != -1) throw ContractViolation("branch sign must be +1 or -1");
  require_physical(psi, "psi");
  require_physical(psi_t, "psi_t");
  require_same_grid(psi.grid(), psi_t, "psi_t");
  const Grid& g = psi.grid();
  const double s = sign;

  ComplexField nh = transform(density(psi), Direction::forward);
  ComplexField nth = transform(density_rate(psi, psi_t), Direction::forward);
  ComplexField oh(g, Space::frequency);
  const bool extra = params.cutoff_extra_terms && own != nullptr;
  if (extra) oh = transform(*own, Direction::forward);

  const Multiplier winv = make_multiplier(g, Symbol::omega_inv);
  const Multiplier dx = make_multiplier(g, Symbol::dx);
  const Multiplier winv_dx = make_multiplier(g, Symbol::omega_inv_dx);
  ComplexField out(g, Space::frequency);
  for (std::size_t k = 0; k < g.size(); ++k) {
    out[k] = -s * params.D * winv_dx[k] * dx[k] * nh[k] + s * winv_dx[k] * nth[k];
    if (extra) out[k] -= s * winv[k] * oh[k];
  }
  return transform(out, Direction::inverse);
}

double mass(const ZRState& state) {
  require_physical(state.psi, "psi");
  double s = 0.0;
  for (const auto& v : state.psi.values()) s += std::norm(v);
  return s * state.grid().cell_volume();
}

EnergyTerms energy_terms(const ZRState& state, const ModelParams& params, bool dealiased) {
  state.validate();
  const Grid& g = state.grid();
  const double dV = g.cell_volume();
  ComplexField psih = transform(state.psi, Direction::forward);
  ComplexField phih = transform(state.phi, Direction::forward);
  ComplexField phix = spectral_dx(state.phi);
  ComplexField nf = density(state.psi);
  if (dealiased) {
    nf = apply_in_physical(make_multiplier(g, Symbol::dealias), nf);
    nf.project_real();
  }

  EnergyTerms e;
  double imag = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    e.kinetic += g.xi_squared(k) * std::norm(psih[k]);
    e.velocity += g.xi_squared(k) * std::norm(phih[k]);
  }
  cplx dens{0.0, 0.0}, dc{0.0, 0.0}, dop{0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double n = nf[i].real();
    const cplx r = state.rho[i];
    dens += r * r;
    e.quartic += std::norm(state.psi[i]) * n;
    dc += r * n;
    dop += n * phix[i];
  }
  e.kinetic *= dV;
  e.velocity *= 0.5 * params.W * dV;
  e.density = 0.5 * params.W * dens.real() * dV;
  e.quartic *= 0.5 * params.sigma2 * dV;
  e.density_coupling = params.W * dc.real() * dV;
  e.doppler_coupling = params.W * params.D * dop.real() * dV;
  imag = std::abs((0.5 * params.W * dens.imag() + params.W * dc.imag() + params.W * params.D * dop.imag()) * dV);
  e.total = e.kinetic + e.density + e.velocity + e.quartic + e.density_coupling + e.doppler_coupling;
  const double scale = std::abs(e.kinetic) + std::abs(e.density) + std::abs(e.velocity) + std::abs(e.quartic) +
                       std::abs(e.density_coupling) + std::abs(e.doppler_coupling);
  e.imag_residue = scale > 0.0 ? imag / scale : 0.0;
  return e;
}

double energy(const ZRState& state, const ModelParams& params, bool dealiased) {
  return energy_terms(state, params, dealiased).total;
}

}  // namespace zr
