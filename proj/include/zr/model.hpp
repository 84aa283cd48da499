#pragma once

// Zakharov-Rubenchik / Benney-Roskes state, the half-wave reformulation and
// the conserved functionals.  Parameters are reduced to delta = sigma1 = M = 1,
// sigma3 = 0; sigma2, W, D and the model parameter epsilon stay free:
//
//   i psi_t + eps Lap psi = eps (sigma2 |psi|^2 + W rho + W D phi_x) psi
//   rho_t + Lap phi + D (|psi|^2)_x = 0
//   phi_t + rho + |psi|^2 = 0

#include <optional>

#include "zr/spectral.hpp"

namespace zr {

// Sign of the first term of the rho-equation source.  `derived` is the sign
// obtained by applying (i d_t -/+ omega) to rho_pm = rho +/- i omega^{-1} rho_t
// along solutions (-/+ omega^{-1} Lap |psi|^2).  `typeset` reproduces the
// printed half-wave system (+/- omega^{-1} Lap |psi|^2).
enum class RhoSourceSign { derived, typeset };

struct ModelParams {
  double sigma2 = 1.0;
  double W = 1.0;
  double D = 0.0;
  double epsilon = 1.0;
  RhoSourceSign rho_source_sign = RhoSourceSign::derived;
  // Adds the -/+ omega^{-1} rho_pm and -/+ omega^{-1} varphi_pm terms that
  // appear in the cutoff-equation sources but not in the half-wave system.
  bool cutoff_extra_terms = false;

  void validate() const;
};

struct ZRState {
  ComplexField psi;
  ComplexField rho;
  ComplexField phi;
  std::optional<ComplexField> rho_t;
  std::optional<ComplexField> phi_t;

  const Grid& grid() const { return psi.grid(); }
  void validate() const;
};

// (psi, rho_+, rho_-, varphi_+, varphi_-) with varphi = phi_x.
struct PlusMinusState {
  ComplexField psi;
  ComplexField rho_plus;
  ComplexField rho_minus;
  ComplexField varphi_plus;
  ComplexField varphi_minus;

  const Grid& grid() const { return psi.grid(); }
};

// Second-order data of the wave pair, varphi = phi_x.
struct WaveComponents {
  ComplexField rho;
  ComplexField varphi;
  ComplexField rho_t;
  ComplexField varphi_t;
};

PlusMinusState decompose(const ZRState& state);
PlusMinusState decompose_components(const ComplexField& psi, const WaveComponents& w);
WaveComponents recombine(const PlusMinusState& pm);

// rho_t and phi_t implied by the first-order acoustic equations.
ZRState with_time_derivatives(const ZRState& state, const ModelParams& params);

// sigma2 |psi|^2 psi + W/2 (rho_+ + rho_-) psi + W D/2 (varphi_+ + varphi_-) psi.
ComplexField nonlinearity_F(const PlusMinusState& pm, const ModelParams& params);

// psi_t from the psi-equation: i eps (Lap psi - F).
ComplexField psi_time_derivative(const PlusMinusState& pm, const ModelParams& params);

// Sources of (i d_t -/+ omega) rho_pm and (i d_t -/+ omega) varphi_pm.
// `own` is rho_pm (resp. varphi_pm); it is read only when
// params.cutoff_extra_terms is set.
ComplexField nonlinearity_G(const ComplexField& psi, const ComplexField& psi_t, const ModelParams& params,
                            int sign, const ComplexField* own = nullptr);
ComplexField nonlinearity_H(const ComplexField& psi, const ComplexField& psi_t, const ModelParams& params,
                            int sign, const ComplexField* own = nullptr);

double mass(const ZRState& state);

struct EnergyTerms {
  double kinetic = 0.0;           // |grad psi|^2
  double density = 0.0;           // W/2 rho^2
  double velocity = 0.0;          // W/2 |grad phi|^2
  double quartic = 0.0;           // sigma2/2 |psi|^4
  double density_coupling = 0.0;  // W rho |psi|^2
  double doppler_coupling = 0.0;  // D W |psi|^2 phi_x
  double total = 0.0;
  // |Im| of the integrand sum relative to the total magnitude.
  double imag_residue = 0.0;
};

// With `dealiased` the coupling terms use the 2/3-filtered density P|psi|^2,
// which is the functional the dealiased split-step flow conserves.
EnergyTerms energy_terms(const ZRState& state, const ModelParams& params, bool dealiased = false);
double energy(const ZRState& state, const ModelParams& params, bool dealiased = false);

// Spectral derivative helpers on physical-space fields.
ComplexField spectral_dx(const ComplexField& f);
double h1_norm(const ComplexField& f);

}  // namespace zr
