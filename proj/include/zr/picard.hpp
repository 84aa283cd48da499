#pragma once

// Picard iteration of the cutoff Duhamel system on a space x time lattice.
//
//   u^{n+1}(t) = lambda(t) U(t) u_0 - i lambda_T(t) int_0^t U(t-s) q(lambda_2T(s) u^n(s)) ds
//
// for the five components (psi, rho_+, rho_-, varphi_+, varphi_-), where
// U(t) = e^{-i t p(xi)} with p = eps |xi|^2 for psi and p = +/-|xi| for the
// wave branches, and q = (eps F, G_+, G_-, H_+, H_-).

#include <array>
#include <optional>
#include <vector>

#include "zr/model.hpp"
#include "zr/spacetime.hpp"

namespace zr {

struct PicardOptions {
  int n_t = 64;
  // Half width of the sampled time window; 2T when unset.
  std::optional<double> half_window;
  int burn_in = 2;
  // false zeroes G and H; with sigma2 = W = D = 0 the iteration is then
  // linear and iterate 1 equals iterate 0.
  bool acoustic_sources = true;
  bool keep_iterates = true;
  // Differences below this fraction of the iterate norm are roundoff.
  double roundoff_floor = 1e-12;
};

constexpr int kPicardComponents = 5;

struct PicardIterate {
  std::array<SpaceTimeField, kPicardComponents> fields;
};

struct PicardResult {
  double T = 0.0;
  int n_iters = 0;
  std::vector<PicardIterate> iterates;  // 0..n_iters when kept
  // differences[n-1] = sup_t ||u^n - u^{n-1}||, n = 1..n_iters
  std::vector<double> differences;
  std::vector<double> iterate_norms;  // sup_t ||u^n||, n = 0..n_iters
  struct Ratio {
    int n = 0;
    // d_n / d_{n-1}; empty when d_{n-1} sits at the roundoff floor
    std::optional<double> value;
  };
  // n >= max(2, burn_in)
  std::vector<Ratio> ratios;
  double contraction_factor = 0.0;
  bool contracting = true;
  // Every ratio after burn-in hit the roundoff floor.
  bool converged_to_roundoff = false;
};

PicardResult picard_iterate(const PlusMinusState& initial, double T, int n_iters, const ModelParams& params,
                            const PicardOptions& options = {});

}  // namespace zr
