#pragma once

// Complex field sampled on a space x time lattice.  Times are
// t_j = -T_w + j dt, j = 0..N_t-1, dt = 2 T_w / N_t, so t = 0 sits at
// j = N_t/2.  Values are stored time-major: index j*grid.size() + flat.

#include <span>
#include <vector>

#include "zr/spectral.hpp"

namespace zr {

class SpaceTimeField {
 public:
  SpaceTimeField(Grid grid, double half_window, int n_t);
  SpaceTimeField(Grid grid, double half_window, int n_t, std::vector<cplx> values);

  const Grid& grid() const { return grid_; }
  double half_window() const { return half_window_; }
  int n_t() const { return n_t_; }
  double dt() const { return 2.0 * half_window_ / n_t_; }
  double time(int j) const { return -half_window_ + j * dt(); }
  int zero_index() const { return n_t_ / 2; }
  // Angular frequency of array index m: 2 pi mode(m) / (2 T_w).
  double tau(int m) const;
  std::size_t size() const { return values_.size(); }
  std::size_t slice_size() const { return grid_.size(); }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> slice(int j);
  std::span<const cplx> slice(int j) const;
  ComplexField slice_field(int j) const;
  void set_slice(int j, const ComplexField& f);

  // {N_t, n, n[, n]} for the combined DFT.
  std::vector<int> shape() const;
  // dt * dV: the quadrature weight of one lattice cell.
  double cell_weight() const { return dt() * grid_.cell_volume(); }

  // Unitary space-time DFT coefficients (same layout as values()).
  std::vector<cplx> spectrum() const;
  static SpaceTimeField from_spectrum(Grid grid, double half_window, int n_t, std::span<const cplx> coeffs);

  // sqrt(dt dV sum |f|^2)
  double l2_norm() const;

 private:
  Grid grid_;
  double half_window_;
  int n_t_;
  std::vector<cplx> values_;
};

}  // namespace zr
