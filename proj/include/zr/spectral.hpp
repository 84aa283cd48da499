#pragma once

// Periodic grids, complex fields, unitary DFTs and Fourier multipliers.
//
// The torus [-L/2, L/2)^d stands in for R^d.  Axis 0 is the distinguished
// "x" direction of the model (first frequency coordinate xi^(1)).  Arrays
// are row-major with axis 0 slowest.

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace zr {

using cplx = std::complex<double>;

class Grid {
 public:
  Grid(int dim, int points_per_axis, double box_length);
  Grid(int dim, int points_per_axis, std::array<double, 3> box_lengths);

  int dim() const { return impl_->dim; }
  int points_per_axis() const { return impl_->n; }
  std::size_t size() const { return impl_->size; }
  double box_length(int axis) const { return impl_->lengths[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const;
  double cell_volume() const { return impl_->cell_volume; }
  double volume() const { return impl_->volume; }

  // Centered integer mode for array index j: j for j < n/2, j - n otherwise.
  // The Nyquist index n/2 maps to -n/2.
  int mode(int j) const { return j < impl_->n / 2 ? j : j - impl_->n; }
  double coordinate(int axis, int j) const;
  // Wavenumbers 2*pi*mode/L along one axis, indexed by array position.
  std::span<const double> wavenumbers(int axis) const;

  std::array<int, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(std::array<int, 3> idx) const;

  // |xi|^2 and xi^(1) per flat index (precomputed).
  double xi_squared(std::size_t flat) const { return impl_->xi2[flat]; }
  double xi_axis0(std::size_t flat) const { return impl_->xi0[flat]; }
  bool is_axis0_nyquist(std::size_t flat) const { return impl_->nyq0[flat] != 0; }

  std::vector<int> shape() const;

  friend bool operator==(const Grid& a, const Grid& b);

 private:
  struct Impl {
    int dim = 0;
    int n = 0;
    std::size_t size = 0;
    std::array<double, 3> lengths{};
    double cell_volume = 0.0;
    double volume = 0.0;
    std::array<std::vector<double>, 3> k;
    std::vector<double> xi2;
    std::vector<double> xi0;
    std::vector<unsigned char> nyq0;
  };
  std::shared_ptr<const Impl> impl_;
};

enum class Space { physical, frequency };

class ComplexField {
 public:
  explicit ComplexField(Grid grid, Space space = Space::physical);
  ComplexField(Grid grid, std::vector<cplx> values, Space space);

  const Grid& grid() const { return grid_; }
  Space space() const { return space_; }
  std::size_t size() const { return values_.size(); }

  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  // Discrete L2 norm sqrt(dV * sum |f|^2).  With the unitary transform the
  // same expression is valid on frequency-space coefficients.
  double l2_norm() const;
  double max_abs() const;
  // Largest |Im f| relative to max |f| (physical space).
  double imag_residue() const;
  void project_real();

  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);
  ComplexField& operator*=(cplx scale);

 private:
  Grid grid_;
  std::vector<cplx> values_;
  Space space_;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(cplx s, ComplexField a);

enum class Direction { forward, inverse };

// Unitary DFT (1/sqrt(N) both ways).  Forward requires physical-space
// input, inverse requires frequency-space input.
ComplexField transform(const ComplexField& field, Direction direction);

// Unitary multi-dimensional DFT on a raw row-major buffer.  sign = -1 is the
// forward (e^{-i k x}) direction.  Thread safe.
void unitary_dft(std::span<const int> shape, std::span<const cplx> in, std::span<cplx> out,
                 int sign);

enum class Symbol {
  laplacian,               // -|xi|^2
  omega,                   // |xi|
  omega_inv,               // 1/|xi|, 0 at the zero mode
  dx,                      // i xi^(1), 0 at the axis-0 Nyquist index
  omega_inv_dx,            // i xi^(1)/|xi|, 0 at zero and axis-0 Nyquist
  bracket_pow,             // <xi>^s
  schrodinger_group,       // e^{-i t |xi|^2}  (U(t) = e^{i t Laplacian})
  wave_group,              // e^{-/+ i t |xi|} for sign +/-
  wave_source_propagator,  // sin(|xi| t)/|xi|, t at the zero mode
  dealias,                 // 2/3-rule mask
};

struct MultiplierParams {
  double s = 0.0;  // exponent for bracket_pow
  double t = 0.0;  // time for group symbols
  int sign = +1;   // branch for wave_group
};

class Multiplier {
 public:
  Multiplier(Grid grid, Symbol name, std::vector<cplx> symbol);

  const Grid& grid() const { return grid_; }
  Symbol name() const { return name_; }
  std::span<const cplx> symbol() const { return symbol_; }
  const cplx& operator[](std::size_t i) const { return symbol_[i]; }

 private:
  Grid grid_;
  Symbol name_;
  std::vector<cplx> symbol_;
};

Multiplier make_multiplier(const Grid& grid, Symbol name, MultiplierParams params = {});
// Name lookup ("laplacian", "omega_inv_dx", ...).  Unknown names raise
// ConfigError.
Multiplier make_multiplier(const Grid& grid, std::string_view name, MultiplierParams params = {});
Symbol symbol_from_name(std::string_view name);
std::string_view symbol_name(Symbol s);

ComplexField apply_multiplier(const Multiplier& m, const ComplexField& field);
void apply_multiplier_inplace(const Multiplier& m, ComplexField& field);

// Physical -> frequency -> multiply -> physical.
ComplexField apply_in_physical(const Multiplier& m, const ComplexField& field);

}  // namespace zr
