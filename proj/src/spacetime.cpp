#include "zr/spacetime.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "zr/errors.hpp"

namespace zr {

SpaceTimeField::SpaceTimeField(Grid grid, double half_window, int n_t)
    : SpaceTimeField(grid, half_window, n_t, std::vector<cplx>(static_cast<std::size_t>(n_t) * grid.size())) {}

SpaceTimeField::SpaceTimeField(Grid grid, double half_window, int n_t, std::vector<cplx> values)
    : grid_(std::move(grid)), half_window_(half_window), n_t_(n_t), values_(std::move(values)) {
  if (!(half_window > 0.0) || !std::isfinite(half_window))
    throw ConfigError("time window half-length must be positive");
  if (n_t < 4 || (n_t & (n_t - 1)) != 0)
    throw ConfigError("time samples must be a power of two >= 4, got " + std::to_string(n_t));
  if (values_.size() != static_cast<std::size_t>(n_t) * grid_.size())
    throw ContractViolation("space-time value count does not match lattice");
}

double SpaceTimeField::tau(int m) const {
  const int mode = m < n_t_ / 2 ? m : m - n_t_;
  return 2.0 * std::numbers::pi * mode / (2.0 * half_window_);
}

std::span<cplx> SpaceTimeField::slice(int j) {
  return std::span<cplx>(values_).subspan(static_cast<std::size_t>(j) * grid_.size(), grid_.size());
}

std::span<const cplx> SpaceTimeField::slice(int j) const {
  return std::span<const cplx>(values_).subspan(static_cast<std::size_t>(j) * grid_.size(), grid_.size());
}

ComplexField SpaceTimeField::slice_field(int j) const {
  auto s = slice(j);
  return ComplexField(grid_, std::vector<cplx>(s.begin(), s.end()), Space::physical);
}

void SpaceTimeField::set_slice(int j, const ComplexField& f) {
  if (!(f.grid() == grid_) || f.space() != Space::physical)
    throw ContractViolation("slice must be a physical-space field on the same grid");
  auto s = slice(j);
  std::copy(f.values().begin(), f.values().end(), s.begin());
}

std::vector<int> SpaceTimeField::shape() const {
  std::vector<int> s{n_t_};
  for (int a = 0; a < grid_.dim(); ++a) s.push_back(grid_.points_per_axis());
  return s;
}

std::vector<cplx> SpaceTimeField::spectrum() const {
  std::vector<cplx> out(values_.size());
  unitary_dft(shape(), values_, out, -1);
  return out;
}

SpaceTimeField SpaceTimeField::from_spectrum(Grid grid, double half_window, int n_t, std::span<const cplx> coeffs) {
  SpaceTimeField f(std::move(grid), half_window, n_t);
  unitary_dft(f.shape(), coeffs, f.values(), +1);
  return f;
}

double SpaceTimeField::l2_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return std::sqrt(s * cell_weight());
}

}  // namespace zr
