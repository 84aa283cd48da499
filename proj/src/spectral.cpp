#include "zr/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "zr/errors.hpp"

namespace zr {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread safe; execution with the new-array interface
// is.  Plans are created once per (shape, sign) and kept for the process
// lifetime.
class PlanCache {
 public:
  fftw_plan get(const std::vector<int>& shape, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto key = std::make_pair(shape, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    auto* a = fftw_alloc_complex(total);
    auto* b = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(), a, b, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& kv : plans_) fftw_destroy_plan(kv.second);
  }

 private:
  std::mutex mu_;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

// ---------------------------------------------------------------- Grid

Grid::Grid(int dim, int points_per_axis, double box_length)
    : Grid(dim, points_per_axis, std::array<double, 3>{box_length, box_length, box_length}) {}

Grid::Grid(int dim, int n, std::array<double, 3> box_lengths) {
  if (dim != 2 && dim != 3) throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(dim));
  if (n < 4 || !is_power_of_two(n))
    throw ConfigError("points_per_axis must be a power of two >= 4, got " + std::to_string(n));
  for (int a = 0; a < dim; ++a) {
    double L = box_lengths[static_cast<std::size_t>(a)];
    if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("box length must be positive and finite");
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->n = n;
  impl->lengths = box_lengths;
  if (dim == 2) impl->lengths[2] = 0.0;
  impl->size = 1;
  impl->cell_volume = 1.0;
  impl->volume = 1.0;
  for (int a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    impl->size *= static_cast<std::size_t>(n);
    impl->cell_volume *= impl->lengths[ua] / n;
    impl->volume *= impl->lengths[ua];
    impl->k[ua].resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      int m = j < n / 2 ? j : j - n;
      impl->k[ua][static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * m / impl->lengths[ua];
    }
  }
  impl->xi2.resize(impl->size);
  impl->xi0.resize(impl->size);
  impl->nyq0.resize(impl->size);
  for (std::size_t f = 0; f < impl->size; ++f) {
    std::size_t rem = f;
    double s = 0.0;
    int j0 = 0;
    for (int a = dim - 1; a >= 0; --a) {
      int j = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
      double k = impl->k[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
      s += k * k;
      if (a == 0) j0 = j;
    }
    impl->xi2[f] = s;
    impl->xi0[f] = impl->k[0][static_cast<std::size_t>(j0)];
    impl->nyq0[f] = (j0 == n / 2) ? 1 : 0;
  }
  impl_ = std::move(impl);
}

double Grid::spacing(int axis) const { return box_length(axis) / impl_->n; }

double Grid::coordinate(int axis, int j) const {
  return -0.5 * box_length(axis) + j * spacing(axis);
}

std::span<const double> Grid::wavenumbers(int axis) const {
  return impl_->k[static_cast<std::size_t>(axis)];
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  const auto n = static_cast<std::size_t>(impl_->n);
  for (int a = impl_->dim - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t Grid::flatten(std::array<int, 3> idx) const {
  std::size_t f = 0;
  const auto n = static_cast<std::size_t>(impl_->n);
  for (int a = 0; a < impl_->dim; ++a) f = f * n + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  return f;
}

std::vector<int> Grid::shape() const { return std::vector<int>(static_cast<std::size_t>(impl_->dim), impl_->n); }

bool operator==(const Grid& a, const Grid& b) {
  if (a.impl_ == b.impl_) return true;
  return a.impl_->dim == b.impl_->dim && a.impl_->n == b.impl_->n && a.impl_->lengths == b.impl_->lengths;
}

// ---------------------------------------------------------- ComplexField

ComplexField::ComplexField(Grid grid, Space space)
    : grid_(std::move(grid)), values_(grid_.size(), cplx{0.0, 0.0}), space_(space) {}

ComplexField::ComplexField(Grid grid, std::vector<cplx> values, Space space)
    : grid_(std::move(grid)), values_(std::move(values)), space_(space) {
  if (values_.size() != grid_.size())
    throw ContractViolation("field value count " + std::to_string(values_.size()) +
                            " does not match grid size " + std::to_string(grid_.size()));
}

double ComplexField::l2_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return std::sqrt(s * grid_.cell_volume());
}

double ComplexField::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ComplexField::imag_residue() const {
  double m = max_abs();
  if (m == 0.0) return 0.0;
  double r = 0.0;
  for (const auto& v : values_) r = std::max(r, std::abs(v.imag()));
  return r / m;
}

void ComplexField::project_real() {
  for (auto& v : values_) v = cplx{v.real(), 0.0};
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  if (!(grid_ == other.grid_) || space_ != other.space_)
    throw ContractViolation("field addition requires matching grid and representation");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  if (!(grid_ == other.grid_) || space_ != other.space_)
    throw ContractViolation("field subtraction requires matching grid and representation");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator*=(cplx scale) {
  for (auto& v : values_) v *= scale;
  return *this;
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
ComplexField operator*(cplx s, ComplexField a) { return a *= s; }

// ------------------------------------------------------------- transforms

void unitary_dft(std::span<const int> shape, std::span<const cplx> in, std::span<cplx> out, int sign) {
  std::vector<int> dims(shape.begin(), shape.end());
  std::size_t total = 1;
  for (int s : dims) total *= static_cast<std::size_t>(s);
  if (in.size() != total || out.size() != total)
    throw ContractViolation("DFT buffer size does not match shape");
  fftw_plan plan = plan_cache().get(dims, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  // Out-of-place plans need distinct buffers.
  std::vector<cplx> scratch;
  const cplx* src = in.data();
  if (in.data() == out.data()) {
    scratch.assign(in.begin(), in.end());
    src = scratch.data();
  }
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(src)),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(total));
  for (auto& v : out) v *= scale;
}

ComplexField transform(const ComplexField& field, Direction direction) {
  const bool forward = direction == Direction::forward;
  if (forward && field.space() != Space::physical)
    throw ContractViolation("forward transform requires a physical-space field");
  if (!forward && field.space() != Space::frequency)
    throw ContractViolation("inverse transform requires a frequency-space field");
  ComplexField out(field.grid(), forward ? Space::frequency : Space::physical);
  const auto shape = field.grid().shape();
  unitary_dft(shape, field.values(), out.values(), forward ? -1 : +1);
  return out;
}

// ------------------------------------------------------------- multipliers

Multiplier::Multiplier(Grid grid, Symbol name, std::vector<cplx> symbol)
    : grid_(std::move(grid)), name_(name), symbol_(std::move(symbol)) {
  if (symbol_.size() != grid_.size()) throw ContractViolation("multiplier size does not match grid");
}

Multiplier make_multiplier(const Grid& grid, Symbol name, MultiplierParams params) {
  const bool group = name == Symbol::schrodinger_group || name == Symbol::wave_group ||
                     name == Symbol::wave_source_propagator;
  if (group && !std::isfinite(params.t)) throw ConfigError("group symbol time must be finite");
  if (name == Symbol::wave_group && params.sign != 1 && params.sign != -1)
    throw ConfigError("wave_group sign must be +1 or -1");

  const std::size_t size = grid.size();
  std::vector<cplx> sym(size);
  const int n = grid.points_per_axis();
  const int cutoff = n / 3;
  for (std::size_t f = 0; f < size; ++f) {
    const double k2 = grid.xi_squared(f);
    const double k = std::sqrt(k2);
    const double k0 = grid.xi_axis0(f);
    const bool zero = k2 == 0.0;
    const bool nyq = grid.is_axis0_nyquist(f);
    switch (name) {
      case Symbol::laplacian:
        sym[f] = -k2;
        break;
      case Symbol::omega:
        sym[f] = k;
        break;
      case Symbol::omega_inv:
        sym[f] = zero ? 0.0 : 1.0 / k;
        break;
      case Symbol::dx:
        sym[f] = nyq ? cplx{0.0, 0.0} : cplx{0.0, k0};
        break;
      case Symbol::omega_inv_dx:
        sym[f] = (zero || nyq) ? cplx{0.0, 0.0} : cplx{0.0, k0 / k};
        break;
      case Symbol::bracket_pow:
        sym[f] = std::pow(1.0 + k2, 0.5 * params.s);
        break;
      case Symbol::schrodinger_group:
        sym[f] = std::polar(1.0, -params.t * k2);
        break;
      case Symbol::wave_group:
        sym[f] = std::polar(1.0, -params.sign * params.t * k);
        break;
      case Symbol::wave_source_propagator:
        sym[f] = zero ? params.t : std::sin(k * params.t) / k;
        break;
      case Symbol::dealias: {
        auto idx = grid.unflatten(f);
        bool keep = true;
        for (int a = 0; a < grid.dim(); ++a)
          keep = keep && std::abs(grid.mode(idx[static_cast<std::size_t>(a)])) <= cutoff;
        sym[f] = keep ? 1.0 : 0.0;
        break;
      }
    }
  }
  return Multiplier(grid, name, std::move(sym));
}

namespace {
constexpr std::pair<std::string_view, Symbol> kSymbolNames[] = {
    {"laplacian", Symbol::laplacian},
    {"omega", Symbol::omega},
    {"omega_inv", Symbol::omega_inv},
    {"dx", Symbol::dx},
    {"omega_inv_dx", Symbol::omega_inv_dx},
    {"bracket_pow", Symbol::bracket_pow},
    {"schrodinger_group", Symbol::schrodinger_group},
    {"wave_group", Symbol::wave_group},
    {"wave_source_propagator", Symbol::wave_source_propagator},
    {"dealias", Symbol::dealias},
};
}  // namespace

Symbol symbol_from_name(std::string_view name) {
  for (const auto& [n, s] : kSymbolNames)
    if (n == name) return s;
  throw ConfigError("unknown multiplier name '" + std::string(name) + "'");
}

std::string_view symbol_name(Symbol s) {
  for (const auto& [n, sym] : kSymbolNames)
    if (sym == s) return n;
  return "?";
}

Multiplier make_multiplier(const Grid& grid, std::string_view name, MultiplierParams params) {
  return make_multiplier(grid, symbol_from_name(name), params);
}

void apply_multiplier_inplace(const Multiplier& m, ComplexField& field) {
  if (!(m.grid() == field.grid())) throw ContractViolation("multiplier and field live on different grids");
  if (field.space() != Space::frequency)
    throw ContractViolation("multipliers act on frequency-space fields");
  auto v = field.values();
  const auto s = m.symbol();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= s[i];
}

ComplexField apply_multiplier(const Multiplier& m, const ComplexField& field) {
  ComplexField out = field;
  apply_multiplier_inplace(m, out);
  return out;
}

ComplexField apply_in_physical(const Multiplier& m, const ComplexField& field) {
  ComplexField hat = transform(field, Direction::forward);
  apply_multiplier_inplace(m, hat);
  return transform(hat, Direction::inverse);
}

}  // namespace zr
