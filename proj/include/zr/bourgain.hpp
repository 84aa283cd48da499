#pragma once

// Discrete space-time norms and numerical checks of the linear and
// Strichartz estimates.
//
// Conventions.  c_{m,k} are the unitary space-time DFT coefficients of a
// SpaceTimeField (time-major).  A free wave U(t)g has its time spectrum at
// tau = -p(xi), so the modulation weight is <tau + p(xi)>.  Norms carry the
// lattice cell weight:
//   ||f||_{X^{s,b}}^2 = dt dV sum <xi>^{2s} <tau + p>^{2b} |c|^2
// which is the continuous norm with measure d tau d xi / (2 pi)^{d+1}.

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "zr/errors.hpp"
#include "zr/exponents.hpp"
#include "zr/spacetime.hpp"

namespace zr {

// Hypothesis of an estimate not met.
class PreconditionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

enum class DispersionKind { schrodinger, wave_plus, wave_minus, none };

struct Dispersion {
  DispersionKind kind = DispersionKind::schrodinger;
  double scale = 1.0;

  // p(xi): scale |xi|^2, +scale |xi|, -scale |xi| or 0
  double phase(double xi_squared) const;
};

Dispersion dispersion_from_name(std::string_view name);  // ConfigError if unknown
std::string_view dispersion_name(DispersionKind kind);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double xsb_norm(const SpaceTimeField& f, double s, double b, const Dispersion& disp);
// H^{s,b}: weights <xi>^s <tau>^b
double hsb_norm(const SpaceTimeField& f, double s, double b);
// l2 over xi of the l1 over tau of <xi>^s <tau + p>^{-1} |f^|, continuum measure as above
double ys_norm(const SpaceTimeField& f, double s, const Dispersion& disp);
// L^q_t L^r_x with quadrature weights; kInf means max over that axis.
double mixed_norm(const SpaceTimeField& f, double q, double r);
// H^s norm of one time slice
double hs_slice_norm(const SpaceTimeField& f, int j, double s);

// U(-t) f(t) slice by slice.
SpaceTimeField demodulate(const SpaceTimeField& f, const Dispersion& disp);
// lambda_T(t) U(t) u0 on the window (no cutoff when T is empty).
SpaceTimeField free_evolution(const ComplexField& u0, double half_window, int n_t, const Dispersion& disp,
                              std::optional<double> cutoff_T = std::nullopt);
// w(t) = int_0^t U(t - s) q(s) ds.  Trapezoid rule on e^{isp} q^(s), exact
// for forcing on the dispersion surface, second order otherwise.
SpaceTimeField retarded_convolution(const SpaceTimeField& q, const Dispersion& disp);
void multiply_by_cutoff(SpaceTimeField& f, double T);

// Random field band-limited in space (|k_i| <= kmax) and time
// (|m| <= mt_max, tau_m = 2 pi m / (2 T_w)).  Coefficients are drawn in a
// fixed mode order, so refining the lattice samples the same function.
struct BandLimitedSpec {
  int kmax = 3;
  int mt_max = 4;
  // multiply each spatial mode by e^{-itp}, placing the field near the
  // dispersion surface (meaningful only together with a cutoff)
  std::optional<Dispersion> carrier;
  std::optional<double> cutoff_T;
};

SpaceTimeField random_band_limited_field(const Grid& grid, double half_window, int n_t, const BandLimitedSpec& spec,
                                         std::uint64_t seed);

// ------------------------------------------------------------ estimates

struct LinearEstimateReport {
  double lhs = 0.0;   // ||lambda_T U *_R q||_{X^{s,b}}
  double rhs1 = 0.0;  // T^{1-b+b'} ||q||_{X^{s,b'}} + T^{1/2-b} ||q||_{Y^s}
  double rhs2 = 0.0;  // T^{1-b+b'} ||q||_{X^{s,b'}}
  double ratio1 = 0.0;
  bool estimate2_applicable = false;  // b' > -1/2
  std::optional<double> ratio2;
  // ||lambda_T U(t) u0||_{X^{s,b}} / ||u0||_{H^s} when u0 is given
  std::optional<double> homogeneous_ratio;
};

// Throws PreconditionError unless b' <= 0 <= b <= b' + 1, 0 < T <= 1 and
// the window holds the cutoff support (T_w >= 2T).
LinearEstimateReport check_linear_estimate(const SpaceTimeField& q, const ComplexField* u0, double T, double s,
                                           double b, double b_prime, const Dispersion& disp);

struct StrichartzReport {
  StrichartzExponents exponents;
  double lhs = 0.0;
  double v_norm = 0.0;
  double ratio = 0.0;       // lhs / ||v||_2
  double T_theta = 0.0;     // T^theta
  double scaled_ratio = 0.0;  // ratio / T^theta
};

// w = lambda_T w0 fixes the support; v^ = <sigma>^{a'} w^, so
// F^{-1}(<sigma>^{-a'} v^) = w has support in |t| <= 2T.  Reports
// ||F^{-1}(<sigma>^{-a} |v^|)||_{L^q L^r} / ||v||_2.  A wave dispersion
// selects the eta = 1, r = 2 case.
StrichartzReport strichartz_ratio(const SpaceTimeField& w0, double a, double a_prime, double gamma, double eta,
                                  double b0, int d, double T, const Dispersion& disp = {});

// sup_t ||f(t)||_{H^s} / ||f||_{X^{s,b}}
double embedding_ratio(const SpaceTimeField& f, double s, double b, const Dispersion& disp);

// --------------------------------------------------------------- batches

struct BatchSetup {
  Grid grid;
  double half_window = 4.0;
  int n_t = 256;
  BandLimitedSpec spec;
  std::size_t count = 50;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct BatchReport {
  std::vector<double> ratios;  // field order
  double max_ratio = 0.0;
  std::size_t argmax = 0;
};

// Field i uses derive_seed(seed, i).
BatchReport embedding_batch(const BatchSetup& setup, double s, double b, const Dispersion& disp);
// Reports ratio2 when applicable, else ratio1.
BatchReport linear_estimate_batch(const BatchSetup& setup, double T, double s, double b, double b_prime,
                                  const Dispersion& disp);

}  // namespace zr
