#pragma once

// Parameter bookkeeping for the nonlinear estimates: derived exponents,
// admissibility constraints, the theta gains and the (b1, b2) region scan.

#include <optional>
#include <string>
#include <vector>

namespace zr {

struct ExponentParams {
  double b1 = 0.0;
  double b2 = 0.0;
  int d = 2;
  double k2 = 0.0;  // 1 - 2 b2
  double c1 = 0.0;  // 1 - b1
  double c2 = 0.0;  // 1 - b2
  double b0 = 0.0;  // b1 unless overridden
  double eps_plus = 1e-6;
};

ExponentParams derive(double b1, double b2, int d);

// [x]_+ : x for x > 0, eps for x == 0, 0 for x < 0.
double plus_part(double x, double eps);

struct ConstraintCheck {
  std::string id;
  std::string formula;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = true;
  bool pass = false;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;
  bool admissible = false;

  std::vector<std::string> violated() const;
};

// Ids: base_b1, base_b2, auxi_1 .. auxi_4, I521_auxi_1 .. I521_auxi_3.
ConstraintReport check_constraints(const ExponentParams& p);

struct ThetaReport {
  double theta1 = 0, theta21 = 0, theta221 = 0, theta222 = 0, theta223 = 0, theta23 = 0;
  double theta241 = 0, theta242 = 0, theta243 = 0, theta41 = 0, theta42 = 0, theta521 = 0;
  double theta22 = 0;  // min(theta221, theta222, theta223)
  double min_theta = 0;

  // Name/value pairs of the twelve gains in a fixed order.
  std::vector<std::pair<std::string, double>> entries() const;
};

// Throws SingularityError when b1 == b2.
ThetaReport theta_values(const ExponentParams& p);

// ---------------------------------------------------------------- region

struct RegionCell {
  double b1 = 0.0;
  double b2 = 0.0;
  bool admissible = false;
  std::vector<std::string> violated;
  // min theta when it can be evaluated (b1 != b2)
  std::optional<double> min_theta;
};

struct Witness {
  double b1 = 0.0;
  double b2 = 0.0;
  std::vector<std::string> violated;
};

struct Rectangle {
  double b1_lo = 0, b1_hi = 0;  // open
  double b2_lo = 0, b2_hi = 0;  // [lo, hi) for d = 2, (lo, hi) for d = 3
  bool b2_lo_closed = true;
};

struct RegionReport {
  int d = 2;
  double resolution = 0.0;
  double margin = 0.0;
  int n_b1 = 0;
  int n_b2 = 0;
  std::vector<RegionCell> cells;  // row-major in b1, then b2
  std::size_t admissible_count = 0;
  // pointwise extent of the admissible set
  std::optional<Rectangle> bounding_box;

  Rectangle stated_box_rect;
  std::size_t box_samples = 0;
  std::size_t box_failures = 0;
  bool box_contained = false;
  std::vector<Witness> witnesses;  // capped
  std::vector<std::pair<std::string, std::size_t>> failure_counts;

  // Largest b1 interval such that every scanned b2 in the box's b2 range
  // is admissible (requirement uniform in b2).
  std::optional<std::pair<double, double>> uniform_b1_interval;
};

// Scans b1 in (1/2, 1) and b2 in [0, 1/2] on a lattice with the given
// spacing.  Throws ConfigError when resolution > 1e-2 or <= 0.
// threads <= 1 runs inline; the result does not depend on the thread count.
RegionReport region_scan(int d, double resolution, double margin = 2e-3, int threads = 1,
                         std::size_t max_witnesses = 20);

Rectangle stated_box(int d);

// ------------------------------------------------------------- strichartz

struct StrichartzExponents {
  bool feasible = false;
  std::vector<std::string> violated;
  double q = 0.0;  // may be +infinity
  double r = 0.0;  // may be +infinity
  double delta = 0.0;
  double theta = 0.0;
};

// wave = true forces eta = 1 and r = 2.
StrichartzExponents strichartz_exponents(double a, double a_prime, double gamma, double eta, double b0, int d,
                                         bool wave = false, double eps_plus = 1e-6);

}  // namespace zr
