#pragma once

// Randomized brute-force check of the five frequency inequalities used in
// the trilinear estimates.  <x> = (1 + |x|^2)^{1/2}.
//
//   1: <xi> <= <xi2> + <xi1 - xi2> + <xi - xi1>
//   2: <xi>^2 <~ <tau1 +/- |xi1|> + <tau - tau1 + |xi - xi1|^2> + <tau + |xi|^2>,  |xi| > 2|xi - xi1|
//   3: <xi>^2 <~ <tau - tau1 + |xi - xi1|^2> + <tau1 - |xi1|^2> + <tau +/- |xi|>
//   4: <xi> <tau +/- |xi|^2>^{1/2} >~ |tau|^{1/2}
//   5: <xi1> <xi - xi1> <tau - tau1 + |xi - xi1|^2>^{1/2} <tau1 - |xi1|^2>^{1/2} >~ |tau|^{1/2}
//
// Ratios are LHS/RHS for the upper bounds (1-3) and the small side over the
// large side for the lower bounds (4, 5), so "bounded" always means the
// ratio stays below a constant.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace zr {

using Vec = std::array<double, 3>;  // trailing entries unused for d = 2

double ineq1_ratio(int d, const Vec& xi, const Vec& xi1, const Vec& xi2);
double ineq2_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1, int sign);
double ineq3_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1, int sign);
double ineq4_ratio(int d, const Vec& xi, double tau, int sign);
double ineq5_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1);
// ineq 3 with <tau1 + |xi1|^2> in the middle term (the form the case
// analysis of its proof actually bounds).  Diagnostic only.
double ineq3_variant_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1, int sign);

struct FuzzOptions {
  std::size_t n_samples = 1000000;
  std::uint64_t seed = 1;
  int d = 2;
  double magnitude_lo = 1e-2;
  double magnitude_hi = 1e3;
  double tau_max = 1e6;
  std::array<double, 5> caps{1.0, 10.0, 10.0, 1.01, 10.0};
  // Fixed shard count keeps results independent of the thread count.
  int shards = 64;
  int threads = 1;
};

struct FuzzSample {
  Vec xi{}, xi1{}, xi2{};
  double tau = 0.0, tau1 = 0.0;
};

struct BranchResult {
  int sign = +1;  // 0 for inequalities without a branch
  double max_ratio = 0.0;
  FuzzSample argmax;
  bool finite = true;
};

struct InequalityResult {
  std::string id;
  double cap = 0.0;
  std::vector<BranchResult> branches;
  std::size_t samples = 0;
  std::size_t rejected = 0;  // ineq 2 only
  bool pass = false;
};

struct ResonancePoint {
  double R = 0.0;
  int sign = +1;
  double ratio = 0.0;
  FuzzSample sample;
};

struct FuzzReport {
  int d = 2;
  std::uint64_t seed = 0;
  std::size_t n_samples = 0;
  std::vector<InequalityResult> results;
  bool all_pass = false;
  // Explicit family xi = (R, 0..), xi1 = ((R -/+ 1)/2, 0..), tau = -/+R,
  // tau1 = |xi1|^2 on which every modulation in ineq 3 is O(1).
  std::vector<ResonancePoint> ineq3_resonance;
  // Same random samples, middle term <tau1 + |xi1|^2>.
  std::array<double, 2> ineq3_variant_max{0.0, 0.0};
};

FuzzReport verify_symbolic_inequalities(const FuzzOptions& options);

}  // namespace zr
