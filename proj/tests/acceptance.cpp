// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "zr/bourgain.hpp"
#include "zr/evolution.hpp"
#include "zr/exponents.hpp"
#include "zr/harness.hpp"
#include "zr/inequalities.hpp"
#include "zr/picard.hpp"
#include "zr/rng.hpp"

using namespace zr;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// independent restatement of the typeset constraint list
std::map<std::string, bool> constraint_oracle(double b1, double b2, int d) {
  std::map<std::string, bool> m;
  m["base_b1"] = 2 * b1 > 1;
  m["base_b2"] = !(b2 < 0) && !(2 * b2 > 1);
  m["auxi_1"] = b1 * (d + 4 * b2) < 2 + 2 * b2;
  m["auxi_2"] = d * b1 < 2;
  m["auxi_3"] = b1 + b2 < 1;
  m["auxi_4"] = 4 * b1 + (2 + d) * b2 > 1 + d;
  m["I521_auxi_1"] = 12 * b2 < 8 * b1 - d;
  m["I521_auxi_2"] = 4 * b2 <= 4 - d;
  m["I521_auxi_3"] = d == 2 ? 6 * b2 < 1 : 12 * b2 < 1;
  return m;
}

Outcome c1_region_d2() {
  const auto t0 = std::chrono::steady_clock::now();
  const RegionReport r = region_scan(2, 1e-3, 2e-3);
  const bool corner = check_constraints(derive(0.75, 0.0, 2)).violated() == std::vector<std::string>{"auxi_4"};
  // b2 = 1 - b1 stays inside the base ranges and clear of I521 auxi 3 only for b1 > 5/6
  bool diagonal = true;
  for (double b1 = 0.84; b1 < 0.995; b1 += 0.01)
    diagonal = diagonal && check_constraints(derive(b1, 1.0 - b1, 2)).violated() == std::vector<std::string>{"auxi_3"};
  const double t = seconds_since(t0);
  return {r.box_contained && r.box_failures == 0 && corner && diagonal && t < 10.0,
          fmt("box samples %zu, failures %zu; (0.75,0) fails only auxi_4: %s; (b1,1-b1), b1 in [0.84,0.99], "
              "fails only auxi_3: %s; %.2f s",
              r.box_samples, r.box_failures, corner ? "yes" : "no", diagonal ? "yes" : "no", t)};
}

Outcome c2_region_d3() {
  const RegionReport r = region_scan(3, 1e-3, 2e-3);
  bool witnesses_auxi4 = !r.witnesses.empty();
  for (const auto& w : r.witnesses)
    witnesses_auxi4 = witnesses_auxi4 && std::count(w.violated.begin(), w.violated.end(), "auxi_4") == 1;
  std::size_t auxi4 = 0;
  for (const auto& [id, n] : r.failure_counts)
    if (id == "auxi_4") auxi4 = n;

  SplitMix64 g(2024);
  std::size_t mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const int d = i % 2 ? 3 : 2;
    const double b1 = g.uniform(0.4, 1.1), b2 = g.uniform(-0.1, 0.6);
    const auto want = constraint_oracle(b1, b2, d);
    const auto rep = check_constraints(derive(b1, b2, d));
    bool all = true;
    for (const auto& c : rep.checks) {
      const auto it = want.find(c.id);
      if (it == want.end() || it->second != c.pass) ++mismatches;
      if (it != want.end()) all = all && it->second;
    }
    if (rep.checks.size() != want.size() || rep.admissible != all) ++mismatches;
  }
  return {!r.box_contained && r.box_failures == r.box_samples && auxi4 == r.box_samples && witnesses_auxi4 &&
              mismatches == 0,
          fmt("stated box excluded: %zu of %zu samples fail, auxi_4 violated at %zu; %zu witnesses; "
              "oracle mismatches %zu / 1000",
              r.box_failures, r.box_samples, auxi4, r.witnesses.size(), mismatches)};
}

Outcome c3_theta() {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 g(31);
  int found = 0, bad = 0;
  double lo = std::numeric_limits<double>::infinity();
  while (found < 100) {
    const double b1 = g.uniform(0.5, 1.0), b2 = g.uniform(0.0, 0.5);
    const auto p = derive(b1, b2, 2);
    if (!check_constraints(p).admissible) continue;
    ++found;
    const auto t = theta_values(p);
    if (t.entries().size() != 12) ++bad;
    for (const auto& [name, v] : t.entries())
      if (!(std::isfinite(v) && v > 0.0)) ++bad;
    if (!(t.min_theta > 0.0)) ++bad;
    lo = std::min(lo, t.min_theta);
  }
  const double t = seconds_since(t0);
  return {bad == 0 && t < 1.0, fmt("100 admissible points, non-positive or non-finite gains %d, smallest min_theta "
                                   "%.4g; %.3f s",
                                   bad, lo, t)};
}

Outcome c4_inequalities() {
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool pass = true;
  for (int d : {2, 3}) {
    FuzzOptions o;
    o.d = d;
    o.n_samples = 1000000;
    o.seed = 1;
    o.caps = {1.0, 10.0, 10.0, 1.01, 10.0};
    const FuzzReport rep = verify_symbolic_inequalities(o);
    detail << "d=" << d << ":";
    for (const auto& ir : rep.results) {
      double m = 0;
      bool finite = true;
      for (const auto& b : ir.branches) {
        m = std::max(m, b.max_ratio);
        finite = finite && b.finite && std::isfinite(b.max_ratio);
      }
      const bool ok = finite && m <= ir.cap && ir.samples >= o.n_samples;
      pass = pass && ok;
      detail << ' ' << ir.id << '=' << fmt("%.4g", m) << (ok ? "" : "(>cap)");
    }
    detail << "; ";
    if (d == 3) {
      const auto& last = rep.ineq3_resonance.back();
      detail << fmt("ineq3 resonant family at R=%.0e gives %.3g; ", last.R, last.ratio);
    }
  }
  const double t = seconds_since(t0);
  detail << fmt("%.1f s", t);
  return {pass && t < 60.0, detail.str()};
}

Outcome c5_conservation() {
  SimConfig c;
  c.dim = 2;
  c.points_per_axis = 64;
  c.box_length = 32 * pi;
  c.params = ModelParams{-1.0, 1.0, 0.5, 1.0};
  c.initial.recipe = InitialRecipe::gaussian;
  c.initial.h1_norm = 1.0;
  c.t_end = 1.0;
  c.stride = 1000000;
  double de[2], dm[2];
  for (int r = 0; r < 2; ++r) {
    c.dt = r == 0 ? 1e-3 : 5e-4;
    const Trajectory tr = run_simulation(c);
    const auto& a = tr.diagnostics.front();
    const auto& b = tr.diagnostics.back();
    de[r] = std::abs(b.energy - a.energy);
    dm[r] = std::abs(b.mass - a.mass) / a.mass;
  }
  const double ratio = de[0] / de[1];
  const double mdrift = std::max(dm[0], dm[1]);
  return {mdrift <= 1e-10 && ratio >= 3.5 && ratio <= 4.5,
          fmt("mass drift %.2e; energy drift %.3e (dt) vs %.3e (dt/2), ratio %.4f", mdrift, de[0], de[1], ratio)};
}

Outcome c6_linear_flow() {
  const Grid g(2, 16, 2 * pi);
  const ModelParams lin{0.0, 0.0, 0.0, 1.0};
  ZRState s{ComplexField(g), ComplexField(g), ComplexField(g), std::nullopt, std::nullopt};
  const int m0 = 3, m1 = -2;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ix = g.unflatten(i);
    s.psi[i] = std::polar(0.7, m0 * g.coordinate(0, ix[0]) + m1 * g.coordinate(1, ix[1]));
  }
  const double dt = 1e-2, k2 = m0 * m0 + m1 * m1;
  double per_step = 0.0;
  ZRState cur = s;
  for (int n = 1; n <= 100; ++n) {
    cur = strang_step(cur, dt, lin);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(cur.psi[i] - s.psi[i] * std::polar(1.0, -k2 * n * dt)) / 0.7);
    per_step = std::max(per_step, err / n);
  }

  // reversibility with every coupling switched on
  const Grid h(2, 32, 12.0);
  const ModelParams full{-1.0, 1.0, 0.5, 0.7};
  ZRState w{ComplexField(h), ComplexField(h), ComplexField(h), std::nullopt, std::nullopt};
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto ix = h.unflatten(i);
    const double x = h.coordinate(0, ix[0]), y = h.coordinate(1, ix[1]);
    w.psi[i] = std::exp(-(x * x + y * y) / 8.0) * std::polar(1.0, 0.4 * x);
    w.rho[i] = 0.3 * std::exp(-(x * x + y * y) / 6.0);
    w.phi[i] = 0.2 * std::exp(-(x - 1) * (x - 1) / 5.0 - y * y / 7.0);
  }
  const ZRState back = linear_flow(linear_flow(w, 1e-3, full), -1e-3, full);
  double rev = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
    rev = std::max({rev, std::abs(back.psi[i] - w.psi[i]), std::abs(back.rho[i] - w.rho[i]),
                    std::abs(back.phi[i] - w.phi[i])});
  return {per_step <= 1e-12 && rev <= 1e-12,
          fmt("plane-wave phase error per step %.2e; L(dt)L(-dt) - I = %.2e", per_step, rev)};
}

Outcome c7_picard() {
  SimConfig c;
  c.points_per_axis = 32;
  c.box_length = 8 * pi;
  c.initial.width = 2.0;
  c.initial.h1_norm = 1e-3;
  const ModelParams p{-1.0, 1.0, 0.5, 1.0};
  c.params = p;
  const PlusMinusState pm = decompose(with_time_derivatives(make_initial_state(c), p));
  PicardOptions o;
  o.n_t = 64;
  o.keep_iterates = false;
  const PicardResult r = picard_iterate(pm, 0.1, 6, p, o);
  bool decreasing = true;
  for (std::size_t n = 1; n < r.differences.size(); ++n) decreasing = decreasing && r.differences[n] <= r.differences[n - 1];
  std::string ratios;
  for (const auto& q : r.ratios) ratios += fmt(" d%d/d%d=%s", q.n, q.n - 1, q.value ? fmt("%.3g", *q.value).c_str() : "floor");

  // couplings off
  const ModelParams off{0.0, 0.0, 0.0, 1.0};
  PicardOptions o2 = o;
  o2.acoustic_sources = false;
  o2.keep_iterates = true;
  c.params = off;
  c.initial.h1_norm = 1e-1;
  const PicardResult z = picard_iterate(decompose(with_time_derivatives(make_initial_state(c), off)), 0.1, 2, off, o2);
  bool same = z.iterates.size() == 3;
  for (int k = 0; same && k < kPicardComponents; ++k) {
    const auto a = z.iterates[0].fields[k].values();
    const auto b = z.iterates[1].fields[k].values();
    same = std::equal(a.begin(), a.end(), b.begin(), b.end());
  }
  return {r.contracting && r.contraction_factor < 0.5 && decreasing && same,
          fmt("32x32 grid, 64 time points, T=0.1: factor %.3g,%s; differences non-increasing: %s; "
              "couplings off, iterate 1 == iterate 0: %s",
              r.contraction_factor, ratios.c_str(), decreasing ? "yes" : "no", same ? "yes" : "no")};
}

BatchSetup batch(int n_t, std::size_t count, double cutoff) {
  BatchSetup b{Grid(2, 16, 2 * pi)};
  b.half_window = 4.0;
  b.n_t = n_t;
  b.count = count;
  b.seed = 1;
  b.spec.kmax = 3;
  b.spec.mt_max = 4;
  b.spec.carrier = Dispersion{};
  b.spec.cutoff_T = cutoff;
  return b;
}

Outcome c8_embedding() {
  const Dispersion S{};
  const double a = embedding_batch(batch(256, 100, 1.0), 1.0, 0.6, S).max_ratio;
  const double b = embedding_batch(batch(512, 100, 1.0), 1.0, 0.6, S).max_ratio;
  const double drift = std::abs(b - a) / a;
  return {std::isfinite(a) && std::isfinite(b) && drift < 0.2,
          fmt("100 fields, batch max %.6f (256 time points) vs %.6f (512), drift %.2e", a, b, drift)};
}

Outcome c9_linear_estimate() {
  const Dispersion S{};
  bool pass = true;
  std::string detail = "50 fields, (s,b,b')=(1,0.6,-0.35):";
  for (double T : {0.25, 0.5, 1.0}) {
    const double a = linear_estimate_batch(batch(256, 50, 2 * T), T, 1.0, 0.6, -0.35, S).max_ratio;
    const double b = linear_estimate_batch(batch(512, 50, 2 * T), T, 1.0, 0.6, -0.35, S).max_ratio;
    const double drift = std::abs(b - a) / a;
    pass = pass && std::isfinite(a) && std::isfinite(b) && drift < 0.2;
    detail += fmt(" T=%g max %.4f/%.4f drift %.1e;", T, a, b, drift);
  }
  return {pass, detail};
}

Outcome c10_epsilon() {
  SimConfig base;
  base.points_per_axis = 64;
  base.box_length = 20.0;
  base.params = ModelParams{-1.0, 1.0, 0.0, 1.0};
  base.initial.amplitude = 2.0;
  base.initial.width = 1.0;
  base.dt = 1e-3;
  const std::vector<double> eps{1.0, 0.5, 0.25, 0.125};
  std::string detail;
  bool pass = true;
  for (double factor : {1e6, 5.0}) {
    base.divergence_factor = factor;
    const EpsilonScaling es = epsilon_scaling(base, eps, 2.0, 1);
    detail += fmt("growth factor %g: T_proxy", factor);
    for (const auto& r : es.rows) detail += fmt(" %.3f%s", r.t_proxy, r.diverged ? "*" : "");
    detail += es.alpha_hat ? fmt(", alpha_hat %.4f; ", *es.alpha_hat) : std::string(", no fit; ");
    pass = pass && es.non_decreasing && es.alpha_hat && *es.alpha_hat >= 0.0;
  }
  detail += "* = proxy tripped";
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, c1_region_d2},   {2, c2_region_d3}, {3, c3_theta}, {4, c4_inequalities}, {5, c5_conservation},
      {6, c6_linear_flow}, {7, c7_picard},    {8, c8_embedding}, {9, c9_linear_estimate}, {10, c10_epsilon},
  };
  int failed = 0;
  for (const auto& [n, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", n, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
