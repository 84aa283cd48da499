#include "zr/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "zr/errors.hpp"

namespace zr {

ExponentParams derive(double b1, double b2, int d) {
  ExponentParams p;
  p.b1 = b1;
  p.b2 = b2;
  p.d = d;
  p.k2 = 1.0 - 2.0 * b2;
  p.c1 = 1.0 - b1;
  p.c2 = 1.0 - b2;
  p.b0 = b1;
  return p;
}

double plus_part(double x, double eps) {
  if (x > 0.0) return x;
  if (x == 0.0) return eps;
  return 0.0;
}

std::vector<std::string> ConstraintReport::violated() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.pass) out.push_back(c.id);
  return out;
}

namespace {

ConstraintCheck less(std::string id, std::string formula, double lhs, double rhs) {
  return {std::move(id), std::move(formula), lhs, rhs, true, lhs < rhs};
}

ConstraintCheck less_eq(std::string id, std::string formula, double lhs, double rhs) {
  return {std::move(id), std::move(formula), lhs, rhs, false, lhs <= rhs};
}

}  // namespace

ConstraintReport check_constraints(const ExponentParams& p) {
  const double b1 = p.b1, b2 = p.b2, d = p.d;
  ConstraintReport r;
  auto& c = r.checks;
  c.push_back(less("base_b1", "1/2 < b1", 0.5, b1));
  // two-sided range reported as one entry: lhs = b2, rhs = 1/2, pass needs b2 >= 0 too
  ConstraintCheck base2 = less_eq("base_b2", "0 <= b2 <= 1/2", b2, 0.5);
  base2.pass = b2 >= 0.0 && b2 <= 0.5;
  c.push_back(base2);
  c.push_back(less("auxi_1", "b1 < (2+2b2)/(d+4b2)", b1, (2.0 + 2.0 * b2) / (d + 4.0 * b2)));
  c.push_back(less("auxi_2", "b1 < 2/d", b1, 2.0 / d));
  c.push_back(less("auxi_3", "b2 < c1 = 1-b1", b2, p.c1));
  c.push_back(less("auxi_4", "(1+d)/2 < 2b1 + (1+d/2)b2", (1.0 + d) / 2.0, 2.0 * b1 + (1.0 + d / 2.0) * b2));
  c.push_back(less("I521_auxi_1", "b2 < (2/3)b1 - d/12", b2, 2.0 * b1 / 3.0 - d / 12.0));
  c.push_back(less_eq("I521_auxi_2", "b2 <= 1 - d/4", b2, 1.0 - d / 4.0));
  if (p.d == 2)
    c.push_back(less("I521_auxi_3", "b2 < 1/6 (d=2)", b2, 1.0 / 6.0));
  else
    c.push_back(less("I521_auxi_3", "b2 < 1/12 (d=3)", b2, 1.0 / 12.0));
  r.admissible = std::all_of(c.begin(), c.end(), [](const ConstraintCheck& x) { return x.pass; });
  return r;
}

std::vector<std::pair<std::string, double>> ThetaReport::entries() const {
  return {{"theta1", theta1},     {"theta21", theta21},   {"theta221", theta221}, {"theta222", theta222},
          {"theta223", theta223}, {"theta23", theta23},   {"theta241", theta241}, {"theta242", theta242},
          {"theta243", theta243}, {"theta41", theta41},   {"theta42", theta42},   {"theta521", theta521}};
}

ThetaReport theta_values(const ExponentParams& p) {
  const double b1 = p.b1, b2 = p.b2, b0 = p.b0, d = p.d, e = p.eps_plus;
  if (b1 == b2) throw SingularityError("theta521 is singular at b1 == b2");
  ThetaReport t;
  t.theta1 = (1.0 - d * b1 / (2.0 * b1 + 1.0)) * (2.5 - b1);
  t.theta21 = (1.0 - b1 * (d + 4.0 * b2) / (2.0 + 2.0 * b2)) * (b2 + 1.5 - b1);
  t.theta23 = t.theta21;
  t.theta221 = (1.0 - d * b1 / 2.0) * (1.5 - b1);
  t.theta223 = t.theta221;
  t.theta222 = (1.0 - d * b1 / 2.0) * (1.0 - plus_part(b1 - b2 - 0.5, e));
  t.theta241 = t.theta221;
  t.theta242 = t.theta222;
  t.theta243 = t.theta223;
  t.theta41 = (1.0 - b0 * (d + 2.0) / (4.0 * b1 + 1.0)) * (b1 + b2 + 0.5 - plus_part(b1 + b2 - 1.0, e));
  t.theta42 = (1.0 - (d + 2.0) * b1 / (4.0 * b1 + 1.0)) * (1.5 - plus_part(0.0, e));
  const double g = b1 - b2;
  t.theta521 = 2.0 * (1.0 - b0 * (2.0 * b2 + d / 2.0) / (2.0 * g)) * g * (1.0 - plus_part(g - 0.5, e) / g);
  t.theta22 = std::min({t.theta221, t.theta222, t.theta223});
  t.min_theta = std::numeric_limits<double>::infinity();
  for (const auto& [name, v] : t.entries()) t.min_theta = std::min(t.min_theta, v);
  return t;
}

Rectangle stated_box(int d) {
  if (d == 2) return Rectangle{0.75, 5.0 / 6.0, 0.0, 1.0 / 6.0, true};
  if (d == 3) return Rectangle{0.5, 13.0 / 20.0, 0.0, 1.0 / 12.0, false};
  throw ConfigError("d must be 2 or 3");
}

RegionReport region_scan(int d, double resolution, double margin, int threads, std::size_t max_witnesses) {
  if (d != 2 && d != 3) throw ConfigError("d must be 2 or 3");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ConfigError("resolution must be positive");
  if (resolution > 1e-2) throw ConfigError("resolution must be <= 1e-2");
  if (!(margin >= 0.0)) throw ConfigError("margin must be >= 0");

  const int n = static_cast<int>(std::lround(0.5 / resolution));
  RegionReport rep;
  rep.d = d;
  rep.resolution = 0.5 / n;
  rep.margin = margin;
  rep.n_b1 = n - 1;  // open interval (1/2, 1)
  rep.n_b2 = n + 1;  // closed interval [0, 1/2]
  rep.stated_box_rect = stated_box(d);
  rep.cells.resize(static_cast<std::size_t>(rep.n_b1) * rep.n_b2);

  auto fill_row = [&](int i) {
    const double b1 = (n + i) / (2.0 * n);
    for (int j = 0; j < rep.n_b2; ++j) {
      const double b2 = j / (2.0 * n);
      ExponentParams p = derive(b1, b2, d);
      ConstraintReport cr = check_constraints(p);
      RegionCell& cell = rep.cells[static_cast<std::size_t>(i - 1) * rep.n_b2 + j];
      cell.b1 = b1;
      cell.b2 = b2;
      cell.admissible = cr.admissible;
      cell.violated = cr.violated();
      if (b1 != b2) cell.min_theta = theta_values(p).min_theta;
    }
  };
  const int nt = std::max(1, threads);
  if (nt == 1) {
    for (int i = 1; i < n; ++i) fill_row(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w)
      pool.emplace_back([&, w] {
        for (int i = 1 + w; i < n; i += nt) fill_row(i);
      });
    for (auto& th : pool) th.join();
  }

  // summaries, single threaded and in lattice order
  double lo1 = 2, hi1 = -1, lo2 = 2, hi2 = -1;
  const Rectangle& box = rep.stated_box_rect;
  std::map<std::string, std::size_t> counts;
  for (const auto& c : rep.cells) {
    if (c.admissible) {
      ++rep.admissible_count;
      lo1 = std::min(lo1, c.b1);
      hi1 = std::max(hi1, c.b1);
      lo2 = std::min(lo2, c.b2);
      hi2 = std::max(hi2, c.b2);
    }
    const bool in_b1 = c.b1 >= box.b1_lo + margin && c.b1 <= box.b1_hi - margin;
    const bool in_b2 = (box.b2_lo_closed ? c.b2 >= box.b2_lo : c.b2 >= box.b2_lo + margin) &&
                       c.b2 <= box.b2_hi - margin;
    if (in_b1 && in_b2) {
      ++rep.box_samples;
      if (!c.admissible) {
        ++rep.box_failures;
        for (const auto& v : c.violated) ++counts[v];
        if (rep.witnesses.size() < max_witnesses) rep.witnesses.push_back({c.b1, c.b2, c.violated});
      }
    }
  }
  rep.box_contained = rep.box_samples > 0 && rep.box_failures == 0;
  if (rep.admissible_count > 0) rep.bounding_box = Rectangle{lo1, hi1, lo2, hi2, true};
  for (const auto& [k, v] : counts) rep.failure_counts.emplace_back(k, v);

  // b1 rows admissible for every lattice b2 inside the stated b2 range
  std::optional<double> ulo, uhi;
  for (int i = 1; i < n; ++i) {
    bool all = true, any = false;
    for (int j = 0; j < rep.n_b2; ++j) {
      const RegionCell& c = rep.cells[static_cast<std::size_t>(i - 1) * rep.n_b2 + j];
      const bool in = (box.b2_lo_closed ? c.b2 >= box.b2_lo : c.b2 > box.b2_lo) && c.b2 < box.b2_hi;
      if (!in) continue;
      any = true;
      all = all && c.admissible;
    }
    if (any && all) {
      const double b1 = (n + i) / (2.0 * n);
      if (!ulo) ulo = b1;
      uhi = b1;
    } else if (ulo) {
      break;  // first contiguous run only
    }
  }
  if (ulo) rep.uniform_b1_interval = std::make_pair(*ulo, *uhi);
  return rep;
}

StrichartzExponents strichartz_exponents(double a, double a_prime, double gamma, double eta, double b0, int d,
                                         bool wave, double eps_plus) {
  StrichartzExponents s;
  if (wave) eta = 1.0;
  auto need = [&](bool ok, const char* what) {
    if (!ok) s.violated.emplace_back(what);
  };
  need(b0 > 0.5, "b0 > 1/2");
  need(a >= 0.0, "a >= 0");
  need(a_prime >= 0.0, "a' >= 0");
  need(gamma >= 0.0 && gamma <= 1.0, "0 <= gamma <= 1");
  need((1.0 - gamma) * a <= b0, "(1-gamma) a <= b0");
  need(gamma * a <= a_prime, "gamma a <= a'");
  need(eta > 0.0 && eta <= 1.0, "0 < eta <= 1");
  need(d == 2 || d == 3, "d in {2, 3}");
  if (!s.violated.empty()) return s;

  s.feasible = true;
  const double inv_q = 0.5 * (1.0 - eta * (1.0 - gamma) * a / b0);
  s.q = inv_q > 0.0 ? 1.0 / inv_q : std::numeric_limits<double>::infinity();
  s.delta = (1.0 - eta) * (1.0 - gamma) * a / b0;
  if (wave) {
    s.r = 2.0;
    s.delta = 0.0;
  } else {
    const double inv_r = 0.5 - s.delta / d;
    s.r = inv_r > 0.0 ? 1.0 / inv_r : std::numeric_limits<double>::infinity();
  }
  const double ga = gamma * a;
  s.theta = ga == 0.0 ? 0.0 : ga * (1.0 - plus_part(a_prime - 0.5, eps_plus) / a_prime);
  return s;
}

}  // namespace zr
