#include "zr/inequalities.hpp"

#include <cmath>
#include <thread>

#include "zr/errors.hpp"
#include "zr/rng.hpp"

namespace zr {

namespace {

double norm2(int d, const Vec& v) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += v[i] * v[i];
  return s;
}

Vec sub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double br(double x) { return std::sqrt(1.0 + x * x); }
double brv(int d, const Vec& v) { return std::sqrt(1.0 + norm2(d, v)); }

}  // namespace

double ineq1_ratio(int d, const Vec& xi, const Vec& xi1, const Vec& xi2) {
  return brv(d, xi) / (brv(d, xi2) + brv(d, sub(xi1, xi2)) + brv(d, sub(xi, xi1)));
}

double ineq2_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1, int sign) {
  const double x2 = norm2(d, xi);
  const double lhs = 1.0 + x2;
  const double rhs = br(tau1 + sign * std::sqrt(norm2(d, xi1))) + br(tau - tau1 + norm2(d, sub(xi, xi1))) +
                     br(tau + x2);
  return lhs / rhs;
}

double ineq3_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1, int sign) {
  const double x2 = norm2(d, xi);
  const double rhs = br(tau - tau1 + norm2(d, sub(xi, xi1))) + br(tau1 - norm2(d, xi1)) +
                     br(tau + sign * std::sqrt(x2));
  return (1.0 + x2) / rhs;
}

double ineq3_variant_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1, int sign) {
  const double x2 = norm2(d, xi);
  const double rhs = br(tau - tau1 + norm2(d, sub(xi, xi1))) + br(tau1 + norm2(d, xi1)) +
                     br(tau + sign * std::sqrt(x2));
  return (1.0 + x2) / rhs;
}

double ineq4_ratio(int d, const Vec& xi, double tau, int sign) {
  return std::sqrt(std::abs(tau)) / (brv(d, xi) * std::sqrt(br(tau + sign * norm2(d, xi))));
}

double ineq5_ratio(int d, const Vec& xi, const Vec& xi1, double tau, double tau1) {
  const Vec z = sub(xi, xi1);
  const double den = brv(d, xi1) * brv(d, z) * std::sqrt(br(tau - tau1 + norm2(d, z))) *
                     std::sqrt(br(tau1 - norm2(d, xi1)));
  return std::sqrt(std::abs(tau)) / den;
}

namespace {

struct Sampler {
  SplitMix64 rng;
  int d;
  double llo, lhi, tmax;

  double component() {
    const double m = std::exp(rng.uniform(llo, lhi));
    return rng.sign() * m;
  }
  Vec vec() {
    Vec v{0, 0, 0};
    for (int i = 0; i < d; ++i) v[i] = component();
    return v;
  }
  double tau() { return rng.uniform(-tmax, tmax); }
};

struct Acc {
  double max = -1.0;
  FuzzSample arg;
  bool finite = true;
  void add(double r, const FuzzSample& s) {
    if (!std::isfinite(r)) finite = false;
    if (r > max) {
      max = r;
      arg = s;
    }
  }
  void merge(const Acc& o) {
    finite = finite && o.finite;
    if (o.max > max) {
      max = o.max;
      arg = o.arg;
    }
  }
};

// per-shard accumulators: [ineq][branch] with branch 0 -> +, 1 -> -
struct ShardResult {
  std::array<std::array<Acc, 2>, 5> acc;
  std::array<Acc, 2> variant;
  std::size_t rejected = 0;
};

constexpr std::size_t kMaxRejections = 1000;

ShardResult run_shard(const FuzzOptions& o, int shard, std::size_t count) {
  ShardResult r;
  auto sampler = [&](int which) {
    return Sampler{SplitMix64(derive_seed(o.seed, static_cast<std::uint64_t>(which) * 1000003ULL + shard)), o.d,
                   std::log(o.magnitude_lo), std::log(o.magnitude_hi), o.tau_max};
  };
  const int d = o.d;
  {
    Sampler s = sampler(1);
    for (std::size_t i = 0; i < count; ++i) {
      FuzzSample f;
      f.xi = s.vec();
      f.xi1 = s.vec();
      f.xi2 = s.vec();
      r.acc[0][0].add(ineq1_ratio(d, f.xi, f.xi1, f.xi2), f);
    }
  }
  {
    Sampler s = sampler(2);
    for (std::size_t i = 0; i < count; ++i) {
      FuzzSample f;
      Vec z;
      std::size_t tries = 0;
      // draw xi and xi - xi1 independently, keep pairs with |xi| > 2|xi - xi1|
      do {
        f.xi = s.vec();
        z = s.vec();
        if (++tries > kMaxRejections) throw Error("ineq 2 rejection sampling did not terminate");
        if (4.0 * norm2(d, z) >= norm2(d, f.xi)) ++r.rejected;
      } while (4.0 * norm2(d, z) >= norm2(d, f.xi));
      f.xi1 = sub(f.xi, z);
      f.tau = s.tau();
      f.tau1 = s.tau();
      r.acc[1][0].add(ineq2_ratio(d, f.xi, f.xi1, f.tau, f.tau1, +1), f);
      r.acc[1][1].add(ineq2_ratio(d, f.xi, f.xi1, f.tau, f.tau1, -1), f);
    }
  }
  {
    Sampler s = sampler(3);
    for (std::size_t i = 0; i < count; ++i) {
      FuzzSample f;
      f.xi = s.vec();
      f.xi1 = s.vec();
      f.tau = s.tau();
      f.tau1 = s.tau();
      r.acc[2][0].add(ineq3_ratio(d, f.xi, f.xi1, f.tau, f.tau1, +1), f);
      r.acc[2][1].add(ineq3_ratio(d, f.xi, f.xi1, f.tau, f.tau1, -1), f);
      r.variant[0].add(ineq3_variant_ratio(d, f.xi, f.xi1, f.tau, f.tau1, +1), f);
      r.variant[1].add(ineq3_variant_ratio(d, f.xi, f.xi1, f.tau, f.tau1, -1), f);
    }
  }
  {
    Sampler s = sampler(4);
    for (std::size_t i = 0; i < count; ++i) {
      FuzzSample f;
      f.xi = s.vec();
      f.tau = s.tau();
      r.acc[3][0].add(ineq4_ratio(d, f.xi, f.tau, +1), f);
      r.acc[3][1].add(ineq4_ratio(d, f.xi, f.tau, -1), f);
    }
  }
  {
    Sampler s = sampler(5);
    for (std::size_t i = 0; i < count; ++i) {
      FuzzSample f;
      f.xi = s.vec();
      f.xi1 = s.vec();
      f.tau = s.tau();
      f.tau1 = s.tau();
      r.acc[4][0].add(ineq5_ratio(d, f.xi, f.xi1, f.tau, f.tau1), f);
    }
  }
  return r;
}

}  // namespace

FuzzReport verify_symbolic_inequalities(const FuzzOptions& o) {
  if (o.n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (o.d != 2 && o.d != 3) throw ConfigError("d must be 2 or 3");
  if (!(o.magnitude_lo > 0.0 && o.magnitude_hi > o.magnitude_lo)) throw ConfigError("bad magnitude range");
  if (!(o.tau_max > 0.0)) throw ConfigError("tau_max must be positive");
  if (o.shards < 1) throw ConfigError("shards must be >= 1");

  const int S = o.shards;
  std::vector<ShardResult> shards(static_cast<std::size_t>(S));
  auto count_for = [&](int s) {
    const std::size_t base = o.n_samples / S, extra = o.n_samples % S;
    return base + (static_cast<std::size_t>(s) < extra ? 1 : 0);
  };
  const int nt = std::max(1, std::min(o.threads, S));
  if (nt == 1) {
    for (int s = 0; s < S; ++s) shards[s] = run_shard(o, s, count_for(s));
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nt));
    for (int w = 0; w < nt; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int s = w; s < S; s += nt) shards[s] = run_shard(o, s, count_for(s));
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ShardResult total;
  for (const auto& s : shards) {
    for (int i = 0; i < 5; ++i)
      for (int b = 0; b < 2; ++b) total.acc[i][b].merge(s.acc[i][b]);
    for (int b = 0; b < 2; ++b) total.variant[b].merge(s.variant[b]);
    total.rejected += s.rejected;
  }

  FuzzReport rep;
  rep.d = o.d;
  rep.seed = o.seed;
  rep.n_samples = o.n_samples;
  const bool branched[5] = {false, true, true, true, false};
  rep.all_pass = true;
  for (int i = 0; i < 5; ++i) {
    InequalityResult ir;
    ir.id = "ineq" + std::to_string(i + 1);
    ir.cap = o.caps[i];
    ir.samples = o.n_samples;
    if (i == 1) ir.rejected = total.rejected;
    ir.pass = true;
    for (int b = 0; b < (branched[i] ? 2 : 1); ++b) {
      BranchResult br;
      br.sign = branched[i] ? (b == 0 ? +1 : -1) : 0;
      br.max_ratio = total.acc[i][b].max;
      br.argmax = total.acc[i][b].arg;
      br.finite = total.acc[i][b].finite && std::isfinite(br.max_ratio);
      ir.pass = ir.pass && br.finite && br.max_ratio <= ir.cap;
      ir.branches.push_back(br);
    }
    rep.all_pass = rep.all_pass && ir.pass;
    rep.results.push_back(ir);
  }
  rep.ineq3_variant_max = {total.variant[0].max, total.variant[1].max};

  for (double R : {1e1, 1e2, 1e3, 1e4, 1e5}) {
    for (int sign : {+1, -1}) {
      ResonancePoint p;
      p.R = R;
      p.sign = sign;
      p.sample.xi = {R, 0, 0};
      p.sample.xi1 = {(R - sign) / 2.0, 0, 0};
      p.sample.tau = -sign * R;
      p.sample.tau1 = norm2(o.d, p.sample.xi1);
      p.ratio = ineq3_ratio(o.d, p.sample.xi, p.sample.xi1, p.sample.tau, p.sample.tau1, sign);
      rep.ineq3_resonance.push_back(p);
    }
  }
  return rep;
}

}  // namespace zr
