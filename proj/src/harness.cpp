#include "zr/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "zr/bourgain.hpp"
#include "zr/errors.hpp"
#include "zr/exponents.hpp"
#include "zr/inequalities.hpp"
#include "zr/model.hpp"
#include "zr/picard.hpp"

namespace zr {

using ojson = nlohmann::ordered_json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

constexpr const char* kProxyLabel =
    "divergence proxy: a run stops once the sup norm of any field exceeds "
    "run.divergence_factor times the largest initial sup norm (harness convention)";

// JSON has no inf/nan; spell them out
ojson num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

ojson num(const std::optional<double>& x) { return x ? num(*x) : ojson(nullptr); }

void log_line(const RunContext& ctx, const std::string& s) {
  if (ctx.log) *ctx.log << s << '\n';
}

std::filesystem::path prepare_out(const RunContext& ctx) {
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) throw ConfigError("--out: cannot create '" + ctx.out_dir.string() + "': " + ec.message());
  return ctx.out_dir;
}

std::optional<std::uint64_t> master_seed(const KvConfig& c, const RunContext& ctx) {
  const auto from_file = c.get_u64("seed");
  return ctx.seed ? ctx.seed : from_file;
}

class Report {
 public:
  Report(std::string command, const KvConfig& config, std::optional<std::uint64_t> seed)
      : start_(std::chrono::steady_clock::now()) {
    j_["command"] = std::move(command);
    j_["tool_version"] = kToolVersion;
    j_["seed"] = seed ? ojson(*seed) : ojson(nullptr);
    ojson cfg = ojson::object();
    for (const auto& [k, v] : config.entries()) cfg[k] = v;
    j_["config"] = cfg;
  }
  ojson& operator[](const char* key) { return j_[key]; }

  void write(const std::filesystem::path& path, const RunContext& ctx, int exit_code) {
    j_["exit_code"] = exit_code;
    if (ctx.timing)
      j_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j_.dump(2) << '\n';
  }

 private:
  ojson j_;
  std::chrono::steady_clock::time_point start_;
};

// Validation messages from the library use struct field names.
std::string config_key_message(const std::string& msg) {
  static const std::pair<const char*, const char*> map[] = {
      {"dim:", "grid.d:"},
      {"points_per_axis:", "grid.N:"},
      {"box_length:", "grid.L:"},
      {"dt_max:", "run.dt_max:"},
      {"dt:", "run.dt:"},
      {"t_end:", "run.t_end:"},
      {"stride:", "run.stride:"},
      {"divergence_factor:", "run.divergence_factor:"},
      {"seed:", "initial.seed:"},
      {"W must", "model.W must"},
      {"epsilon must", "model.epsilon must"},
      {"sigma2 and D", "model.sigma2 and model.D"},
  };
  for (const auto& [from, to] : map)
    if (msg.rfind(from, 0) == 0) return to + msg.substr(std::strlen(from));
  return msg;
}

InitialRecipe recipe_from_name(const std::string& s) {
  if (s == "gaussian") return InitialRecipe::gaussian;
  if (s == "plane_wave") return InitialRecipe::plane_wave;
  if (s == "random_band_limited") return InitialRecipe::random_band_limited;
  throw ConfigError("initial.recipe: unknown recipe '" + s + "' (gaussian, plane_wave, random_band_limited)");
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << header << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

std::vector<std::string> diag_row(const Diagnostics& d) {
  return {format_double(d.t),           format_double(d.mass),   format_double(d.energy),
          format_double(d.max_abs_psi), format_double(d.l2_rho), format_double(d.l2_phi)};
}

ojson sim_summary(const SimConfig& c) {
  ojson j;
  j["d"] = c.dim;
  j["N"] = c.points_per_axis;
  j["L"] = c.box_length;
  j["dt"] = c.dt;
  j["t_end"] = c.t_end;
  j["sigma2"] = c.params.sigma2;
  j["W"] = c.params.W;
  j["D"] = c.params.D;
  j["epsilon"] = c.params.epsilon;
  j["dealias"] = c.dealias;
  j["divergence_factor"] = c.divergence_factor;
  return j;
}

}  // namespace

// ------------------------------------------------------------ sim config

SimConfig sim_config_from(const KvConfig& c, std::optional<std::uint64_t> seed) {
  SimConfig s;
  s.dim = static_cast<int>(c.get_int("grid.d", s.dim));
  s.points_per_axis = static_cast<int>(c.get_int("grid.N", s.points_per_axis));
  s.box_length = c.get_double("grid.L", s.box_length);
  s.dt = c.get_double("run.dt", s.dt);
  s.dt_max = c.get_double("run.dt_max", s.dt_max);
  s.t_end = c.get_double("run.t_end", s.t_end);
  s.stride = static_cast<int>(c.get_int("run.stride", s.stride));
  s.dealias = c.get_bool("run.dealias", s.dealias);
  s.divergence_factor = c.get_double("run.divergence_factor", s.divergence_factor);
  s.keep_snapshots = c.get_bool("run.snapshots", false);

  s.params.sigma2 = c.get_double("model.sigma2", s.params.sigma2);
  s.params.W = c.get_double("model.W", s.params.W);
  s.params.D = c.get_double("model.D", s.params.D);
  s.params.epsilon = c.get_double("model.epsilon", s.params.epsilon);
  const std::string sign = c.get_string("model.rho_source_sign", "derived");
  if (sign == "derived")
    s.params.rho_source_sign = RhoSourceSign::derived;
  else if (sign == "typeset")
    s.params.rho_source_sign = RhoSourceSign::typeset;
  else
    throw ConfigError("model.rho_source_sign: expected derived or typeset, got '" + sign + "'");
  s.params.cutoff_extra_terms = c.get_bool("model.cutoff_extra_terms", false);

  auto& in = s.initial;
  in.recipe = recipe_from_name(c.get_string("initial.recipe", "gaussian"));
  in.amplitude = c.get_double("initial.amplitude", in.amplitude);
  in.width = c.get_double("initial.width", in.width);
  in.h1_norm = c.get_double("initial.h1_norm");
  if (auto m = c.get_int_list("initial.mode")) {
    if (m->empty() || m->size() > 3) throw ConfigError("initial.mode: expected 1 to 3 integers");
    in.mode = {0, 0, 0};
    for (std::size_t i = 0; i < m->size(); ++i) in.mode[i] = static_cast<int>((*m)[i]);
  }
  in.seed = c.get_u64("initial.seed");
  if (!in.seed) in.seed = seed;
  in.kmax = static_cast<int>(c.get_int("initial.kmax", in.kmax));
  in.rho_amplitude = c.get_double("initial.rho_amplitude", in.rho_amplitude);
  in.phi_amplitude = c.get_double("initial.phi_amplitude", in.phi_amplitude);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(config_key_message(e.what()));
  }
  return s;
}

// -------------------------------------------------------------- snapshot

namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error("snapshot truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

constexpr char kMagic[8] = {'Z', 'R', 'S', 'N', 'A', 'P', '0', '1'};

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ZRState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const Grid& g = state.grid();
  out.write(kMagic, 8);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis()));
  for (int a = 0; a < g.dim(); ++a) put_le<double>(out, g.box_length(a));
  for (const ComplexField* f : {&state.psi, &state.rho, &state.phi})
    for (const auto& v : f->values()) {
      put_le<double>(out, v.real());
      put_le<double>(out, v.imag());
    }
}

ZRState read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw Error("not a snapshot file");
  if (get_le<std::uint32_t>(in) != 1) throw Error("unsupported snapshot version");
  const int d = static_cast<int>(get_le<std::uint32_t>(in));
  if (d != 2 && d != 3) throw Error("bad snapshot dimension");
  std::array<int, 3> n{};
  std::array<double, 3> L{};
  for (int a = 0; a < d; ++a) n[a] = static_cast<int>(get_le<std::uint32_t>(in));
  for (int a = 0; a < d; ++a) L[a] = get_le<double>(in);
  for (int a = 1; a < d; ++a)
    if (n[a] != n[0]) throw Error("snapshot with unequal axis counts");
  for (int a = 1; a < d; ++a)
    if (L[a] != L[0]) throw Error("snapshot with unequal box lengths");
  Grid g(d, n[0], L[0]);
  ZRState s{ComplexField(g), ComplexField(g), ComplexField(g), std::nullopt, std::nullopt};
  for (ComplexField* f : {&s.psi, &s.rho, &s.phi})
    for (auto& v : f->values()) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      v = cplx(re, im);
    }
  return s;
}

// -------------------------------------------------------------- simulate

int cmd_simulate(const KvConfig& c, const RunContext& ctx) {
  const auto seed = master_seed(c, ctx);
  const SimConfig sc = sim_config_from(c, seed);
  c.require_consumed();
  const auto dir = prepare_out(ctx);

  Report rep("simulate", c, seed);
  rep["divergence_proxy"] = kProxyLabel;
  rep["run"] = sim_summary(sc);
  const StepPlan plan = plan_steps(sc.t_end, sc.dt);
  int code = kExitOk;
  Trajectory full;
  const Trajectory* traj = &full;
  ojson result;
  try {
    full = run_simulation(sc);
    result["diverged"] = false;
  } catch (const DivergenceError& e) {
    code = kExitDivergence;
    if (e.partial()) full = *e.partial();
    result["diverged"] = true;
    result["divergence_time"] = e.time();
    result["message"] = e.what();
    log_line(ctx, std::string("diverged: ") + e.what());
  }
  result["steps"] = plan.steps;
  result["dt_used"] = plan.dt;
  result["last_good_time"] = traj->final_time;
  result["rows"] = traj->diagnostics.size();
  if (!traj->diagnostics.empty()) {
    const auto& a = traj->diagnostics.front();
    const auto& b = traj->diagnostics.back();
    result["mass_relative_drift"] = num(a.mass != 0 ? std::abs(b.mass - a.mass) / std::abs(a.mass) : 0.0);
    result["energy_drift"] = num(std::abs(b.energy - a.energy));
    result["energy_initial"] = num(a.energy);
  }

  std::vector<std::vector<std::string>> rows;
  for (const auto& d : traj->diagnostics) rows.push_back(diag_row(d));
  write_csv(dir / "simulate.csv", "t,mass,energy,max_abs_psi,l2_rho,l2_phi", rows);
  if (sc.keep_snapshots && !traj->snapshots.empty()) {
    std::filesystem::create_directories(dir / "snapshots");
    ojson files = ojson::array();
    for (std::size_t i = 0; i < traj->snapshots.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%06zu.bin", i);
      write_snapshot(dir / "snapshots" / name, traj->snapshots[i]);
      files.push_back({{"t", traj->times[i]}, {"file", std::string("snapshots/") + name}});
    }
    result["snapshots"] = files;
  }
  rep["result"] = result;
  rep.write(dir / "simulate.json", ctx, code);
  log_line(ctx, "simulate: " + std::to_string(rows.size()) + " rows -> " + (dir / "simulate.csv").string());
  return code;
}

// ------------------------------------------------------- epsilon scaling

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ConfigError("slope fit needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("slope fit needs distinct abscissae");
  return sxy / sxx;
}

EpsilonScaling epsilon_scaling(const SimConfig& base, const std::vector<double>& eps, double t_max, int threads) {
  if (eps.empty()) throw ConfigError("eps.list: must not be empty");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ConfigError("eps.list: values must be positive");
    if (i && !(eps[i] < eps[i - 1])) throw ConfigError("eps.list: values must be strictly descending");
  }
  if (!(t_max >= 0.0)) throw ConfigError("eps.t_max: must be >= 0");
  EpsilonScaling out;
  out.rows.resize(eps.size());
  auto job = [&](std::size_t i) {
    SimConfig c = base;
    c.params.epsilon = eps[i];
    c.t_end = t_max;
    c.keep_snapshots = false;
    EpsilonRow r{eps[i], t_max, false};
    try {
      (void)run_simulation(c);
    } catch (const DivergenceError& e) {
      // last step that stayed under the threshold
      r.t_proxy = e.partial() ? e.partial()->final_time : 0.0;
      r.diverged = true;
    }
    out.rows[i] = r;
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(eps.size())));
  if (nt == 1) {
    for (std::size_t i = 0; i < eps.size(); ++i) job(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> err(static_cast<std::size_t>(nt));
    for (int w = 0; w < nt; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < eps.size(); i += nt) job(i);
        } catch (...) {
          err[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : err)
      if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (out.rows[i].t_proxy < out.rows[i - 1].t_proxy) out.non_decreasing = false;
  std::vector<double> x, y;
  for (const auto& r : out.rows)
    if (r.t_proxy > 0.0) {
      x.push_back(std::log(1.0 / r.epsilon));
      y.push_back(std::log(r.t_proxy));
    }
  if (x.empty()) throw DivergenceError("degenerate fit: every run has T_proxy = 0", 0.0);
  if (x.size() >= 2) out.alpha_hat = least_squares_slope(x, y);
  return out;
}

int cmd_epsilon_scaling(const KvConfig& c, const RunContext& ctx) {
  const auto seed = master_seed(c, ctx);
  const SimConfig sc = sim_config_from(c, seed);
  const auto eps = c.get_double_list("eps.list");
  if (!eps) throw ConfigError("eps.list: required (comma separated, descending)");
  const double t_max = c.get_double("eps.t_max", sc.t_end);
  c.require_consumed();
  const auto dir = prepare_out(ctx);

  Report rep("epsilon-scaling", c, seed);
  rep["divergence_proxy"] = kProxyLabel;
  rep["run"] = sim_summary(sc);
  int code = kExitOk;
  ojson result;
  try {
    const EpsilonScaling es = epsilon_scaling(sc, *eps, t_max, ctx.threads);
    std::vector<std::vector<std::string>> rows;
    ojson jr = ojson::array();
    for (const auto& r : es.rows) {
      rows.push_back({format_double(r.epsilon), format_double(r.t_proxy), r.diverged ? "1" : "0"});
      jr.push_back({{"epsilon", r.epsilon}, {"T_proxy", r.t_proxy}, {"diverged", r.diverged}});
    }
    write_csv(dir / "epsilon_scaling.csv", "epsilon,T_proxy,diverged", rows);
    result["t_max"] = t_max;
    result["rows"] = jr;
    result["alpha_hat"] = num(es.alpha_hat);
    result["T_proxy_non_decreasing"] = es.non_decreasing;
    if (!es.non_decreasing) code = kExitCapExceeded;
    log_line(ctx, "epsilon-scaling: alpha_hat = " + (es.alpha_hat ? format_double(*es.alpha_hat) : "n/a") +
                      (es.non_decreasing ? "" : " (T_proxy decreased)"));
  } catch (const DivergenceError& e) {
    code = kExitDivergence;
    result["error"] = e.what();
    log_line(ctx, e.what());
  }
  rep["result"] = result;
  rep.write(dir / "epsilon_scaling.json", ctx, code);
  return code;
}

// ---------------------------------------------------------------- region

int cmd_region(const KvConfig& c, const RunContext& ctx) {
  const auto seed = master_seed(c, ctx);
  const int d = static_cast<int>(c.get_int("region.d", 2));
  const double res = c.get_double("region.resolution", 1e-3);
  const double margin = c.get_double("region.margin", 2e-3);
  const auto max_w = c.get_int("region.max_witnesses", 20);
  c.require_consumed();
  if (!(res > 0.0) || res > 1e-2) throw ConfigError("region.resolution: must lie in (0, 1e-2]");
  if (max_w < 0) throw ConfigError("region.max_witnesses: must be >= 0");
  const auto dir = prepare_out(ctx);
  const RegionReport r = region_scan(d, res, margin, ctx.threads, static_cast<std::size_t>(max_w));

  const std::string stem = "region_d" + std::to_string(d);
  {
    std::ofstream out(dir / (stem + ".csv"), std::ios::binary);
    out << "b1,b2,admissible,violated_ids,min_theta\n";
    for (const auto& cell : r.cells) {
      std::string v;
      for (const auto& id : cell.violated) v += (v.empty() ? "" : ";") + id;
      out << format_double(cell.b1) << ',' << format_double(cell.b2) << ',' << (cell.admissible ? 1 : 0) << ','
          << v << ',' << (cell.min_theta ? format_double(*cell.min_theta) : "") << '\n';
    }
  }

  auto rect = [](const Rectangle& x) {
    return ojson{{"b1", {x.b1_lo, x.b1_hi}}, {"b2", {x.b2_lo, x.b2_hi}}, {"b2_lower_closed", x.b2_lo_closed}};
  };
  Report rep("region", c, seed);
  ojson res_j;
  res_j["d"] = d;
  res_j["resolution"] = r.resolution;
  res_j["margin"] = r.margin;
  res_j["lattice"] = {{"n_b1", r.n_b1}, {"n_b2", r.n_b2}, {"cells", r.cells.size()}};
  res_j["admissible_cells"] = r.admissible_count;
  res_j["admissible_bounding_box"] = r.bounding_box ? rect(*r.bounding_box) : ojson(nullptr);
  res_j["stated_box"] = rect(r.stated_box_rect);
  res_j["box_samples"] = r.box_samples;
  res_j["box_failures"] = r.box_failures;
  res_j["stated_box_contained"] = r.box_contained;
  ojson fc = ojson::object();
  for (const auto& [k, v] : r.failure_counts) fc[k] = v;
  res_j["failure_counts"] = fc;
  ojson wj = ojson::array();
  for (const auto& w : r.witnesses) wj.push_back({{"b1", w.b1}, {"b2", w.b2}, {"violated", w.violated}});
  res_j["witnesses"] = wj;
  res_j["uniform_in_b2_b1_interval"] =
      r.uniform_b1_interval ? ojson{r.uniform_b1_interval->first, r.uniform_b1_interval->second} : ojson(nullptr);
  res_j["csv"] = stem + ".csv";
  rep["result"] = res_j;
  rep.write(dir / (stem + ".json"), ctx, kExitOk);
  log_line(ctx, "region d=" + std::to_string(d) + ": stated box " +
                    (r.box_contained ? "contained" : "NOT contained (" + std::to_string(r.box_failures) + " of " +
                                                         std::to_string(r.box_samples) + " samples fail)"));
  return kExitOk;
}

// ------------------------------------------------------------------ fuzz

namespace {

ojson vec_json(const Vec& v, int d) {
  ojson a = ojson::array();
  for (int i = 0; i < d; ++i) a.push_back(v[i]);
  return a;
}

ojson sample_json(const FuzzSample& s, int d) {
  return {{"xi", vec_json(s.xi, d)},
          {"xi1", vec_json(s.xi1, d)},
          {"xi2", vec_json(s.xi2, d)},
          {"tau", s.tau},
          {"tau1", s.tau1}};
}

}  // namespace

int cmd_fuzz(const KvConfig& c, const RunContext& ctx) {
  const auto seed_opt = master_seed(c, ctx);
  const std::uint64_t seed = seed_opt.value_or(1);
  FuzzOptions base;
  const long long n = c.get_int("fuzz.n", static_cast<long long>(base.n_samples));
  if (n < 1) throw ConfigError("fuzz.n: must be >= 1");
  base.n_samples = static_cast<std::size_t>(n);
  base.seed = seed;
  base.magnitude_lo = c.get_double("fuzz.magnitude_lo", base.magnitude_lo);
  base.magnitude_hi = c.get_double("fuzz.magnitude_hi", base.magnitude_hi);
  base.tau_max = c.get_double("fuzz.tau_max", base.tau_max);
  for (int i = 0; i < 5; ++i) base.caps[i] = c.get_double("fuzz.cap" + std::to_string(i + 1), base.caps[i]);
  base.threads = ctx.threads;
  const auto dims = c.get_int_list("fuzz.dims").value_or(std::vector<long long>{2, 3});
  c.require_consumed();
  const auto dir = prepare_out(ctx);

  Report rep("fuzz", c, seed);
  ojson per_d = ojson::array();
  bool all = true;
  for (long long d : dims) {
    FuzzOptions o = base;
    o.d = static_cast<int>(d);
    const FuzzReport fr = verify_symbolic_inequalities(o);
    all = all && fr.all_pass;
    ojson dj;
    dj["d"] = fr.d;
    dj["n_samples"] = fr.n_samples;
    ojson ineqs = ojson::array();
    for (const auto& ir : fr.results) {
      ojson ij;
      ij["id"] = ir.id;
      ij["cap"] = ir.cap;
      ij["pass"] = ir.pass;
      if (ir.id == "ineq2") ij["rejected_draws"] = ir.rejected;
      ojson br = ojson::array();
      for (const auto& b : ir.branches)
        br.push_back({{"branch", b.sign > 0 ? "+" : (b.sign < 0 ? "-" : "none")},
                      {"max_ratio", num(b.max_ratio)},
                      {"finite", b.finite},
                      {"argmax", sample_json(b.argmax, fr.d)}});
      ij["branches"] = br;
      ineqs.push_back(ij);
      log_line(ctx, "fuzz d=" + std::to_string(fr.d) + " " + ir.id + ": " + (ir.pass ? "within cap" : "CAP EXCEEDED"));
    }
    dj["inequalities"] = ineqs;
    ojson probe = ojson::array();
    for (const auto& p : fr.ineq3_resonance)
      probe.push_back({{"R", p.R}, {"branch", p.sign > 0 ? "+" : "-"}, {"ratio", num(p.ratio)}, {"sample", sample_json(p.sample, fr.d)}});
    dj["ineq3_resonance_probe"] = probe;
    dj["ineq3_with_tau1_plus_xi1_squared_max"] = {num(fr.ineq3_variant_max[0]), num(fr.ineq3_variant_max[1])};
    dj["all_pass"] = fr.all_pass;
    per_d.push_back(dj);
  }
  rep["result"] = {{"per_dimension", per_d}, {"all_pass", all}};
  const int code = all ? kExitOk : kExitCapExceeded;
  rep.write(dir / "fuzz.json", ctx, code);
  return code;
}

// ---------------------------------------------------------------- picard

int cmd_picard(const KvConfig& c, const RunContext& ctx) {
  const auto seed = master_seed(c, ctx);
  const SimConfig sc = sim_config_from(c, seed);
  const auto Ts = c.get_double_list("picard.T").value_or(std::vector<double>{0.1});
  const int iters = static_cast<int>(c.get_int("picard.iters", 6));
  PicardOptions o;
  o.n_t = static_cast<int>(c.get_int("picard.n_t", o.n_t));
  o.burn_in = static_cast<int>(c.get_int("picard.burn_in", o.burn_in));
  o.acoustic_sources = c.get_bool("picard.acoustic_sources", o.acoustic_sources);
  o.half_window = c.get_double("picard.half_window");
  o.keep_iterates = false;
  c.require_consumed();
  if (iters < 1) throw ConfigError("picard.iters: must be >= 1");
  const auto dir = prepare_out(ctx);

  const ZRState s0 = make_initial_state(sc);
  const PlusMinusState pm = decompose(with_time_derivatives(s0, sc.params));
  Report rep("picard", c, seed);
  rep["run"] = sim_summary(sc);
  ojson rows = ojson::array();
  std::vector<std::vector<std::string>> csv;
  for (double T : Ts) {
    const PicardResult r = picard_iterate(pm, T, iters, sc.params, o);
    ojson diffs = ojson::array(), ratios = ojson::array();
    for (double d : r.differences) diffs.push_back(num(d));
    for (const auto& q : r.ratios) ratios.push_back({{"n", q.n}, {"ratio", num(q.value)}});
    rows.push_back({{"T", T},
                    {"contraction_factor", num(r.contraction_factor)},
                    {"contracting", r.contracting},
                    {"converged_to_roundoff", r.converged_to_roundoff},
                    {"differences", diffs},
                    {"ratios", ratios}});
    for (std::size_t n = 1; n <= r.differences.size(); ++n) {
      std::string ratio;
      for (const auto& q : r.ratios)
        if (q.n == static_cast<int>(n) && q.value) ratio = format_double(*q.value);
      csv.push_back({format_double(T), std::to_string(n), format_double(r.differences[n - 1]), ratio});
    }
    log_line(ctx, "picard T=" + format_double(T) + ": factor " + format_double(r.contraction_factor) +
                      (r.contracting ? "" : " (not contracting)"));
  }
  write_csv(dir / "picard.csv", "T,n,difference,ratio", csv);
  rep["result"] = {{"n_t", o.n_t}, {"iters", iters}, {"acoustic_sources", o.acoustic_sources}, {"per_T", rows}};
  rep.write(dir / "picard.json", ctx, kExitOk);
  return kExitOk;
}

// ----------------------------------------------------------------- norms

int cmd_norms(const KvConfig& c, const RunContext& ctx) {
  const auto seed_opt = master_seed(c, ctx);
  const std::string recipe = c.get_string("norms.recipe", "random");
  const int d = static_cast<int>(c.get_int("norms.d", 2));
  const int N = static_cast<int>(c.get_int("norms.N", 16));
  const double L = c.get_double("norms.L", 2.0 * std::numbers::pi);
  const double Tw = c.get_double("norms.half_window", 4.0);
  const int nt = static_cast<int>(c.get_int("norms.n_t", 128));
  const double s = c.get_double("norms.s", 1.0);
  const double b = c.get_double("norms.b", 0.6);
  const Dispersion disp = dispersion_from_name(c.get_string("norms.dispersion", "schrodinger"));
  const double q = c.get_double("norms.q", 2.0);
  const double r = c.get_double("norms.r", 2.0);
  const double cutoff = c.get_double("norms.cutoff_T", 1.0);
  const int kmax = static_cast<int>(c.get_int("norms.kmax", 3));
  const int mt_max = static_cast<int>(c.get_int("norms.mt_max", 4));
  const double width = c.get_double("norms.width", 1.0);
  const auto mode = c.get_int_list("norms.mode").value_or(std::vector<long long>{1, 0});
  const int tau_index = static_cast<int>(c.get_int("norms.tau_index", 0));
  c.require_consumed();
  if (d != 2 && d != 3) throw ConfigError("norms.d: must be 2 or 3");
  const auto dir = prepare_out(ctx);

  const Grid g(d, N, L);
  SpaceTimeField f(g, Tw, nt);
  ojson extra = ojson::object();
  if (recipe == "zero") {
  } else if (recipe == "one_mode") {
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t i = 0; i < mode.size() && i < 3; ++i) {
      const long long m = mode[i];
      if (std::abs(m) >= N / 2) throw ConfigError("norms.mode: modes must satisfy |k| < N/2");
      idx[i] = static_cast<int>(m < 0 ? m + N : m);
    }
    if (std::abs(tau_index) >= nt / 2) throw ConfigError("norms.tau_index: must satisfy |m| < n_t/2");
    std::vector<cplx> coeffs(f.size());
    const int jt = tau_index < 0 ? tau_index + nt : tau_index;
    const std::size_t k = g.flatten(idx);
    coeffs[jt * g.size() + k] = 1.0;
    f = SpaceTimeField::from_spectrum(g, Tw, nt, coeffs);
    const double xi2 = g.xi_squared(k), sig = f.tau(jt) + disp.phase(xi2);
    extra["closed_form_xsb"] = std::pow(1 + xi2, 0.5 * s) * std::pow(1 + sig * sig, 0.5 * b) * std::sqrt(f.cell_weight());
  } else if (recipe == "random") {
    if (!seed_opt) throw ConfigError("seed: required for the random recipe");
    BandLimitedSpec spec;
    spec.kmax = kmax;
    spec.mt_max = mt_max;
    spec.carrier = disp;
    spec.cutoff_T = cutoff;
    f = random_band_limited_field(g, Tw, nt, spec, *seed_opt);
  } else if (recipe == "cutoff_free") {
    ComplexField u0(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto ix = g.unflatten(i);
      double r2 = 0;
      for (int a = 0; a < d; ++a) r2 += std::pow(g.coordinate(a, ix[a]), 2);
      u0[i] = std::exp(-r2 / (2 * width * width));
    }
    f = free_evolution(u0, Tw, nt, disp, cutoff);
  } else {
    throw ConfigError("norms.recipe: unknown recipe '" + recipe + "' (zero, one_mode, random, cutoff_free)");
  }

  Report rep("norms", c, seed_opt);
  ojson res;
  res["recipe"] = recipe;
  res["dispersion"] = std::string(dispersion_name(disp.kind));
  res["s"] = s;
  res["b"] = b;
  res["xsb"] = num(xsb_norm(f, s, b, disp));
  res["hsb"] = num(hsb_norm(f, s, b));
  res["ys"] = num(ys_norm(f, s, disp));
  res["mixed"] = {{"q", num(q)}, {"r", num(r)}, {"value", num(mixed_norm(f, q, r))}};
  res["l2"] = num(f.l2_norm());
  double sup = 0.0;
  for (int j = 0; j < f.n_t(); ++j) sup = std::max(sup, hs_slice_norm(f, j, s));
  res["sup_t_hs"] = num(sup);
  res["embedding_ratio"] = num(embedding_ratio(f, s, b, disp));
  for (auto& [k, v] : extra.items()) res[k] = v;
  rep["result"] = res;
  rep.write(dir / "norms.json", ctx, kExitOk);
  log_line(ctx, "norms " + recipe + ": xsb " + format_double(xsb_norm(f, s, b, disp)));
  return kExitOk;
}

// -------------------------------------------------------------- dispatch

int run_command(const std::string& command, const KvConfig& config, const RunContext& ctx) {
  auto err = [&](const std::string& m) {
    if (ctx.log) *ctx.log << "error: " << m << '\n';
  };
  try {
    if (command == "simulate") return cmd_simulate(config, ctx);
    if (command == "epsilon-scaling") return cmd_epsilon_scaling(config, ctx);
    if (command == "region") return cmd_region(config, ctx);
    if (command == "fuzz") return cmd_fuzz(config, ctx);
    if (command == "picard") return cmd_picard(config, ctx);
    if (command == "norms") return cmd_norms(config, ctx);
    err("unknown command '" + command + "'");
    return kExitValidation;
  } catch (const ConfigError& e) {
    err(e.what());
    return kExitValidation;
  } catch (const DivergenceError& e) {
    err(e.what());
    return kExitDivergence;
  } catch (const std::exception& e) {
    err(e.what());
    return kExitFailure;
  }
}

}  // namespace zr
