#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"
#include "zr/config.hpp"
#include "zr/errors.hpp"
#include "zr/exponents.hpp"
#include "zr/harness.hpp"

using namespace zr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zr_test_harness_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::ordered_json load_json(const fs::path& p) { return nlohmann::ordered_json::parse(slurp(p)); }

int run(const std::string& cmd, const std::string& text, const fs::path& dir, std::optional<std::uint64_t> seed = {},
        int threads = 1) {
  RunContext ctx;
  ctx.out_dir = dir;
  ctx.seed = seed;
  ctx.threads = threads;
  return run_command(cmd, KvConfig::parse(text, "test"), ctx);
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// gaussian problem shared by the simulate tests
const char* kSmall =
    "grid.N = 32\n"
    "grid.L = 20\n"
    "initial.width = 1\n"
    "run.dt = 1e-3\n"
    "run.t_end = 0.05\n"
    "run.stride = 5\n";

}  // namespace

TEST_CASE("config parsing") {
  const auto c = KvConfig::parse(
      "# comment\n"
      "\n"
      "  grid.N = 32   # trailing\n"
      "fuzz.n=1e6\n"
      "flag = yes\n"
      "list = 1, 0.5 ,0.25\n",
      "t");
  CHECK(c.get_int("grid.N", 0) == 32);
  CHECK(c.get_int("fuzz.n", 0) == 1000000);
  CHECK(c.get_bool("flag", false));
  CHECK(*c.get_double_list("list") == std::vector<double>{1, 0.5, 0.25});
  CHECK_FALSE(c.get_double("missing"));
  CHECK_NOTHROW(c.require_consumed());

  CHECK_THROWS_AS(KvConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(KvConfig::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(KvConfig::parse("bad key! = 1\n"), ConfigError);
  CHECK_THROWS_AS(KvConfig::parse("x = 1.5").get_int("x", 0), ConfigError);
  CHECK_THROWS_AS(KvConfig::parse("x = 1.5z").get_double("x", 0), ConfigError);
  CHECK_THROWS_AS(KvConfig::parse("x = maybe").get_bool("x", false), ConfigError);

  const auto u = KvConfig::parse("grid.N = 32\ngird.L = 3\n", "run.cfg");
  (void)u.get_int("grid.N", 0);
  try {
    u.require_consumed();
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("gird.L") != std::string::npos);
    CHECK(std::string(e.what()).find("run.cfg") != std::string::npos);
  }
}

TEST_CASE("config serialize round-trip and override") {
  auto c = KvConfig::parse("b = 2\na = x y\nc = 1,2\n");
  c.set("a", "z");
  c.set("d", "4");
  const auto again = KvConfig::parse(c.serialize());
  CHECK(again.entries() == c.entries());
  CHECK(c.entries()[1].second == "z");
  CHECK(c.entries().back().first == "d");
}

TEST_CASE("report echoes the parsed config") {
  const auto dir = scratch("echo");
  const std::string text = "norms.recipe = zero\nnorms.N = 8\n# note\nnorms.s = 0.5\n";
  REQUIRE(run("norms", text, dir) == kExitOk);
  const auto j = load_json(dir / "norms.json");
  const auto parsed = KvConfig::parse(text);
  REQUIRE(j["config"].size() == parsed.entries().size());
  std::size_t i = 0;
  for (auto it = j["config"].begin(); it != j["config"].end(); ++it, ++i) {
    CHECK(it.key() == parsed.entries()[i].first);
    CHECK(it.value() == parsed.entries()[i].second);
  }
  CHECK(j["command"] == "norms");
  CHECK(j["tool_version"] == kToolVersion);
  CHECK(j["exit_code"] == 0);
  CHECK_FALSE(j.contains("wall_time_s"));
  CHECK(j["result"]["xsb"] == 0.0);
  CHECK(j["result"]["ys"] == 0.0);
  CHECK(j["result"]["mixed"]["value"] == 0.0);
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(u(rng), static_cast<int>(u(rng)));
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("snapshot round-trip and byte layout") {
  const Grid g(2, 8, 5.0);
  ZRState s{ComplexField(g), ComplexField(g), ComplexField(g), std::nullopt, std::nullopt};
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  for (auto* f : {&s.psi, &s.rho, &s.phi})
    for (auto& v : f->values()) v = cplx(n(rng), n(rng));
  const auto dir = scratch("snap");
  write_snapshot(dir / "a.bin", s);

  const std::string bytes = slurp(dir / "a.bin");
  const std::size_t header = 8 + 4 + 4 + 2 * 4 + 2 * 8;
  REQUIRE(bytes.size() == header + 3 * 64 * 16);
  CHECK(bytes.substr(0, 8) == "ZRSNAP01");
  auto u32 = [&](std::size_t off) {
    const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + off);
    return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24);
  };
  auto f64 = [&](std::size_t off) {
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = (bits << 8) | static_cast<unsigned char>(bytes[off + k]);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  };
  CHECK(u32(8) == 1);
  CHECK(u32(12) == 2);
  CHECK(u32(16) == 8);
  CHECK(u32(20) == 8);
  CHECK(f64(24) == 5.0);
  CHECK(f64(32) == 5.0);
  // first psi value, then the first rho value after 64 pairs
  CHECK(f64(header) == s.psi[0].real());
  CHECK(f64(header + 8) == s.psi[0].imag());
  CHECK(f64(header + 64 * 16) == s.rho[0].real());
  CHECK(f64(header + 5 * 16 + 8) == s.psi[5].imag());

  const ZRState r = read_snapshot(dir / "a.bin");
  CHECK(r.grid().dim() == 2);
  CHECK(r.grid().points_per_axis() == 8);
  CHECK(r.grid().box_length(1) == 5.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(r.psi[i] == s.psi[i]);
    CHECK(r.rho[i] == s.rho[i]);
    CHECK(r.phi[i] == s.phi[i]);
  }
  std::ofstream(dir / "bad.bin", std::ios::binary) << "NOTASNAP";
  CHECK_THROWS_AS(read_snapshot(dir / "bad.bin"), Error);
}

TEST_CASE("least squares slope") {
  CHECK(least_squares_slope({0, 1}, {3, 5}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(least_squares_slope({1, 2, 3, 4}, {1, 1.5, 2, 2.5}) == doctest::Approx(0.5).epsilon(1e-14));
  // slope independent oracle: y = 0.3x + noise symmetric about the line
  CHECK(least_squares_slope({0, 1, 2}, {0.1, 0.2, 0.7}) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(least_squares_slope({1}, {1}), ConfigError);
  CHECK_THROWS_AS(least_squares_slope({1, 1}, {1, 2}), ConfigError);
}

TEST_CASE("simulate outputs") {
  const auto dir = scratch("sim");
  REQUIRE(run("simulate", std::string(kSmall) + "run.snapshots = true\n", dir, 3) == kExitOk);
  const std::string csv = slurp(dir / "simulate.csv");
  CHECK(csv.rfind("t,mass,energy,max_abs_psi,l2_rho,l2_phi\n", 0) == 0);
  CHECK(line_count(csv) == 1 + 11);
  CHECK(fs::exists(dir / "snapshots" / "snapshot_000010.bin"));
  const ZRState last = read_snapshot(dir / "snapshots" / "snapshot_000010.bin");
  CHECK(last.grid().points_per_axis() == 32);
  const auto j = load_json(dir / "simulate.json");
  CHECK(j["seed"] == 3);
  CHECK(j["result"]["diverged"] == false);
  CHECK(j["result"]["last_good_time"] == 0.05);
  CHECK(j["result"]["mass_relative_drift"].get<double>() < 1e-12);
  CHECK(std::string(j["divergence_proxy"]).find("run.divergence_factor") != std::string::npos);

  const auto z = scratch("sim0");
  CHECK_THROWS_AS(KvConfig::parse(std::string(kSmall) + "run.t_end = 0\n"), ConfigError);  // duplicate key
  REQUIRE(run("simulate", "grid.N = 32\ngrid.L = 20\nrun.t_end = 0\n", z) == kExitOk);
  const std::string c0 = slurp(z / "simulate.csv");
  CHECK(line_count(c0) == 2);
  CHECK(c0.find("\n0,") != std::string::npos);
}

TEST_CASE("linear run conserves mass to 1e-12") {
  const auto dir = scratch("lin");
  REQUIRE(run("simulate",
              std::string(kSmall) + "model.sigma2 = 0\nmodel.W = 0\nmodel.D = 0\ninitial.rho_amplitude = 0.3\n", dir) ==
          kExitOk);
  std::istringstream in(slurp(dir / "simulate.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<double> mass;
  while (std::getline(in, line)) mass.push_back(std::stod(line.substr(line.find(',') + 1)));
  REQUIRE(mass.size() == 11);
  for (double m : mass) CHECK(std::abs(m - mass[0]) <= 1e-12 * mass[0]);
}

TEST_CASE("simulate determinism") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  const std::string text = std::string(kSmall) + "initial.recipe = random_band_limited\ninitial.kmax = 3\n";
  REQUIRE(run("simulate", text, a, 11) == kExitOk);
  REQUIRE(run("simulate", text, b, 11) == kExitOk);
  CHECK(slurp(a / "simulate.csv") == slurp(b / "simulate.csv"));
  CHECK(slurp(a / "simulate.json") == slurp(b / "simulate.json"));
  const auto c = scratch("det_c");
  REQUIRE(run("simulate", text, c, 12) == kExitOk);
  CHECK(slurp(a / "simulate.csv") != slurp(c / "simulate.csv"));
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  CHECK(run("simulate", "grid.NN = 32\n", dir) == kExitValidation);
  CHECK(run("nosuch", "", dir) == kExitValidation);
  CHECK(run("region", "region.resolution = 0.02\n", dir) == kExitValidation);
  CHECK(run("norms", "norms.recipe = spiral\n", dir) == kExitValidation);
  CHECK(run("norms", "norms.recipe = random\n", dir) == kExitValidation);  // no seed
  CHECK(run("simulate", "initial.recipe = random_band_limited\n", dir) == kExitValidation);
  CHECK(run("epsilon-scaling", "eps.list = 0.5, 1\n", dir) == kExitValidation);
  CHECK(run("epsilon-scaling", "eps.list = 1, -0.5\n", dir) == kExitValidation);

  // field names in validation messages
  std::ostringstream log;
  RunContext ctx;
  ctx.out_dir = dir;
  ctx.log = &log;
  CHECK(run_command("simulate", KvConfig::parse("grid.N = 30\n"), ctx) == kExitValidation);
  CHECK(log.str().find("grid.N") != std::string::npos);
  log.str("");
  CHECK(run_command("simulate", KvConfig::parse("run.dt = -1\n"), ctx) == kExitValidation);
  CHECK(log.str().find("run.dt") != std::string::npos);

  // focusing collapse trips a low threshold; the partial table is kept
  const std::string collapse =
      "grid.N = 32\ngrid.L = 20\ninitial.width = 1\nrun.dt = 1e-3\nrun.t_end = 1\nrun.stride = 1\n"
      "model.sigma2 = -1\ninitial.amplitude = 4\nrun.divergence_factor = 1.5\n";
  const auto dv = scratch("div");
  REQUIRE(run("simulate", collapse, dv) == kExitDivergence);
  const auto j = load_json(dv / "simulate.json");
  CHECK(j["exit_code"] == kExitDivergence);
  CHECK(j["result"]["diverged"] == true);
  const double last = j["result"]["last_good_time"];
  CHECK(last > 0.0);
  CHECK(last < 1.0);
  CHECK(j["result"]["divergence_time"].get<double>() > last);
  CHECK(line_count(slurp(dv / "simulate.csv")) == j["result"]["rows"].get<std::size_t>() + 1);

  // every cap shrunk below 1 forces a breach
  const auto fz = scratch("fz");
  CHECK(run("fuzz", "fuzz.n = 100\nfuzz.dims = 2\nfuzz.cap1 = 0.01\n", fz, 1) == kExitCapExceeded);
  CHECK(load_json(fz / "fuzz.json")["exit_code"] == kExitCapExceeded);
}

TEST_CASE("fuzz determinism") {
  const auto a = scratch("fa"), b = scratch("fb"), c = scratch("fc");
  REQUIRE(run("fuzz", "fuzz.n = 1\n", a, 7) != kExitValidation);
  REQUIRE(run("fuzz", "fuzz.n = 1\n", b, 7) != kExitValidation);
  CHECK(slurp(a / "fuzz.json") == slurp(b / "fuzz.json"));
  run("fuzz", "fuzz.n = 2000\n", a, 5, 1);
  run("fuzz", "fuzz.n = 2000\n", c, 5, 3);
  CHECK(slurp(a / "fuzz.json") == slurp(c / "fuzz.json"));
  const auto j = load_json(a / "fuzz.json");
  REQUIRE(j["result"]["per_dimension"].size() == 2);
  CHECK(j["result"]["per_dimension"][0]["inequalities"][0]["id"] == "ineq1");
  CHECK(j["result"]["per_dimension"][0]["inequalities"][0]["branches"][0]["max_ratio"].get<double>() <= 1.0);
}

TEST_CASE("region export") {
  const auto dir = scratch("region");
  REQUIRE(run("region", "region.resolution = 1e-2\n", dir) == kExitOk);
  const auto j = load_json(dir / "region_d2.json");
  const std::size_t cells = j["result"]["lattice"]["cells"];
  CHECK(cells == j["result"]["lattice"]["n_b1"].get<std::size_t>() * j["result"]["lattice"]["n_b2"].get<std::size_t>());
  const std::string csv = slurp(dir / "region_d2.csv");
  CHECK(csv.rfind("b1,b2,admissible,violated_ids,min_theta\n", 0) == 0);
  CHECK(line_count(csv) == cells + 1);
  CHECK(j["result"]["stated_box_contained"] == true);

  REQUIRE(run("region", "region.d = 3\nregion.resolution = 1e-2\n", dir) == kExitOk);
  const auto j3 = load_json(dir / "region_d3.json");
  CHECK(j3["result"]["stated_box_contained"] == false);
  REQUIRE(j3["result"]["witnesses"].size() > 0);
  for (const auto& w : j3["result"]["witnesses"]) {
    const auto v = w["violated"].get<std::vector<std::string>>();
    CHECK(std::find(v.begin(), v.end(), "auxi_4") != v.end());
  }
}

TEST_CASE("epsilon scaling") {
  SimConfig base;
  base.points_per_axis = 32;
  base.box_length = 20;
  base.initial.width = 1;
  base.dt = 1e-3;

  SUBCASE("couplings zero never trip the proxy") {
    base.params.sigma2 = 0;
    base.params.W = 0;
    base.params.D = 0;
    const auto es = epsilon_scaling(base, {1, 0.5, 0.25}, 0.05, 1);
    for (const auto& r : es.rows) {
      CHECK(r.t_proxy == 0.05);
      CHECK_FALSE(r.diverged);
    }
    REQUIRE(es.alpha_hat);
    CHECK(*es.alpha_hat == 0.0);
    CHECK(es.non_decreasing);
  }
  SUBCASE("two points give the two-point slope") {
    base.params.sigma2 = -1;
    base.initial.amplitude = 4;
    base.divergence_factor = 1.5;
    const auto es = epsilon_scaling(base, {1, 0.5}, 2.0, 2);
    REQUIRE(es.rows[0].diverged);
    REQUIRE(es.rows[1].diverged);
    const double slope = (std::log(es.rows[1].t_proxy) - std::log(es.rows[0].t_proxy)) / (std::log(2.0) - std::log(1.0));
    REQUIRE(es.alpha_hat);
    CHECK(*es.alpha_hat == doctest::Approx(slope).epsilon(1e-14));
    CHECK(es.non_decreasing);
  }
  SUBCASE("every run failing at once is a degenerate fit") {
    base.params.sigma2 = -1;
    base.initial.amplitude = 10;
    base.dt = 0.05;
    base.divergence_factor = 1.0001;
    CHECK_THROWS_AS(epsilon_scaling(base, {1, 0.5}, 0.1, 1), DivergenceError);
  }
}

TEST_CASE("norms recipes") {
  const auto dir = scratch("norms");
  REQUIRE(run("norms", "norms.recipe = one_mode\nnorms.mode = 2,-1\nnorms.tau_index = 3\nnorms.b = 0.4\n", dir) ==
          kExitOk);
  auto r = load_json(dir / "norms.json")["result"];
  // independent closed form: one unitary coefficient of size 1
  const double L = 2 * std::numbers::pi, Tw = 4.0;
  const int N = 16, nt = 128;
  const double cell = (2 * Tw / nt) * (L / N) * (L / N);
  const double xi2 = 4 + 1;
  const double tau = 2 * std::numbers::pi * 3 / (2 * Tw);
  const double expect = std::pow(1 + xi2, 0.5) * std::pow(1 + (tau + xi2) * (tau + xi2), 0.2) * std::sqrt(cell);
  CHECK(r["xsb"].get<double>() == doctest::Approx(expect).epsilon(1e-12));

  REQUIRE(run("norms", "norms.recipe = cutoff_free\n", dir) == kExitOk);
  const double coarse = load_json(dir / "norms.json")["result"]["embedding_ratio"];
  REQUIRE(run("norms", "norms.recipe = cutoff_free\nnorms.n_t = 256\n", dir) == kExitOk);
  const double fine = load_json(dir / "norms.json")["result"]["embedding_ratio"];
  CHECK(std::isfinite(coarse));
  CHECK(std::abs(fine - coarse) < 0.05 * coarse);
}

TEST_CASE("timing is opt-in") {
  const auto dir = scratch("timing");
  RunContext ctx;
  ctx.out_dir = dir;
  ctx.timing = true;
  REQUIRE(run_command("norms", KvConfig::parse("norms.recipe = zero\n"), ctx) == kExitOk);
  CHECK(load_json(dir / "norms.json").contains("wall_time_s"));
}
