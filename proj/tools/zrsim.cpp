// zrsim: command-line front end for the experiment harness.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zr/config.hpp"
#include "zr/errors.hpp"
#include "zr/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical harness for the Zakharov-Rubenchik system"};
  app.set_version_flag("--version", zr::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the command; must precede add_subcommand

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  long long seed = -1;
  int threads = 1;
  bool timing = false;
  bool quiet = false;
  app.add_option("-c,--config", config_path, "key = value config file");
  app.add_option("--set", overrides, "override a key, key=value (repeatable)");
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master seed (wins over the seed key)")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_flag("--timing", timing, "add wall_time_s to the JSON report");
  app.add_flag("-q,--quiet", quiet, "no summary on stderr");

  for (const char* name : {"simulate", "epsilon-scaling", "region", "fuzz", "picard", "norms"}) app.add_subcommand(name);
  app.get_subcommand("simulate")->description("run the split-step solver, write diagnostics");
  app.get_subcommand("epsilon-scaling")->description("existence-time proxy against epsilon");
  app.get_subcommand("region")->description("scan the (b1, b2) exponent constraints");
  app.get_subcommand("fuzz")->description("random search of the symbol inequalities");
  app.get_subcommand("picard")->description("Duhamel iteration contraction factors");
  app.get_subcommand("norms")->description("discrete space-time norms of a test field");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : zr::kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  zr::KvConfig config;
  try {
    if (!config_path.empty()) config = zr::KvConfig::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw zr::ConfigError("--set: expected key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const zr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return zr::kExitValidation;
  }

  zr::RunContext ctx;
  ctx.out_dir = out_dir;
  if (seed >= 0) ctx.seed = static_cast<std::uint64_t>(seed);
  ctx.threads = threads;
  ctx.timing = timing;
  ctx.log = quiet ? nullptr : &std::cerr;
  return zr::run_command(command, config, ctx);
}
