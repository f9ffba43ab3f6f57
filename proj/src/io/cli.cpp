#include "magspec/io/cli.hpp"

#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "magspec/error.hpp"
#include "magspec/io/commands.hpp"
#include "magspec/io/config.hpp"

namespace magspec::io {

namespace {

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("--set expects section.key=value, got '" + assignment + "'");
  auto trim = [](std::string s) {
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    return s;
  };
  config.set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
             trim(assignment.substr(eq + 1)));
}

}  // namespace

int magspec_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"magspec: low-lying spectrum of the Neumann magnetic Laplacian in the semiclassical limit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, thetas, h_list;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  int n_max = 0;
  bool strict = false, print_config = false;
  std::vector<std::string> overrides;

  app.add_option("--config", config_path, "config file (TOML-style [section] key = value)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--strict", strict, "exit 3 when a hypothesis verdict fails");
  app.add_option("--threads", threads, "worker threads (fallback: MAGSPEC_THREADS)");
  app.add_option("--set", overrides, "override one config value, section.key=value")->take_all();
  app.add_flag("--print-config", print_config, "print the resolved config and exit");

  auto* band = app.add_subcommand("band", "tabulate the band function e(theta)");
  band->add_option("--thetas", thetas, "comma-separated angles in (0, pi/2)");
  app.add_subcommand("beta", "beta landscape and its minimum on the configured patch");
  auto* predict = app.add_subcommand("predict", "asymptotic eigenvalue prediction");
  predict->add_option("--n-max", n_max, "number of levels per h");
  predict->add_option("--h-list", h_list, "comma-separated h values");
  auto* validate = app.add_subcommand("validate", "direct-solver campaign and expansion fit");
  validate->add_option("--h-list", h_list, "comma-separated h values");
  app.add_subcommand("model", "model operator: formula against numerics");
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig config;
  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) config = RunConfig::parse_file(config_path);
    config.run.command = command;
    if (!out_dir.empty()) config.run.out = out_dir;
    if (app.count("--seed")) config.run.seed = seed;
    if (strict) config.run.strict = true;
    if (app.count("--threads")) config.run.threads = threads;
    for (const std::string& o : overrides) apply_override(config, o);
    if (!thetas.empty()) config.band.thetas = parse_real_list(thetas);
    if (n_max > 0) config.predict.n_max = n_max;
    if (!h_list.empty()) {
      const auto list = parse_real_list(h_list);
      (command == "validate" ? config.validate.h_list : config.predict.h_list) = list;
    }
    config.check();
  } catch (const std::exception& e) {
    err << "magspec " << command << ": configuration error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (print_config) {
    out << config.serialize();
    return kExitOk;
  }
  return run_command(config, err);
}

}  // namespace magspec::io
