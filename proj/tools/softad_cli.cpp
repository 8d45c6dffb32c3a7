// Command-line front end. Exit codes: 0 ok, 1 verification failure or runtime
// error, 2 usage error, 3 divergence.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "softad/commands.hpp"
#include "softad/config.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config_path, "key=value config file");
  sub->add_option("--out", flags.out_dir, "output directory (default: $SOFTAD_OUTPUT_DIR or .)");
  sub->add_option("--seed", flags.seed, "seed override");
  sub->add_option("--set", flags.overrides, "key=value override, repeatable")->take_all();
}

softad::Config build_config(const CommonFlags& flags) {
  softad::Config config;
  if (!flags.config_path.empty()) config = softad::Config::load(flags.config_path);
  for (const std::string& kv : flags.overrides) config.set(std::string_view(kv));
  if (flags.seed) config.set("seed", std::to_string(*flags.seed));
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SoftAD and Flooding experiments: demos, training comparisons, sweeps, checks"};
  app.require_subcommand(1);

  using Handler = int (*)(const softad::Config&, const std::filesystem::path&, std::ostream&);
  struct Entry {
    const char* name;
    const char* help;
    Handler handler;
  };
  const Entry entries[] = {
      {"demo-quadratic", "GD, Flooding and SoftAD on f(x) = x^2/2; writes demo_quadratic.csv",
       softad::cmd_demo_quadratic},
      {"demo-2dmean", "update directions on the 2D mean problem; writes demo_2dmean.csv",
       softad::cmd_demo_2dmean},
      {"train", "grid-selected method comparison; writes metrics, grid and summary files",
       softad::cmd_train},
      {"sweep-heatmap", "linear-model (theta, sigma) sweep; writes heatmap.csv",
       softad::cmd_sweep_heatmap},
      {"verify", "runs the built-in checks; writes verify_report.txt", softad::cmd_verify},
  };

  CommonFlags flags;
  std::vector<std::pair<CLI::App*, Handler>> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, flags);
    subs.emplace_back(sub, e.handler);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return softad::kExitUsage;
  }

  for (const auto& [sub, handler] : subs) {
    if (!sub->parsed()) continue;
    try {
      const softad::Config config = build_config(flags);
      return handler(config, softad::resolve_output_dir(flags.out_dir), std::cout);
    } catch (const softad::ConfigError& e) {
      std::cerr << "usage error: " << e.what() << '\n' << sub->help();
      return softad::kExitUsage;
    } catch (const std::invalid_argument& e) {
      std::cerr << "usage error: " << e.what() << '\n';
      return softad::kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return softad::kExitVerifyFailed;
    }
  }
  return softad::kExitUsage;
}
