#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>

#include "softad/config.hpp"
#include "softad/harness.hpp"

namespace softad {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitUsage = 2, kExitDiverged = 3 };

/// Output directory: explicit flag, else SOFTAD_OUTPUT_DIR, else ".".
std::filesystem::path resolve_output_dir(const std::string& flag_value);

struct QuadraticDemoParams {
  double theta = 0.5;
  double sigma = 1.0;
  double alpha = 0.1;
  std::size_t steps = 500;
  double x0 = 2.0;
};

/// Rows t = 0..steps, columns t,x_gd,f_gd,x_flood,f_flood,x_softad,f_softad.
void write_quadratic_demo(const QuadraticDemoParams& params, std::ostream& out);

/// Long format, columns kind,candidate,index,x,y,value. Kinds:
///   alpha, theta (value only); point (x, y); minimizer (x, y, value = min risk);
///   candidate (x, y, value = risk); erm_direction, flood_direction,
///   softad_direction (x, y, value = objective); softad_point (the per-point
///   transformed gradient phi(l_i - theta) grad l_i, value = weight).
/// Directions are the vectors subtracted from w, before step-size scaling.
void write_2dmean_demo(std::uint64_t seed, std::ostream& out);

/// Config keys accepted by each subcommand.
const std::set<std::string>& quadratic_keys();
const std::set<std::string>& mean_demo_keys();
const std::set<std::string>& train_keys();
const std::set<std::string>& heatmap_keys();
const std::set<std::string>& verify_keys();

QuadraticDemoParams quadratic_params_from(const Config& config);
ComparisonConfig comparison_from(const Config& config);
HeatmapConfig heatmap_from(const Config& config);

/// Subcommand bodies. Each validates its keys, writes files under out_dir and
/// short progress lines to log, and returns an exit code.
int cmd_demo_quadratic(const Config& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_demo_2dmean(const Config& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_train(const Config& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_sweep_heatmap(const Config& config, const std::filesystem::path& out_dir, std::ostream& log);
int cmd_verify(const Config& config, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace softad
