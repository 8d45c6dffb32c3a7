#include "softad/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "softad/csv.hpp"
#include "softad/datagen.hpp"
#include "softad/loss_oracle.hpp"
#include "softad/objectives.hpp"
#include "softad/truncators.hpp"
#include "softad/verify.hpp"

namespace softad {

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void prepare_dir(const std::filesystem::path& dir) { std::filesystem::create_directories(dir); }

std::string num(double v) { return format_double(v); }

std::vector<std::string> vec_row(const std::string& kind, const std::string& candidate,
                                 std::size_t index, const Tensor& v, const std::string& value) {
  return {kind, candidate, std::to_string(index), num(v[0]), num(v[1]), value};
}

SyntheticSpec data_from(const Config& c) {
  SyntheticSpec s;
  s.kind = parse_dataset_kind(c.get_string("dataset", "two_gaussians"));
  s.n_train = c.get_size("n_train", s.n_train);
  s.n_val = c.get_size("n_val", s.n_val);
  s.n_test = c.get_size("n_test", s.n_test);
  s.label_flip_rate = c.get_double("label_flip_rate", s.label_flip_rate);
  s.spiral_noise = c.get_double("spiral_noise", s.spiral_noise);
  return s;
}

OptimizerSpec optimizer_from(const Config& c, OptimizerSpec o) {
  o.kind = parse_optimizer_kind(c.get_string("optimizer", std::string(to_string(o.kind))));
  o.step_size = c.get_double("lr", o.step_size);
  o.momentum = c.get_double("momentum", o.momentum);
  o.beta1 = c.get_double("beta1", o.beta1);
  o.beta2 = c.get_double("beta2", o.beta2);
  o.epsilon = c.get_double("epsilon", o.epsilon);
  return o;
}

ObjectiveSpec method_spec(const std::string& name, const Config& c, double placeholder) {
  const double sigma = c.get_double("sigma", 1.0);
  const double fd_step = c.get_double("fd_step", 0.01);
  switch (parse_objective_kind(name)) {
    case ObjectiveKind::kErm: return ObjectiveSpec::erm();
    case ObjectiveKind::kFlood: return ObjectiveSpec::flood(placeholder);
    case ObjectiveKind::kIFlood: return ObjectiveSpec::iflood(placeholder);
    case ObjectiveKind::kSoftAd: return ObjectiveSpec::softad(placeholder, sigma);
    case ObjectiveKind::kSam: return ObjectiveSpec::sam(placeholder);
    case ObjectiveKind::kFdgr: return ObjectiveSpec::fdgr(placeholder, fd_step);
    case ObjectiveKind::kGrExact: return ObjectiveSpec::gr_exact(placeholder);
  }
  throw std::logic_error("unhandled objective kind");
}

void require_keys(const Config& config, const std::set<std::string>& keys) {
  config.require_known(keys);
}

}  // namespace

std::filesystem::path resolve_output_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SOFTAD_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

void write_quadratic_demo(const QuadraticDemoParams& p, std::ostream& out) {
  if (p.steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(p.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  CsvTable table;
  table.header = {"t", "x_gd", "f_gd", "x_flood", "f_flood", "x_softad", "f_softad"};
  double gd = p.x0;
  double flood = p.x0;
  double soft = p.x0;
  const auto f = [](double x) { return 0.5 * x * x; };
  for (std::size_t t = 0; t <= p.steps; ++t) {
    table.rows.push_back({std::to_string(t), num(gd), num(f(gd)), num(flood), num(f(flood)),
                          num(soft), num(f(soft))});
    gd = quadratic_demo_step(gd, DemoMethod::kGd, p.theta, p.sigma, p.alpha);
    flood = quadratic_demo_step(flood, DemoMethod::kFlood, p.theta, p.sigma, p.alpha);
    soft = quadratic_demo_step(soft, DemoMethod::kSoftAd, p.theta, p.sigma, p.alpha);
  }
  write_csv(out, table);
}

void write_2dmean_demo(std::uint64_t seed, std::ostream& out) {
  const MeanDemo demo = make_mean_demo(seed);
  const SquaredDistanceOracle oracle(demo.points, 1.0);
  CsvTable table;
  table.header = {"kind", "candidate", "index", "x", "y", "value"};
  table.rows.push_back({"alpha", "", "0", "", "", num(demo.alpha)});
  table.rows.push_back({"theta", "", "0", "", "", num(demo.theta)});
  for (std::size_t i = 0; i < demo.points.rows(); ++i) {
    const auto p = demo.points.row(i);
    table.rows.push_back({"point", "", std::to_string(i), num(p[0]), num(p[1]), ""});
  }
  table.rows.push_back(vec_row("minimizer", "", 0, demo.minimizer, num(demo.min_risk)));

  const std::pair<std::string, const Tensor*> candidates[] = {
      {"inside", &demo.inside_candidate}, {"outside", &demo.outside_candidate}};
  for (const auto& [label, w] : candidates) {
    table.rows.push_back(vec_row("candidate", label, 0, *w, num(oracle.risk(*w))));
    const DirectionResult erm = erm_direction(oracle, *w);
    const DirectionResult flood = flood_direction(oracle, *w, demo.theta);
    const DirectionResult soft = softad_direction(oracle, *w, demo.theta);
    table.rows.push_back(vec_row("erm_direction", label, 0, erm.direction, num(erm.objective_value)));
    table.rows.push_back(vec_row("flood_direction", label, 0, flood.direction, num(flood.objective_value)));
    table.rows.push_back(vec_row("softad_direction", label, 0, soft.direction, num(soft.objective_value)));
    const PerExampleResult per = oracle.per_example(*w);
    for (std::size_t i = 0; i < per.losses.size(); ++i) {
      const double weight = phi(per.losses[i] - demo.theta);
      const auto g = per.grads.row(i);
      const Tensor transformed = Tensor::vector({weight * g[0], weight * g[1]});
      table.rows.push_back(vec_row("softad_point", label, i, transformed, num(weight)));
    }
  }
  write_csv(out, table);
}

const std::set<std::string>& quadratic_keys() {
  static const std::set<std::string> keys = {"theta", "sigma", "alpha", "steps", "x0", "seed"};
  return keys;
}

const std::set<std::string>& mean_demo_keys() {
  static const std::set<std::string> keys = {"seed"};
  return keys;
}

const std::set<std::string>& train_keys() {
  static const std::set<std::string> keys = {
      "dataset", "n_train",    "n_val",      "n_test",  "label_flip_rate", "spiral_noise",
      "hidden",  "loss",       "optimizer",  "lr",      "momentum",        "beta1",
      "beta2",   "epsilon",    "epochs",     "batch_size", "seed",         "trials",
      "methods", "sigma",      "fd_step",    "grid_min", "grid_max",       "grid_points",
      "write_data"};
  return keys;
}

const std::set<std::string>& heatmap_keys() {
  static const std::set<std::string> keys = {
      "dataset", "n_train", "n_val",      "n_test", "label_flip_rate", "spiral_noise",
      "optimizer", "lr",    "momentum",   "beta1",  "beta2",           "epsilon",
      "epochs",  "batch_size", "seed",    "thetas", "sigmas"};
  return keys;
}

const std::set<std::string>& verify_keys() {
  static const std::set<std::string> keys = {"seed", "perturb_phi"};
  return keys;
}

QuadraticDemoParams quadratic_params_from(const Config& c) {
  QuadraticDemoParams p;
  p.theta = c.get_double("theta", p.theta);
  p.sigma = c.get_double("sigma", p.sigma);
  p.alpha = c.get_double("alpha", p.alpha);
  p.steps = c.get_size("steps", p.steps);
  p.x0 = c.get_double("x0", p.x0);
  if (p.steps < 1) throw ConfigError("steps must be at least 1");
  if (!(p.sigma > 0.0)) throw ConfigError("sigma must be positive");
  return p;
}

ComparisonConfig comparison_from(const Config& c) {
  ComparisonConfig cc;
  TrialConfig& base = cc.base;
  base.data = data_from(c);
  base.hidden = c.get_sizes("hidden", base.hidden);
  base.loss = parse_loss_kind(c.get_string("loss", "cross_entropy"));
  base.optimizer = optimizer_from(c, base.optimizer);
  base.epochs = c.get_size("epochs", base.epochs);
  base.batch_size = c.get_size("batch_size", base.batch_size);

  const std::uint64_t seed = c.get_u64("seed", 0);
  const std::size_t trials = c.get_size("trials", 5);
  if (trials < 1) throw ConfigError("trials must be at least 1");
  for (std::size_t i = 0; i < trials; ++i) cc.seeds.push_back(seed + i);

  const std::size_t points = c.get_size("grid_points", 40);
  if (points < 1) throw ConfigError("grid_points must be at least 1");
  cc.grid = linspace(c.get_double("grid_min", 0.01), c.get_double("grid_max", 2.0), points);

  for (const std::string& name : c.get_strings("methods", {"erm", "flood", "softad"})) {
    cc.methods.push_back(method_spec(name, c, cc.grid.front()));
  }
  if (cc.methods.empty()) throw ConfigError("methods must not be empty");
  base.objective = cc.methods.front();
  base.validate();
  for (const ObjectiveSpec& m : cc.methods) m.validate();
  return cc;
}

HeatmapConfig heatmap_from(const Config& c) {
  HeatmapConfig h;
  h.data = data_from(c);
  h.optimizer = optimizer_from(c, h.optimizer);
  h.epochs = c.get_size("epochs", h.epochs);
  h.batch_size = c.get_size("batch_size", h.batch_size);
  h.seed = c.get_u64("seed", h.seed);
  h.thetas = c.get_doubles("thetas", h.thetas);
  h.sigmas = c.get_doubles("sigmas", h.sigmas);
  if (h.thetas.empty() || h.sigmas.empty()) throw ConfigError("thetas and sigmas must be nonempty");
  if (h.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (h.batch_size < 1 || h.batch_size > h.data.n_train) {
    throw ConfigError("batch_size must be in [1, n_train]");
  }
  h.data.validate();
  h.optimizer.validate();
  return h;
}

int cmd_demo_quadratic(const Config& config, const std::filesystem::path& out_dir, std::ostream& log) {
  require_keys(config, quadratic_keys());
  const QuadraticDemoParams p = quadratic_params_from(config);
  prepare_dir(out_dir);
  const auto path = out_dir / "demo_quadratic.csv";
  write_file(path, [&](std::ostream& out) { write_quadratic_demo(p, out); });
  log << "wrote " << path.filename().string() << '\n';
  return kExitOk;
}

int cmd_demo_2dmean(const Config& config, const std::filesystem::path& out_dir, std::ostream& log) {
  require_keys(config, mean_demo_keys());
  const std::uint64_t seed = config.get_u64("seed", 0);
  prepare_dir(out_dir);
  const auto path = out_dir / "demo_2dmean.csv";
  write_file(path, [&](std::ostream& out) { write_2dmean_demo(seed, out); });
  log << "wrote " << path.filename().string() << '\n';
  return kExitOk;
}

int cmd_train(const Config& config, const std::filesystem::path& out_dir, std::ostream& log) {
  require_keys(config, train_keys());
  const ComparisonConfig cc = comparison_from(config);
  const bool write_data = config.get_bool("write_data", false);
  prepare_dir(out_dir);

  std::vector<MethodRun> runs;
  try {
    runs = run_comparison(cc);
  } catch (const std::runtime_error& e) {
    log << "divergence: " << e.what() << '\n';
    return kExitDiverged;
  }

  bool diverged = false;
  for (const MethodRun& run : runs) {
    for (std::size_t i = 0; i < run.trials.size(); ++i) {
      const TrialRecord& t = run.trials[i];
      const std::string stem = run.name + "_seed" + std::to_string(t.seed);
      write_file(out_dir / ("metrics_" + stem + ".csv"),
                 [&](std::ostream& out) { write_metrics_csv(out, t.rows); });
      if (t.diverged) {
        diverged = true;
        log << "diverged: " << stem << ": " << t.diagnostic << '\n';
      }
      if (i < run.grids.size()) {
        const GridResult& g = run.grids[i];
        write_file(out_dir / ("grid_" + stem + ".csv"), [&](std::ostream& out) {
          CsvTable table;
          table.header = {"hyperparameter", "val_acc", "val_loss", "train_loss", "test_loss",
                          "test_acc", "diverged", "selected"};
          for (std::size_t k = 0; k < g.values.size(); ++k) {
            const TrialRecord& r = g.records[k];
            const bool ok = !r.diverged && !r.rows.empty();
            const double nan = std::nan("");
            table.rows.push_back({num(g.values[k]), num(ok ? r.final().val_acc : nan),
                                  num(ok ? r.final().val_loss : nan),
                                  num(ok ? r.final().train_loss : nan),
                                  num(ok ? r.final().test_loss : nan),
                                  num(ok ? r.final().test_acc : nan), r.diverged ? "1" : "0",
                                  k == g.best_index ? "1" : "0"});
          }
          write_csv(out, table);
        });
      }
    }
  }
  if (write_data) {
    for (std::uint64_t seed : cc.seeds) {
      TrialConfig cfg = cc.base;
      cfg.seed = seed;
      const DatasetSplits d = trial_data(cfg);
      const std::string stem = "data_seed" + std::to_string(seed);
      write_file(out_dir / (stem + "_train.csv"), [&](std::ostream& out) { write_dataset_csv(out, d.train); });
      write_file(out_dir / (stem + "_val.csv"), [&](std::ostream& out) { write_dataset_csv(out, d.val); });
      write_file(out_dir / (stem + "_test.csv"), [&](std::ostream& out) { write_dataset_csv(out, d.test); });
    }
  }
  const auto summary = summarize(runs);
  write_file(out_dir / "summary.txt", [&](std::ostream& out) { write_summary(out, summary); });
  for (const MethodRun& run : runs) {
    const auto gap = summary.find(run.name + ".loss_gen_gap");
    log << run.name << " loss_gen_gap=" << (gap == summary.end() ? "n/a" : gap->second) << '\n';
  }
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_sweep_heatmap(const Config& config, const std::filesystem::path& out_dir, std::ostream& log) {
  require_keys(config, heatmap_keys());
  const HeatmapConfig h = heatmap_from(config);
  prepare_dir(out_dir);
  const std::vector<HeatmapCell> cells = run_heatmap(h);
  const auto path = out_dir / "heatmap.csv";
  write_file(path, [&](std::ostream& out) { write_heatmap_csv(out, cells); });
  std::size_t diverged = 0;
  for (const HeatmapCell& c : cells) diverged += c.diverged ? 1 : 0;
  log << "wrote " << path.filename().string() << " (" << cells.size() << " cells, " << diverged
      << " diverged)\n";
  return diverged == 0 ? kExitOk : kExitDiverged;
}

int cmd_verify(const Config& config, const std::filesystem::path& out_dir, std::ostream& log) {
  require_keys(config, verify_keys());
  VerifyOptions options;
  options.seed = config.get_u64("seed", 0);
  options.perturb_phi = config.get_bool("perturb_phi", false);
  std::ostringstream report;
  const bool ok = run_verify(options, report);
  prepare_dir(out_dir);
  write_file(out_dir / "verify_report.txt", [&](std::ostream& out) { out << report.str(); });
  log << report.str();
  return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace softad
