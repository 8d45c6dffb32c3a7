#include "softad/harness.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "softad/csv.hpp"
#include "softad/loss_oracle.hpp"
#include "softad/truncators.hpp"

namespace softad {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kShuffleStream = 12;
constexpr std::uint64_t kHeatmapStream = 21;

const std::vector<std::string> kMetricsHeader = {"epoch",     "train_loss", "val_loss",
                                                 "test_loss", "train_acc",  "val_acc",
                                                 "test_acc",  "model_norm"};

bool finite_metrics(const EpochMetrics& m) {
  return std::isfinite(m.train_loss) && std::isfinite(m.val_loss) && std::isfinite(m.test_loss) &&
         std::isfinite(m.model_norm);
}

std::string method_key(const MethodRun& run) { return run.name; }

}  // namespace

std::size_t predict_class(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("empty operand");
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return best;
}

Evaluation evaluate(const MlpModel& model, const LabeledBatch& batch, LossKind loss) {
  batch.validate();
  const Tensor logits = mlp_forward(model, batch.inputs);
  double total = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = logits.row(i);
    total += loss == LossKind::kCrossEntropy ? cross_entropy(row, batch.labels[i])
                                             : squared_error(row, batch.labels[i]);
    if (predict_class(row) == batch.labels[i]) ++correct;
  }
  const double n = static_cast<double>(batch.size());
  return {total / n, static_cast<double>(correct) / n};
}

std::vector<std::size_t> TrialConfig::layer_dims() const {
  std::vector<std::size_t> dims{2};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(2);
  return dims;
}

void TrialConfig::validate() const {
  data.validate();
  objective.validate();
  optimizer.validate();
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1 || batch_size > data.n_train) {
    throw std::invalid_argument("batch size must be in [1, n_train]");
  }
  for (std::size_t h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden widths must be positive");
  }
}

const EpochMetrics& TrialRecord::final() const {
  if (rows.empty()) throw std::logic_error("trial has no recorded epochs");
  return rows.back();
}

double TrialRecord::gap() const { return final().test_loss - final().train_loss; }

DatasetSplits trial_data(const TrialConfig& config) {
  SyntheticSpec spec = config.data;
  spec.seed = config.seed;
  return generate(spec);
}

MlpModel trial_initial_model(const TrialConfig& config) {
  Rng rng = Rng(config.seed).substream(kInitStream);
  return MlpModel::initialize(config.layer_dims(), rng);
}

TrialRecord run_trial(const TrialConfig& config) { return run_trial(config, trial_data(config)); }

TrialRecord run_trial(const TrialConfig& config, const DatasetSplits& data) {
  config.validate();
  const std::vector<std::size_t> dims = config.layer_dims();
  MlpModel model = trial_initial_model(config);
  Tensor w = model.parameters();
  Rng shuffle_rng = Rng(config.seed).substream(kShuffleStream);
  std::unique_ptr<Optimizer> optimizer = make_optimizer(config.optimizer, w.size());

  TrialRecord record;
  record.hyperparameter = config.objective.hyperparameter();
  record.seed = config.seed;

  const std::size_t n = data.train.size();
  if (config.batch_size > n) throw std::invalid_argument("batch size must be in [1, n_train]");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.epochs && !record.diverged; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const LabeledBatch batch =
          data.train.subset(std::span<const std::size_t>(order).subspan(start, stop - start));
      const MlpLossOracle oracle(dims, batch, config.loss);
      const DirectionResult r = compute_direction(config.objective, oracle, w);
      if (!std::isfinite(r.objective_value) || !r.direction.all_finite()) {
        record.diverged = true;
        record.diagnostic = "non-finite objective at epoch " + std::to_string(epoch) +
                            ", update " + std::to_string(record.updates + 1);
        break;
      }
      optimizer->step(w, r.direction);
      ++record.updates;
    }
    if (record.diverged) break;
    if (!w.all_finite()) {
      record.diverged = true;
      record.diagnostic = "non-finite parameters at epoch " + std::to_string(epoch);
      break;
    }
    if (!config.record_every_epoch && epoch != config.epochs) continue;

    model.set_parameters(w);
    const Evaluation tr = evaluate(model, data.train, config.loss);
    const Evaluation va = evaluate(model, data.val, config.loss);
    const Evaluation te = evaluate(model, data.test, config.loss);
    EpochMetrics m{epoch, tr.mean_loss, va.mean_loss, te.mean_loss,
                   tr.accuracy, va.accuracy, te.accuracy, l2_norm(w)};
    if (!finite_metrics(m)) {
      record.diverged = true;
      record.diagnostic = "non-finite loss at epoch " + std::to_string(epoch);
      break;
    }
    record.rows.push_back(m);
  }
  record.final_parameters = std::move(w);
  return record;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) throw std::invalid_argument("linspace: need at least one point");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::size_t select_best(std::span<const double> values, std::span<const TrialRecord> records) {
  if (values.empty()) throw std::invalid_argument("empty grid");
  if (values.size() != records.size()) throw std::invalid_argument("grid/record size mismatch");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (records[i].diverged || records[i].rows.empty()) continue;
    if (!best) {
      best = i;
      continue;
    }
    const double acc = records[i].final().val_acc;
    const double best_acc = records[*best].final().val_acc;
    if (acc > best_acc || (acc == best_acc && values[i] < values[*best])) best = i;
  }
  if (!best) throw std::runtime_error("all trials diverged");
  return *best;
}

GridResult grid_search(const TrialConfig& base, std::span<const double> values,
                       const DatasetSplits& data) {
  if (values.empty()) throw std::invalid_argument("empty grid");
  GridResult result;
  result.values.assign(values.begin(), values.end());
  for (double v : values) {
    TrialConfig cfg = base;
    cfg.objective = base.objective.with_hyperparameter(v);
    cfg.record_every_epoch = false;
    result.records.push_back(run_trial(cfg, data));
  }
  result.best_index = select_best(result.values, result.records);
  result.best = result.values[result.best_index];
  return result;
}

double loss_gen_gap(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("no records");
  double test = 0.0;
  double train = 0.0;
  for (const TrialRecord& r : records) {
    test += r.final().test_loss;
    train += r.final().train_loss;
  }
  const double n = static_cast<double>(records.size());
  return test / n - train / n;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> rows) {
  CsvTable table;
  table.header = kMetricsHeader;
  for (const EpochMetrics& m : rows) {
    table.rows.push_back({std::to_string(m.epoch), format_double(m.train_loss),
                          format_double(m.val_loss), format_double(m.test_loss),
                          format_double(m.train_acc), format_double(m.val_acc),
                          format_double(m.test_acc), format_double(m.model_norm)});
  }
  write_csv(out, table);
}

std::vector<EpochMetrics> read_metrics_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  if (table.header != kMetricsHeader) throw std::runtime_error("unexpected metrics header");
  std::vector<EpochMetrics> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    EpochMetrics m;
    m.epoch = static_cast<std::size_t>(table.number(i, "epoch"));
    m.train_loss = table.number(i, "train_loss");
    m.val_loss = table.number(i, "val_loss");
    m.test_loss = table.number(i, "test_loss");
    m.train_acc = table.number(i, "train_acc");
    m.val_acc = table.number(i, "val_acc");
    m.test_acc = table.number(i, "test_acc");
    m.model_norm = table.number(i, "model_norm");
    rows.push_back(m);
  }
  return rows;
}

std::vector<MethodRun> run_comparison(const ComparisonConfig& config) {
  if (config.methods.empty()) throw std::invalid_argument("no methods");
  if (config.seeds.empty()) throw std::invalid_argument("no seeds");
  std::vector<MethodRun> runs;
  for (const ObjectiveSpec& m : config.methods) {
    runs.push_back({std::string(to_string(m.kind)), m, {}, {}, {}});
  }
  for (std::uint64_t seed : config.seeds) {
    TrialConfig base = config.base;
    base.seed = seed;
    const DatasetSplits data = trial_data(base);
    for (MethodRun& run : runs) {
      TrialConfig cfg = base;
      cfg.objective = run.objective;
      if (run.objective.hyperparameter()) {
        GridResult grid = grid_search(cfg, config.grid, data);
        cfg.objective = run.objective.with_hyperparameter(grid.best);
        run.selected.push_back(grid.best);
        run.grids.push_back(std::move(grid));
      }
      cfg.record_every_epoch = true;
      run.trials.push_back(run_trial(cfg, data));
    }
  }
  return runs;
}

std::map<std::string, std::string> summarize(std::span<const MethodRun> runs) {
  std::map<std::string, std::string> out;
  for (const MethodRun& run : runs) {
    const std::string key = method_key(run);
    std::vector<TrialRecord> ok;
    std::size_t diverged = 0;
    for (const TrialRecord& t : run.trials) {
      if (t.diverged || t.rows.empty()) {
        ++diverged;
      } else {
        ok.push_back(t);
      }
    }
    out[key + ".trials"] = std::to_string(run.trials.size());
    out[key + ".diverged"] = std::to_string(diverged);
    if (!ok.empty()) {
      std::vector<double> acc, train, test, norm;
      for (const TrialRecord& t : ok) {
        acc.push_back(t.final().test_acc);
        train.push_back(t.final().train_loss);
        test.push_back(t.final().test_loss);
        norm.push_back(t.final().model_norm);
      }
      const MeanStd a = mean_std(acc);
      out[key + ".loss_gen_gap"] = format_double(loss_gen_gap(ok));
      out[key + ".test_acc.mean"] = format_double(a.mean);
      out[key + ".test_acc.std"] = format_double(a.std);
      out[key + ".train_loss.mean"] = format_double(mean_std(train).mean);
      out[key + ".test_loss.mean"] = format_double(mean_std(test).mean);
      out[key + ".model_norm.mean"] = format_double(mean_std(norm).mean);
    }
    if (!run.selected.empty()) {
      const MeanStd h = mean_std(run.selected);
      out[key + ".hyperparameter.mean"] = format_double(h.mean);
      out[key + ".hyperparameter.std"] = format_double(h.std);
    }
    for (std::size_t i = 0; i < run.trials.size(); ++i) {
      const TrialRecord& t = run.trials[i];
      const std::string seed_key = key + ".seed." + std::to_string(t.seed);
      if (i < run.selected.size()) out[seed_key + ".hyperparameter"] = format_double(run.selected[i]);
      if (!t.diverged && !t.rows.empty()) out[seed_key + ".gap"] = format_double(t.gap());
    }
  }
  return out;
}

void write_summary(std::ostream& out, const std::map<std::string, std::string>& summary) {
  for (const auto& [k, v] : summary) out << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_summary(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("summary line without '='");
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::vector<HeatmapCell> run_heatmap(const HeatmapConfig& config) {
  if (config.thetas.empty() || config.sigmas.empty()) throw std::invalid_argument("empty grid");
  const Rng root = Rng(config.seed).substream(kHeatmapStream);
  std::vector<HeatmapCell> cells;
  std::uint64_t setting = 0;

  auto run_cell = [&](ObjectiveSpec objective) {
    TrialConfig cfg;
    cfg.data = config.data;
    cfg.hidden = {};
    cfg.objective = objective;
    cfg.optimizer = config.optimizer;
    cfg.epochs = config.epochs;
    cfg.batch_size = config.batch_size;
    cfg.seed = root.substream(setting++).next_u64();
    cfg.record_every_epoch = false;
    const TrialRecord r = run_trial(cfg);
    HeatmapCell cell;
    cell.method = std::string(to_string(objective.kind));
    cell.theta = objective.theta;
    if (objective.kind == ObjectiveKind::kSoftAd) cell.sigma = objective.sigma;
    cell.diverged = r.diverged;
    if (!r.diverged) {
      cell.test_loss = r.final().test_loss;
      cell.test_acc = r.final().test_acc;
    } else {
      cell.test_loss = std::numeric_limits<double>::quiet_NaN();
      cell.test_acc = std::numeric_limits<double>::quiet_NaN();
    }
    cells.push_back(cell);
  };

  for (double theta : config.thetas) {
    for (double sigma : config.sigmas) run_cell(ObjectiveSpec::softad(theta, sigma));
    run_cell(ObjectiveSpec::flood(theta));
  }
  return cells;
}

void write_heatmap_csv(std::ostream& out, std::span<const HeatmapCell> cells) {
  CsvTable table;
  table.header = {"method", "theta", "sigma", "test_loss", "test_acc", "diverged"};
  for (const HeatmapCell& c : cells) {
    table.rows.push_back({c.method, format_double(c.theta),
                          c.sigma ? format_double(*c.sigma) : std::string(),
                          format_double(c.test_loss), format_double(c.test_acc),
                          c.diverged ? "1" : "0"});
  }
  write_csv(out, table);
}

}  // namespace softad
