#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "softad/datagen.hpp"
#include "softad/mlp.hpp"
#include "softad/objectives.hpp"
#include "softad/optimizers.hpp"

namespace softad {

struct Evaluation {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

/// Argmax ties go to the lowest class index.
std::size_t predict_class(std::span<const double> logits);
Evaluation evaluate(const MlpModel& model, const LabeledBatch& batch, LossKind loss);

struct TrialConfig {
  SyntheticSpec data;
  std::vector<std::size_t> hidden{64, 64};
  LossKind loss = LossKind::kCrossEntropy;
  ObjectiveSpec objective;
  OptimizerSpec optimizer;
  std::size_t epochs = 200;
  std::size_t batch_size = 50;
  std::uint64_t seed = 0;
  /// When false only the last epoch is evaluated and recorded.
  bool record_every_epoch = true;

  std::vector<std::size_t> layer_dims() const;
  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double test_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double model_norm = 0.0;

  bool operator==(const EpochMetrics&) const = default;
};

struct TrialRecord {
  std::vector<EpochMetrics> rows;
  std::optional<double> hyperparameter;
  std::uint64_t seed = 0;
  std::size_t updates = 0;
  bool diverged = false;
  std::string diagnostic;
  Tensor final_parameters;

  const EpochMetrics& final() const;
  /// Final test loss minus final train loss.
  double gap() const;

  bool operator==(const TrialRecord&) const = default;
};

/// Streams for one seed: data from the seed itself, initial weights and
/// mini-batch shuffles from fixed substreams. Every method run with the same
/// seed sees the same data and the same initial weights.
DatasetSplits trial_data(const TrialConfig& config);
MlpModel trial_initial_model(const TrialConfig& config);

/// Non-finite losses stop the trial with `diverged` set; no exception.
TrialRecord run_trial(const TrialConfig& config);
TrialRecord run_trial(const TrialConfig& config, const DatasetSplits& data);

/// n points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct GridResult {
  double best = 0.0;
  std::size_t best_index = 0;
  std::vector<double> values;
  std::vector<TrialRecord> records;
};

/// Highest final validation accuracy wins; equal accuracies go to the smaller
/// value. Diverged records never win. Throws if every record diverged.
std::size_t select_best(std::span<const double> values, std::span<const TrialRecord> records);

/// One trial per grid value (final epoch only), then selection.
GridResult grid_search(const TrialConfig& base, std::span<const double> values,
                       const DatasetSplits& data);

/// Mean final test loss minus mean final train loss over records.
double loss_gen_gap(std::span<const TrialRecord> records);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

/// Per-epoch CSV: epoch,train_loss,val_loss,test_loss,train_acc,val_acc,test_acc,model_norm
void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> rows);
std::vector<EpochMetrics> read_metrics_csv(std::istream& in);

struct MethodRun {
  std::string name;
  ObjectiveSpec objective;
  /// Selected trial per seed, recorded every epoch.
  std::vector<TrialRecord> trials;
  /// Selected hyperparameter per seed; empty for ERM.
  std::vector<double> selected;
  /// Grid trials per seed; empty for ERM.
  std::vector<GridResult> grids;
};

struct ComparisonConfig {
  TrialConfig base;
  std::vector<ObjectiveSpec> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<double> grid = linspace(0.01, 2.0, 40);
};

/// For each seed and method: grid-select the hyperparameter on validation
/// accuracy (methods without one skip this), then rerun the winner with a
/// full per-epoch record.
std::vector<MethodRun> run_comparison(const ComparisonConfig& config);

/// key=value summary, one entry per line, keys sorted:
///   <method>.loss_gen_gap, <method>.test_acc.mean, <method>.test_acc.std,
///   <method>.train_loss.mean, <method>.test_loss.mean, <method>.model_norm.mean,
///   <method>.hyperparameter.mean, <method>.hyperparameter.std,
///   <method>.seed.<s>.hyperparameter, <method>.seed.<s>.gap, <method>.diverged
std::map<std::string, std::string> summarize(std::span<const MethodRun> runs);
void write_summary(std::ostream& out, const std::map<std::string, std::string>& summary);
std::map<std::string, std::string> read_summary(std::istream& in);

struct HeatmapConfig {
  SyntheticSpec data;
  OptimizerSpec optimizer{OptimizerKind::kSgd, 0.1};
  std::size_t epochs = 200;
  std::size_t batch_size = 100;  // full batch at the default n_train
  std::uint64_t seed = 0;
  std::vector<double> thetas = linspace(0.05, 1.5, 10);
  std::vector<double> sigmas{0.25, 0.5, 1.0, 2.0, 4.0};
};

struct HeatmapCell {
  std::string method;  // "softad" or "flood"
  double theta = 0.0;
  std::optional<double> sigma;
  double test_loss = 0.0;
  double test_acc = 0.0;
  bool diverged = false;
};

/// Linear model on fresh data per setting: every SoftAD (theta, sigma) pair
/// plus a Flooding reference per theta.
std::vector<HeatmapCell> run_heatmap(const HeatmapConfig& config);
/// CSV: method,theta,sigma,test_loss,test_acc,diverged (sigma empty for flood).
void write_heatmap_csv(std::ostream& out, std::span<const HeatmapCell> cells);

}  // namespace softad
