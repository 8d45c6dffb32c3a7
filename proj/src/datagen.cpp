#include "softad/datagen.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "softad/csv.hpp"
#include "softad/loss_oracle.hpp"
#include "softad/truncators.hpp"

namespace softad {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kValStream = 2;
constexpr std::uint64_t kTestStream = 3;

LabeledBatch make_batch(std::vector<double> xs, std::vector<std::size_t> labels) {
  const std::size_t n = labels.size();
  return {Tensor::matrix(n, 2, std::move(xs)), std::move(labels), 2};
}

template <typename Sampler>
DatasetSplits split_with(const SyntheticSpec& spec, Sampler sample) {
  spec.validate();
  const Rng root(spec.seed);
  Rng train_rng = root.substream(kTrainStream);
  Rng val_rng = root.substream(kValStream);
  Rng test_rng = root.substream(kTestStream);
  return {sample(spec, spec.n_train, train_rng), sample(spec, spec.n_val, val_rng),
          sample(spec, spec.n_test, test_rng)};
}

}  // namespace

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "two_gaussians" || name == "gaussian") return DatasetKind::kTwoGaussians;
  if (name == "sinusoid") return DatasetKind::kSinusoid;
  if (name == "spiral") return DatasetKind::kSpiral;
  throw std::invalid_argument("unknown dataset '" + std::string(name) + "'");
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kTwoGaussians: return "two_gaussians";
    case DatasetKind::kSinusoid: return "sinusoid";
    case DatasetKind::kSpiral: return "spiral";
  }
  return "unknown";
}

void SyntheticSpec::validate() const {
  if (n_train < 1 || n_val < 1 || n_test < 1) {
    throw std::invalid_argument("dataset sizes must be at least 1");
  }
  if (!(label_flip_rate >= 0.0 && label_flip_rate <= 1.0)) {
    throw std::invalid_argument("label flip rate must be in [0,1]");
  }
  if (!(spiral_t_min < spiral_t_max) || !(spiral_noise >= 0.0)) {
    throw std::invalid_argument("bad spiral parameters");
  }
}

LabeledBatch sample_two_gaussians(const SyntheticSpec& spec, std::size_t n, Rng& rng) {
  std::vector<double> xs;
  xs.reserve(2 * n);
  std::vector<std::size_t> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // stratified: alternate classes
    const std::size_t y = i % 2;
    const auto& mu = y == 0 ? spec.mean0 : spec.mean1;
    xs.push_back(mu[0] + rng.normal());
    xs.push_back(mu[1] + rng.normal());
    labels.push_back(y);
  }
  return make_batch(std::move(xs), std::move(labels));
}

std::size_t sinusoid_label(double x1, double x2, double amplitude) {
  return x2 > amplitude * std::sin(std::numbers::pi * x1) ? 1 : 0;
}

LabeledBatch sample_sinusoid(const SyntheticSpec& spec, std::size_t n, Rng& rng) {
  std::vector<double> xs;
  xs.reserve(2 * n);
  std::vector<std::size_t> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.uniform(-1.0, 1.0);
    const double x2 = rng.uniform(-1.0, 1.0);
    std::size_t y = sinusoid_label(x1, x2, spec.sinusoid_amplitude);
    if (spec.label_flip_rate > 0.0 && rng.uniform() < spec.label_flip_rate) y = 1 - y;
    xs.push_back(x1);
    xs.push_back(x2);
    labels.push_back(y);
  }
  return make_batch(std::move(xs), std::move(labels));
}

std::array<double, 2> spiral_arm_point(double t, std::size_t label) {
  const double angle = 2.0 * t + std::numbers::pi * static_cast<double>(label);
  return {t * std::cos(angle), t * std::sin(angle)};
}

LabeledBatch sample_spiral(const SyntheticSpec& spec, std::size_t n, Rng& rng) {
  std::vector<double> xs;
  xs.reserve(2 * n);
  std::vector<std::size_t> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = i % 2;
    const double t = rng.uniform(spec.spiral_t_min, spec.spiral_t_max);
    const auto p = spiral_arm_point(t, y);
    xs.push_back(p[0] + spec.spiral_noise * rng.normal());
    xs.push_back(p[1] + spec.spiral_noise * rng.normal());
    labels.push_back(y);
  }
  return make_batch(std::move(xs), std::move(labels));
}

DatasetSplits gen_two_gaussians(const SyntheticSpec& spec) {
  return split_with(spec, sample_two_gaussians);
}

DatasetSplits gen_sinusoid(const SyntheticSpec& spec) { return split_with(spec, sample_sinusoid); }

DatasetSplits gen_spiral(const SyntheticSpec& spec) { return split_with(spec, sample_spiral); }

DatasetSplits generate(const SyntheticSpec& spec) {
  switch (spec.kind) {
    case DatasetKind::kTwoGaussians: return gen_two_gaussians(spec);
    case DatasetKind::kSinusoid: return gen_sinusoid(spec);
    case DatasetKind::kSpiral: return gen_spiral(spec);
  }
  throw std::logic_error("unhandled dataset kind");
}

void write_dataset_csv(std::ostream& out, const LabeledBatch& batch) {
  CsvTable table;
  table.header = {"x1", "x2", "label"};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto row = batch.inputs.row(i);
    table.rows.push_back(
        {format_double(row[0]), format_double(row[1]), std::to_string(batch.labels[i])});
  }
  write_csv(out, table);
}

Tensor gen_2dmean(Rng& rng) {
  const double sd = 2.0 * std::numbers::sqrt2;
  std::vector<double> xs(16);
  for (double& x : xs) x = sd * rng.normal();
  return Tensor::matrix(8, 2, std::move(xs));
}

MeanDemo make_mean_demo(std::uint64_t seed) {
  const Rng root(seed);
  Rng point_rng = root.substream(1);
  Rng candidate_rng = root.substream(2);

  MeanDemo demo;
  demo.points = gen_2dmean(point_rng);
  const SquaredDistanceOracle oracle(demo.points, 1.0);
  demo.minimizer = oracle.centroid();
  demo.min_risk = oracle.risk(demo.minimizer);
  demo.theta = 1.5 * demo.min_risk;

  // R_n(w) = min_risk + ||w - mean||^2, so the theta level set is a disc of
  // radius sqrt(theta - min_risk) around the mean
  const double level_radius = std::sqrt(demo.theta - demo.min_risk);
  const Tensor u_in = sample_unit_sphere(2, candidate_rng);
  const Tensor u_out = sample_unit_sphere(2, candidate_rng);
  demo.inside_candidate = demo.minimizer + u_in * (0.5 * level_radius);
  demo.outside_candidate = demo.minimizer + u_out * (3.0 * level_radius);
  return demo;
}

double quadratic_demo_step(double x, DemoMethod method, double theta, double sigma, double alpha) {
  const double f = 0.5 * x * x;
  double weight = 1.0;
  switch (method) {
    case DemoMethod::kGd: weight = 1.0; break;
    case DemoMethod::kFlood: weight = sign(f - theta); break;
    case DemoMethod::kSoftAd: weight = phi((f - theta) / sigma); break;
  }
  return x - alpha * weight * x;
}

}  // namespace softad
