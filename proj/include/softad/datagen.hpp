#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "softad/mlp.hpp"
#include "softad/rng.hpp"
#include "softad/tensor.hpp"

namespace softad {

enum class DatasetKind { kTwoGaussians, kSinusoid, kSpiral };

DatasetKind parse_dataset_kind(std::string_view name);
std::string_view to_string(DatasetKind kind);

struct SyntheticSpec {
  DatasetKind kind = DatasetKind::kTwoGaussians;
  std::size_t n_train = 100;
  std::size_t n_val = 100;
  std::size_t n_test = 20000;
  std::uint64_t seed = 0;

  // two Gaussians: class y ~ N(mean_y, I)
  std::array<double, 2> mean0{0.0, 0.0};
  std::array<double, 2> mean1{2.0, 2.0};
  // sinusoid: label = x2 > amplitude * sin(pi * x1), then flipped with this rate
  double sinusoid_amplitude = 0.5;
  double label_flip_rate = 0.0;
  // spiral: t ~ U[t_min, t_max], point = t (cos(2t + pi y), sin(2t + pi y)) + noise
  double spiral_t_min = 0.25;
  double spiral_t_max = 3.5;
  double spiral_noise = 0.1;

  void validate() const;
};

struct DatasetSplits {
  LabeledBatch train;
  LabeledBatch val;
  LabeledBatch test;
};

/// Train, validation and test are independent draws from separate substreams
/// of the spec seed.
DatasetSplits gen_two_gaussians(const SyntheticSpec& spec);
DatasetSplits gen_sinusoid(const SyntheticSpec& spec);
DatasetSplits gen_spiral(const SyntheticSpec& spec);
DatasetSplits generate(const SyntheticSpec& spec);

/// Single-split generators, used by the above.
LabeledBatch sample_two_gaussians(const SyntheticSpec& spec, std::size_t n, Rng& rng);
LabeledBatch sample_sinusoid(const SyntheticSpec& spec, std::size_t n, Rng& rng);
LabeledBatch sample_spiral(const SyntheticSpec& spec, std::size_t n, Rng& rng);

std::size_t sinusoid_label(double x1, double x2, double amplitude = 0.5);
std::array<double, 2> spiral_arm_point(double t, std::size_t label);

/// CSV with header x1,x2,label.
void write_dataset_csv(std::ostream& out, const LabeledBatch& batch);

/// The 2D mean-estimation demo: 8 points from N(0, 8 I), loss ||w - z||^2,
/// theta = 1.5 * min_w R_n(w), alpha = 0.75.
struct MeanDemo {
  Tensor points;  // 8 x 2
  Tensor minimizer;
  double min_risk = 0.0;
  double theta = 0.0;
  double alpha = 0.75;
  Tensor inside_candidate;   // R_n below theta
  Tensor outside_candidate;  // R_n well above theta
};

Tensor gen_2dmean(Rng& rng);
MeanDemo make_mean_demo(std::uint64_t seed);

enum class DemoMethod { kGd, kFlood, kSoftAd };

/// One step on f(x) = x^2 / 2: x - alpha * w(x) * x with w = 1 (GD),
/// sign(f - theta) (Flood) or phi((f - theta) / sigma) (SoftAD).
double quadratic_demo_step(double x, DemoMethod method, double theta, double sigma, double alpha);

}  // namespace softad
