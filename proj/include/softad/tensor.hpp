#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "softad/rng.hpp"

namespace softad {

/// Dense row-major array of doubles with shape metadata.
///
/// Model parameters and gradients are rank-1 tensors of length d; batches and
/// per-example gradient stacks are rank-2 (rows are examples).
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor of the given shape.
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::vector<double> data);
  static Tensor vector(std::initializer_list<double> data);
  static Tensor zeros(std::size_t n) { return Tensor({n}); }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Leading dimension, and the product of the remaining ones.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r);
  std::span<const double> row(std::size_t r) const;

  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double scale);

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor lhs, const Tensor& rhs);
Tensor operator-(Tensor lhs, const Tensor& rhs);
Tensor operator*(Tensor lhs, double scale);
Tensor operator*(double scale, Tensor rhs);

/// y += alpha * x
void axpy(double alpha, const Tensor& x, Tensor& y);
double dot(const Tensor& a, const Tensor& b);

double l2_norm(std::span<const double> v);
double l2_norm(const Tensor& v);

/// v * min(1, gamma / ||v||). Zero stays zero.
Tensor clip_to_norm(const Tensor& v, double gamma);

/// Euclidean projection onto the centered ball of the given radius.
Tensor project_to_ball(const Tensor& v, double radius);

/// Uniform draw from the unit sphere in R^d (normalized Gaussian).
Tensor sample_unit_sphere(std::size_t d, Rng& rng);

}  // namespace softad
