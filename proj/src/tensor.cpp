#include "softad/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace softad {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != data_.size()) {
    throw std::invalid_argument("Tensor: shape does not match data length");
  }
}

Tensor Tensor::vector(std::vector<double> data) {
  const std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> data) {
  return vector(std::vector<double>(data));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

std::size_t Tensor::rows() const { return shape_.empty() ? 0 : shape_.front(); }

std::size_t Tensor::cols() const {
  if (shape_.empty()) return 0;
  return std::accumulate(shape_.begin() + 1, shape_.end(), std::size_t{1}, std::multiplies<>());
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(r * c, c);
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double scale) {
  for (double& x : data_) x *= scale;
  return *this;
}

Tensor operator+(Tensor lhs, const Tensor& rhs) { return lhs += rhs; }
Tensor operator-(Tensor lhs, const Tensor& rhs) { return lhs -= rhs; }
Tensor operator*(Tensor lhs, double scale) { return lhs *= scale; }
Tensor operator*(double scale, Tensor rhs) { return rhs *= scale; }

void axpy(double alpha, const Tensor& x, Tensor& y) {
  require_same_shape(x, y, "axpy");
  auto xs = x.data();
  auto ys = y.data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] += alpha * xs[i];
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("empty operand");
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double l2_norm(const Tensor& v) { return l2_norm(v.data()); }

Tensor clip_to_norm(const Tensor& v, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("invalid radius");
  const double norm = l2_norm(v);
  if (norm <= gamma) return v;
  double scale = gamma / norm;
  Tensor out = v * scale;
  // rounding can leave the result an ulp outside; shrink until it is inside so
  // that a second clip is a no-op
  while (l2_norm(out) > gamma) {
    scale = std::nextafter(scale, 0.0);
    out = v * scale;
  }
  return out;
}

Tensor project_to_ball(const Tensor& v, double radius) { return clip_to_norm(v, radius); }

Tensor sample_unit_sphere(std::size_t d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("sample_unit_sphere: dimension must be at least 1");
  Tensor u = Tensor::zeros(d);
  double norm = 0.0;
  do {
    for (std::size_t i = 0; i < d; ++i) u[i] = rng.normal();
    norm = l2_norm(u);
  } while (norm == 0.0);
  for (double& x : u.data()) x /= norm;
  return u;
}

}  // namespace softad
