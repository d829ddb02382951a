// Copyright 2026 The RegFormer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace regformer {

inline constexpr double kCosineEps = 1e-8;
inline constexpr double kFiniteDiffStep = 1e-5;

// Row-major float64 matrix. Vectors are plain std::vector<double>; a row
// vector times a matrix (x W) is the projection convention used everywhere.
class Tensor2D {
 public:
  Tensor2D() = default;
  Tensor2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Tensor2D from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor2D identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor2D&, const Tensor2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Additive log-mask over softmax positions: each position is either kept
// (log 1 = 0) or excluded (log 0). Exclusion is a flag rather than -inf so
// no NaN can come out of (-inf) * 0.
class AdditiveMask {
 public:
  AdditiveMask() = default;
  explicit AdditiveMask(std::size_t n) : excluded_(n, 0) {}
  // bits[i] == 0 -> excluded, nonzero -> kept.
  static AdditiveMask from_indicator(std::span<const std::uint8_t> bits);

  std::size_t size() const noexcept { return excluded_.size(); }
  bool excluded(std::size_t i) const { return excluded_[i] != 0; }
  void exclude(std::size_t i) { excluded_.at(i) = 1; }
  std::size_t kept_count() const noexcept;

 private:
  std::vector<std::uint8_t> excluded_;
};

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);
Tensor2D transpose(const Tensor2D& a);

// y = x W  (x has W.rows() entries)
std::vector<double> vecmat(std::span<const double> x, const Tensor2D& w);
// y += x W
void vecmat_accumulate(std::span<const double> x, const Tensor2D& w, std::span<double> y);
// y = W v  (v has W.cols() entries); the adjoint of vecmat
std::vector<double> matvec(const Tensor2D& w, std::span<const double> v);
// w += outer(x, g), the gradient of x W with respect to W
void add_outer(std::span<const double> x, std::span<const double> g, Tensor2D& w);

// softmax(logits / temperature) over kept positions; excluded positions are 0.
std::vector<double> masked_softmax(std::span<const double> logits, double temperature,
                                   const AdditiveMask* mask = nullptr);

// 1 / (1 + exp(-(exp(log_temp) * z + bias)))
double scaled_sigmoid(double z, double log_temp, double bias) noexcept;
double sigmoid(double t) noexcept;

double norm(std::span<const double> v) noexcept;

// dot(u, v) / max(|u||v|, eps), clamped to [-1, 1].
double safe_cosine(std::span<const double> u, std::span<const double> v,
                   double eps = kCosineEps);

// Gradient of safe_cosine with respect to u and v, added into du/dv after
// scaling by `upstream`.
void safe_cosine_backward(std::span<const double> u, std::span<const double> v,
                          double upstream, std::span<double> du, std::span<double> dv,
                          double eps = kCosineEps);

using ScalarObjective = std::function<double(std::span<const double>)>;

// Central differences (f(t + h e_i) - f(t - h e_i)) / 2h for every i.
std::vector<double> finite_diff_grad(const ScalarObjective& f, std::span<const double> theta,
                                     double h = kFiniteDiffStep);

// |a - n| / max(|a|, |n|, 1e-8)
double gradient_relative_error(double analytic, double numeric) noexcept;

}  // namespace regformer
