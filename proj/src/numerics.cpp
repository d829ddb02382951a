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

#include "regformer/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "regformer/errors.hpp"
#include "regformer/kernels.hpp"

namespace regformer {

Tensor2D::Tensor2D(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorCategory::kShape,
          "tensor data length " + std::to_string(data_.size()) + " != " +
              std::to_string(rows_) + "x" + std::to_string(cols_));
}

Tensor2D Tensor2D::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    require(row.size() == c, ErrorCategory::kShape, "ragged rows in Tensor2D::from_rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor2D(r, c, std::move(data));
}

Tensor2D Tensor2D::identity(std::size_t n) {
  Tensor2D t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

bool Tensor2D::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

AdditiveMask AdditiveMask::from_indicator(std::span<const std::uint8_t> bits) {
  AdditiveMask mask(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == 0) mask.excluded_[i] = 1;
  }
  return mask;
}

std::size_t AdditiveMask::kept_count() const noexcept {
  return static_cast<std::size_t>(std::count(excluded_.begin(), excluded_.end(), 0));
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
  require(a.cols() == b.rows(), ErrorCategory::kShape,
          "matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
              std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Tensor2D out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) vecmat_accumulate(a.row(i), b, out.row(i));
  return out;
}

Tensor2D transpose(const Tensor2D& a) {
  Tensor2D out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

std::vector<double> vecmat(std::span<const double> x, const Tensor2D& w) {
  std::vector<double> y(w.cols(), 0.0);
  vecmat_accumulate(x, w, y);
  return y;
}

void vecmat_accumulate(std::span<const double> x, const Tensor2D& w, std::span<double> y) {
  require(x.size() == w.rows() && y.size() == w.cols(), ErrorCategory::kShape,
          "vecmat: vector of " + std::to_string(x.size()) + " against " +
              std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) kernels::axpy(x[i], w.row(i).data(), y.data(), y.size());
  }
}

std::vector<double> matvec(const Tensor2D& w, std::span<const double> v) {
  require(v.size() == w.cols(), ErrorCategory::kShape,
          "matvec: " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
              " against vector of " + std::to_string(v.size()));
  std::vector<double> y(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) y[i] = kernels::dot(w.row(i), v);
  return y;
}

void add_outer(std::span<const double> x, std::span<const double> g, Tensor2D& w) {
  require(x.size() == w.rows() && g.size() == w.cols(), ErrorCategory::kShape,
          "add_outer: shape mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) kernels::axpy(x[i], g.data(), w.row(i).data(), g.size());
  }
}

std::vector<double> masked_softmax(std::span<const double> logits, double temperature,
                                   const AdditiveMask* mask) {
  require(temperature > 0.0, ErrorCategory::kArgument, "softmax temperature must be > 0");
  const std::size_t n = logits.size();
  if (mask != nullptr) {
    require(mask->size() == n, ErrorCategory::kShape, "softmax mask length mismatch");
  }
  auto kept = [&](std::size_t i) { return mask == nullptr || !mask->excluded(i); };

  std::vector<double> out(n, 0.0);
  double max_scaled = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!kept(i)) continue;
    out[i] = logits[i] / temperature;
    max_scaled = any ? std::max(max_scaled, out[i]) : out[i];
    any = true;
  }
  require(any, ErrorCategory::kEmptyMask, "softmax: every position is excluded");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!kept(i)) continue;
    out[i] = std::exp(out[i] - max_scaled);
    total += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (kept(i)) out[i] /= total;
  }
  return out;
}

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double scaled_sigmoid(double z, double log_temp, double bias) noexcept {
  return sigmoid(std::exp(log_temp) * z + bias);
}

double norm(std::span<const double> v) noexcept { return std::sqrt(kernels::dot(v, v)); }

double safe_cosine(std::span<const double> u, std::span<const double> v, double eps) {
  require(u.size() == v.size(), ErrorCategory::kShape, "cosine: vectors differ in length");
  const double denom = std::max(norm(u) * norm(v), eps);
  return std::clamp(kernels::dot(u, v) / denom, -1.0, 1.0);
}

void safe_cosine_backward(std::span<const double> u, std::span<const double> v, double upstream,
                          std::span<double> du, std::span<double> dv, double eps) {
  const double nu = norm(u);
  const double nv = norm(v);
  const double prod = nu * nv;
  if (prod <= eps) {
    // Denominator pinned at eps: cos = dot / eps.
    kernels::axpy(upstream / eps, v, du);
    kernels::axpy(upstream / eps, u, dv);
    return;
  }
  const double cos = kernels::dot(u, v) / prod;
  kernels::axpy(upstream / prod, v, du);
  kernels::axpy(-upstream * cos / (nu * nu), u, du);
  kernels::axpy(upstream / prod, u, dv);
  kernels::axpy(-upstream * cos / (nv * nv), v, dv);
}

std::vector<double> finite_diff_grad(const ScalarObjective& f, std::span<const double> theta,
                                     double h) {
  require(h > 0.0, ErrorCategory::kArgument, "finite difference step must be > 0");
  std::vector<double> probe(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    require(std::isfinite(up) && std::isfinite(down), ErrorCategory::kOracle,
            "finite difference: objective is not finite at coordinate " + std::to_string(i));
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double gradient_relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace regformer
