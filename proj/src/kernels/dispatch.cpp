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

#include <atomic>
#include <string>

#include "regformer/errors.hpp"
#include "regformer/kernels.hpp"

namespace regformer::kernels {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t) noexcept;
using AxpyFn = void (*)(double, const double*, double*, std::size_t) noexcept;

struct Table {
  Isa isa;
  DotFn dot;
  AxpyFn axpy;
};

Table table_for(Isa isa) noexcept {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2: return {Isa::kAvx2, &avx2::dot, &avx2::axpy};
#endif
#if defined(__aarch64__)
    case Isa::kNeon: return {Isa::kNeon, &neon::dot, &neon::axpy};
#endif
    default: return {Isa::kScalar, &scalar::dot, &scalar::axpy};
  }
}

std::atomic<Isa> g_isa{best_available_isa()};
std::atomic<DotFn> g_dot{table_for(best_available_isa()).dot};
std::atomic<AxpyFn> g_axpy{table_for(best_available_isa()).axpy};

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar: return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa best_available_isa() noexcept {
  if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() noexcept { return g_isa.load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  require(isa_available(isa), ErrorCategory::kArgument,
          "instruction set '" + std::string(isa_name(isa)) + "' is not available on this host");
  const Table t = table_for(isa);
  g_dot.store(t.dot, std::memory_order_relaxed);
  g_axpy.store(t.axpy, std::memory_order_relaxed);
  g_isa.store(t.isa, std::memory_order_relaxed);
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  return g_dot.load(std::memory_order_relaxed)(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  g_axpy.load(std::memory_order_relaxed)(alpha, x, y, n);
}

}  // namespace regformer::kernels
