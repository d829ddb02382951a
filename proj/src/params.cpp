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

#include "regformer/params.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "regformer/errors.hpp"
#include "regformer/rng.hpp"

namespace regformer {

static_assert(std::endian::native == std::endian::little,
              "checkpoint and tensor I/O assume a little-endian host");

ModelDims ModelDims::with_defaults(std::size_t d_v, std::size_t d_t) {
  return ModelDims{d_v, d_t, d_t, d_v};
}

void ModelDims::validate() const {
  require(d_v > 0 && d_t > 0 && d_s > 0 && d > 0, ErrorCategory::kArgument,
          "model dims must all be positive");
  require(d == d_v, ErrorCategory::kArgument,
          "decoder dim d must equal the patch feature dim d_v");
}

namespace {

Tensor2D uniform_fan_in(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Tensor2D t(rows, cols);
  for (double& v : t.values()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

// Rectangular identity plus a scaled fan-in draw. Consumes the same draws as
// uniform_fan_in so both schemes share one stream layout.
Tensor2D grounding_block(std::size_t rows, std::size_t cols, Rng& rng, const InitOptions& init) {
  Tensor2D t = uniform_fan_in(rows, cols, rng);
  if (init.grounding == GroundingInit::kUniform) return t;
  for (double& v : t.values()) v *= init.identity_jitter;
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) t(i, i) += 1.0;
  for (double& v : t.values()) v = static_cast<float>(v);
  return t;
}

}  // namespace

AttentionParams init_attention(std::size_t d, Rng& rng) {
  AttentionParams a;
  a.query = uniform_fan_in(d, d, rng);
  a.key = uniform_fan_in(d, d, rng);
  a.value = uniform_fan_in(d, d, rng);
  a.output = uniform_fan_in(d, d, rng);
  a.ln_gain = Tensor2D(1, d, 1.0);
  a.ln_bias = Tensor2D(1, d, 0.0);
  return a;
}

RegFormerParams init_params(const ModelDims& dims, std::uint64_t seed,
                            const GroundingConfig& config, const InitOptions& init) {
  dims.validate();
  require(init.identity_jitter >= 0.0, ErrorCategory::kArgument, "identity jitter must be >= 0");
  require(config.tau_p > 0.0, ErrorCategory::kArgument, "tau_p must be > 0");
  require(config.gamma >= 0.0, ErrorCategory::kArgument, "gamma must be >= 0");
  Rng rng(seed, /*stream=*/0x5041524D);
  RegFormerParams p;
  p.dims = dims;
  p.proj_patch_h = grounding_block(dims.d_v, dims.d_s, rng, init);
  p.proj_patch_o = grounding_block(dims.d_v, dims.d_s, rng, init);
  p.proj_text_h = grounding_block(dims.d_t, dims.d_s, rng, init);
  p.proj_text_o = grounding_block(dims.d_t, dims.d_s, rng, init);
  p.proj_query = uniform_fan_in(2 * dims.d, dims.d, rng);
  p.attn = init_attention(dims.d, rng);
  p.proj_action = uniform_fan_in(dims.d, dims.d_t, rng);
  p.tau_p = config.tau_p;
  p.gamma = config.gamma;
  return p;
}

MLDecoderParams init_mldecoder_params(std::size_t d_t, std::size_t d, std::uint64_t seed) {
  require(d_t > 0 && d > 0, ErrorCategory::kArgument, "baseline dims must be positive");
  Rng rng(seed, /*stream=*/0x4D4C4443);
  MLDecoderParams p;
  p.proj_query_in = uniform_fan_in(d_t, d, rng);
  p.attn = init_attention(d, rng);
  p.proj_out = uniform_fan_in(d, 1, rng);
  return p;
}

RegFormerParams RegFormerParams::zeros_like() const {
  RegFormerParams z = *this;
  z.for_each_block([](std::string_view, std::size_t, std::size_t, std::span<double> v) {
    std::fill(v.begin(), v.end(), 0.0);
  });
  return z;
}

std::size_t RegFormerParams::parameter_count() const {
  std::size_t n = 0;
  for_each_block([&](std::string_view, std::size_t, std::size_t, auto v) { n += v.size(); });
  return n;
}

std::vector<double> RegFormerParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_block([&](std::string_view, std::size_t, std::size_t, auto v) {
    flat.insert(flat.end(), v.begin(), v.end());
  });
  return flat;
}

void RegFormerParams::assign_flat(std::span<const double> flat) {
  require(flat.size() == parameter_count(), ErrorCategory::kShape,
          "flat parameter vector has wrong length");
  std::size_t offset = 0;
  for_each_block([&](std::string_view, std::size_t, std::size_t, std::span<double> v) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), v.size(), v.begin());
    offset += v.size();
  });
}

void RegFormerParams::add_scaled(const RegFormerParams& other, double scale) {
  const std::vector<double> delta = other.flatten();
  require(delta.size() == parameter_count(), ErrorCategory::kShape,
          "add_scaled: parameter structures differ");
  std::size_t offset = 0;
  for_each_block([&](std::string_view, std::size_t, std::size_t, std::span<double> v) {
    for (double& x : v) x += scale * delta[offset++];
  });
}

bool RegFormerParams::all_finite() const {
  bool ok = true;
  for_each_block([&](std::string_view, std::size_t, std::size_t, auto v) {
    for (double x : v) ok = ok && std::isfinite(x);
  });
  return ok;
}

// ---------------------------------------------------------------------------
// Checkpoint encoding

namespace {

constexpr char kCheckpointMagic[4] = {'R', 'G', 'F', 'C'};

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void f32(float v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  void bytes(void* p, std::size_t n, const char* what) {
    require(offset_ + n <= in_.size(), ErrorCategory::kFormat,
            std::string("checkpoint truncated reading ") + what + " at offset " +
                std::to_string(offset_));
    std::memcpy(p, in_.data() + offset_, n);
    offset_ += n;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  float f32(const char* what) {
    float v;
    bytes(&v, sizeof v, what);
    return v;
  }
  double f64(const char* what) {
    double v;
    bytes(&v, sizeof v, what);
    return v;
  }
  std::size_t offset() const noexcept { return offset_; }
  std::size_t remaining() const noexcept { return in_.size() - offset_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t offset_ = 0;
};

// Shapes every block must have for the declared dims, in checkpoint order.
RegFormerParams skeleton(const ModelDims& dims) {
  RegFormerParams p;
  p.dims = dims;
  p.proj_patch_h = Tensor2D(dims.d_v, dims.d_s);
  p.proj_patch_o = Tensor2D(dims.d_v, dims.d_s);
  p.proj_text_h = Tensor2D(dims.d_t, dims.d_s);
  p.proj_text_o = Tensor2D(dims.d_t, dims.d_s);
  p.proj_query = Tensor2D(2 * dims.d, dims.d);
  p.attn.query = Tensor2D(dims.d, dims.d);
  p.attn.key = Tensor2D(dims.d, dims.d);
  p.attn.value = Tensor2D(dims.d, dims.d);
  p.attn.output = Tensor2D(dims.d, dims.d);
  p.attn.ln_gain = Tensor2D(1, dims.d);
  p.attn.ln_bias = Tensor2D(1, dims.d);
  p.proj_action = Tensor2D(dims.d, dims.d_t);
  return p;
}

// Sigmoid temperature/bias pairs are scalars like tau_p and gamma and keep
// float64 so the ln(10) init survives a round trip.
bool is_scalar_block(std::string_view name) { return name.starts_with("sig_"); }

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const RegFormerParams& params) {
  ByteWriter w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  for (std::size_t dim : {params.dims.d_v, params.dims.d_t, params.dims.d_s, params.dims.d})
    w.u32(static_cast<std::uint32_t>(dim));
  w.f64(params.tau_p);
  w.f64(params.gamma);
  params.for_each_block([&](std::string_view name, std::size_t rows, std::size_t cols, auto values) {
    w.u32(static_cast<std::uint32_t>(rows));
    w.u32(static_cast<std::uint32_t>(cols));
    if (is_scalar_block(name)) {
      for (double v : values) w.f64(v);
    } else {
      for (double v : values) w.f32(static_cast<float>(v));
    }
  });
  return w.take();
}

RegFormerParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "magic");
  require(std::memcmp(magic, kCheckpointMagic, 4) == 0, ErrorCategory::kFormat,
          "bad checkpoint magic at offset 0 (expected RGFC)");
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  require(version == kCheckpointVersion, ErrorCategory::kFormat,
          "unsupported checkpoint version " + std::to_string(version) + " at offset " +
              std::to_string(version_at));
  ModelDims dims;
  dims.d_v = r.u32("dims");
  dims.d_t = r.u32("dims");
  dims.d_s = r.u32("dims");
  dims.d = r.u32("dims");
  try {
    dims.validate();
  } catch (const Error& e) {
    fail(ErrorCategory::kFormat, std::string("invalid dims in checkpoint header: ") + e.what());
  }
  RegFormerParams p = skeleton(dims);
  p.tau_p = r.f64("tau_p");
  p.gamma = r.f64("gamma");
  require(p.tau_p > 0.0 && p.gamma >= 0.0, ErrorCategory::kFormat,
          "invalid tau_p/gamma in checkpoint header");
  p.for_each_block([&](std::string_view name, std::size_t rows, std::size_t cols,
                       std::span<double> values) {
    const std::size_t at = r.offset();
    const std::uint32_t file_rows = r.u32("block shape");
    const std::uint32_t file_cols = r.u32("block shape");
    require(file_rows == rows && file_cols == cols, ErrorCategory::kFormat,
            "block " + std::string(name) + " at offset " + std::to_string(at) + " is " +
                std::to_string(file_rows) + "x" + std::to_string(file_cols) +
                " but the header dims require " + std::to_string(rows) + "x" +
                std::to_string(cols));
    for (double& v : values) v = is_scalar_block(name) ? r.f64("block payload") : r.f32("block payload");
  });
  require(r.remaining() == 0, ErrorCategory::kFormat,
          "trailing bytes after checkpoint payload at offset " + std::to_string(r.offset()));
  require(p.all_finite(), ErrorCategory::kFormat, "checkpoint contains non-finite values");
  return p;
}

void save_checkpoint(const RegFormerParams& params, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCategory::kIo, "failed writing " + path.string());
}

RegFormerParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace regformer
