/**
 * Copyright 2026 The earcough Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "earcough/nn/serialize.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "earcough/error.hpp"

namespace earcough::nn {
namespace {

constexpr char kMagic[4] = {'E', 'C', 'N', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kFixedHeader = 20;
constexpr std::size_t kLayerRecord = 24;
constexpr std::uint32_t kMaxLayers = 1024;
constexpr std::int32_t kMaxDim = 1 << 20;

static_assert(std::endian::native == std::endian::little, "ECN1 I/O assumes a little-endian host");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v) { bytes(&v, 2); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void i32(std::int32_t v) { bytes(&v, 4); }
  void f32(float v) { bytes(&v, 4); }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > b_.size()) throw Error(Errc::TruncatedFile, "model file ends inside a field");
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> b) {
  uLong c = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(c, b.data(), static_cast<uInt>(b.size())));
}

bool valid_kind(std::uint8_t k) { return k >= 1 && k <= 5; }

}  // namespace

std::vector<std::uint8_t> encode_model(const ModelSpec& spec, const ModelParams<float>& params) {
  check_shapes(spec, params);
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(spec.sample_rate_hz));
  w.u32(static_cast<std::uint32_t>(spec.input_length));
  w.u32(static_cast<std::uint32_t>(spec.layers.size()));
  for (const LayerSpec& l : spec.layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u8(l.relu ? 1 : 0);
    w.u16(0);
    w.i32(l.in_channels);
    w.i32(l.out_channels);
    w.i32(l.kernel);
    w.i32(l.stride);
    w.i32(l.pool);
  }
  for (const auto& p : params.layers) {
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c) w.f32(p.weight(r, c));
    }
    for (Eigen::Index i = 0; i < p.bias.size(); ++i) w.f32(p.bias(i));
  }
  const std::uint32_t crc = crc32_of(w.data());
  w.u32(crc);
  return std::move(w.data());
}

StoredModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw Error(Errc::TruncatedFile, "model file shorter than its magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error(Errc::BadMagic, "not an ECN1 model file");
  if (bytes.size() < kFixedHeader) throw Error(Errc::TruncatedFile, "truncated ECN1 header");

  Reader r(bytes.subspan(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw Error(Errc::MalformedHeader, "unsupported ECN1 version " + std::to_string(version));
  StoredModel m;
  m.spec.sample_rate_hz = static_cast<int>(r.get<std::uint32_t>());
  m.spec.input_length = static_cast<int>(r.get<std::uint32_t>());
  const auto count = r.get<std::uint32_t>();
  if (count > kMaxLayers) throw Error(Errc::MalformedHeader, "implausible layer count");
  if (bytes.size() < kFixedHeader + count * kLayerRecord) throw Error(Errc::TruncatedFile, "truncated layer table");

  std::size_t payload = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec l;
    const auto kind = r.get<std::uint8_t>();
    const auto relu = r.get<std::uint8_t>();
    r.get<std::uint16_t>();
    l.in_channels = r.get<std::int32_t>();
    l.out_channels = r.get<std::int32_t>();
    l.kernel = r.get<std::int32_t>();
    l.stride = r.get<std::int32_t>();
    l.pool = r.get<std::int32_t>();
    if (!valid_kind(kind) || relu > 1) throw Error(Errc::MalformedHeader, "bad layer record " + std::to_string(i));
    for (int d : {l.in_channels, l.out_channels, l.kernel, l.stride, l.pool}) {
      if (d < 0 || d > kMaxDim) throw Error(Errc::MalformedHeader, "bad layer dimension in record " + std::to_string(i));
    }
    l.kind = static_cast<LayerKind>(kind);
    l.relu = relu == 1;
    payload += (l.weight_count() + l.bias_count()) * sizeof(float);
    m.spec.layers.push_back(l);
  }

  const std::size_t expected = kFixedHeader + count * kLayerRecord + payload + 4;
  if (bytes.size() < expected) throw Error(Errc::TruncatedFile, "model file is shorter than its layer table implies");
  if (bytes.size() > expected) throw Error(Errc::MalformedHeader, "trailing bytes after ECN1 checksum");
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + expected - 4, 4);
  if (stored != crc32_of(bytes.first(expected - 4))) throw Error(Errc::CrcMismatch, "ECN1 checksum mismatch");

  try {
    m.spec.validate();
  } catch (const Error& e) {
    throw Error(Errc::MalformedHeader, std::string("invalid layer graph: ") + e.what());
  }

  m.params = ModelParams<float>::zeros(m.spec);
  Reader pr(bytes.subspan(kFixedHeader + count * kLayerRecord));
  for (auto& p : m.params.layers) {
    for (Eigen::Index row = 0; row < p.weight.rows(); ++row) {
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c) p.weight(row, c) = pr.get<float>();
    }
    for (Eigen::Index i = 0; i < p.bias.size(); ++i) p.bias(i) = pr.get<float>();
  }
  return m;
}

void save_model(const std::filesystem::path& path, const ModelSpec& spec, const ModelParams<float>& params) {
  const std::vector<std::uint8_t> bytes = encode_model(spec, params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoFailure, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace earcough::nn
