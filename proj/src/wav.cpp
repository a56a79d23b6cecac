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

#include "earcough/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "earcough/error.hpp"

namespace earcough::wav {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  bool tag(const char* t) {
    need(4);
    bool ok = std::memcmp(bytes_.data() + pos_, t, 4) == 0;
    pos_ += 4;
    return ok;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw Error(Errc::MalformedHeader, "unexpected end of RIFF data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, const char* t) { out.insert(out.end(), t, t + 4); }

}  // namespace

WavData decode(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.has(12)) throw Error(Errc::MalformedHeader, "file shorter than RIFF header");
  if (!r.tag("RIFF")) throw Error(Errc::MalformedHeader, "missing RIFF tag");
  r.u32();  // riff size; trust chunk sizes instead
  if (!r.tag("WAVE")) throw Error(Errc::MalformedHeader, "missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> payload;
  bool have_data = false;

  while (r.remaining() >= 8 && !have_data) {
    auto id = r.take(4);
    const std::uint32_t size = r.u32();
    const bool is_fmt = std::memcmp(id.data(), "fmt ", 4) == 0;
    const bool is_data = std::memcmp(id.data(), "data", 4) == 0;
    if (is_fmt) {
      if (size < 16) throw Error(Errc::MalformedHeader, "fmt chunk too small");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      block_align = r.u16();
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(Errc::MalformedHeader, "extensible fmt chunk too small");
        r.u16();  // cbSize
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();  // leading two bytes of the subformat GUID
        r.skip(14);
        r.skip(size - 40);
      } else {
        r.skip(size - 16);
      }
      have_fmt = true;
    } else if (is_data) {
      if (!have_fmt) throw Error(Errc::MalformedHeader, "data chunk before fmt chunk");
      if (size > r.remaining()) throw Error(Errc::MalformedHeader, "data chunk truncated");
      payload = r.take(size);
      have_data = true;
      break;
    } else {
      r.skip(size);
    }
    if ((size & 1u) && r.remaining() > 0) r.skip(1);
  }
  if (!have_fmt) throw Error(Errc::MalformedHeader, "missing fmt chunk");
  if (!have_data) throw Error(Errc::MalformedHeader, "missing data chunk");
  if (channels == 0) throw Error(Errc::MalformedHeader, "zero channels");
  if (rate == 0) throw Error(Errc::MalformedHeader, "zero sample rate");

  WavData out;
  out.sample_rate_hz = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    out.format = SampleFormat::Pcm16;
  } else if (format == kFormatFloat && bits == 32) {
    out.format = SampleFormat::Float32;
  } else {
    throw Error(Errc::UnsupportedEncoding,
                "format tag " + std::to_string(format) + " with " + std::to_string(bits) + " bits");
  }
  const std::size_t bytes_per_sample = bits / 8;
  if (block_align != channels * bytes_per_sample) {
    throw Error(Errc::MalformedHeader, "block align does not match channel layout");
  }
  const std::size_t frames = payload.size() / block_align;
  out.channels.resize(channels, static_cast<Eigen::Index>(frames));
  const std::uint8_t* p = payload.data();
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      float v;
      if (out.format == SampleFormat::Pcm16) {
        auto s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        v = static_cast<float>(s) / 32768.0f;
      } else {
        std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                          (static_cast<std::uint32_t>(p[2]) << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
        v = std::bit_cast<float>(u);
      }
      out.channels(c, static_cast<Eigen::Index>(f)) = v;
      p += bytes_per_sample;
    }
  }
  return out;
}

WavData read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

std::vector<std::uint8_t> encode(const WavData& data) {
  const auto channels = static_cast<std::uint16_t>(data.channels.rows());
  const auto frames = static_cast<std::uint32_t>(data.channels.cols());
  const bool pcm = data.format == SampleFormat::Pcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
  const std::uint32_t data_bytes = frames * block_align;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, pcm ? kFormatPcm : kFormatFloat);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(data.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(data.sample_rate_hz) * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (std::uint32_t f = 0; f < frames; ++f) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      const float v = data.channels(c, f);
      if (pcm) {
        const float scaled = std::nearbyint(v * 32768.0f);
        const auto s = static_cast<std::int16_t>(std::clamp(scaled, -32768.0f, 32767.0f));
        put_u16(out, static_cast<std::uint16_t>(s));
      } else {
        put_u32(out, std::bit_cast<std::uint32_t>(v));
      }
    }
  }
  return out;
}

void write(const std::filesystem::path& path, const WavData& data) {
  auto bytes = encode(data);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoFailure, "short write to " + path.string());
}

}  // namespace earcough::wav
