// Copyright 2026 The oqsonic Authors
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

// 16-bit PCM stereo RIFF/WAVE.
//
// Layout (little-endian):
//   0  "RIFF"   4  u32 36 + data_bytes   8  "WAVE"
//   12 "fmt "   16 u32 16   20 u16 1 (PCM)   22 u16 2 (channels)
//   24 u32 sample_rate   28 u32 sample_rate * 4   32 u16 4   34 u16 16
//   36 "data"   40 u32 data_bytes   44 interleaved L, R int16 samples

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "oqsonic/errors.hpp"
#include "oqsonic/sonify.hpp"

namespace oqs {

inline constexpr std::size_t kWavHeaderBytes = 44;

// Rounds half away from zero and clips symmetrically to +-32767.
inline std::int16_t quantize_pcm16(double x) {
  const double scaled = std::clamp(x, -1.0, 1.0) * 32767.0;
  return static_cast<std::int16_t>(std::lround(scaled));
}

namespace detail {

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}
inline void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

// Writes to a sibling temp file and renames, so failures never leave a
// partial target behind.
inline void write_file_atomically(const std::vector<unsigned char>& bytes,
                                  const std::filesystem::path& path, bool overwrite) {
  namespace fs = std::filesystem;
  if (!overwrite && fs::exists(path)) {
    throw IoError("refusing to overwrite existing file " + path.string());
  }
  const fs::path tmp = path.string() + ".partial";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline std::vector<unsigned char> encode_wav(const StereoBuffer& buf) {
  if (buf.left.size() != buf.right.size()) throw DimensionError("channel lengths differ");
  if (buf.sample_rate <= 0 || buf.sample_rate > 0x3fffffff) {
    throw InvalidParameter("invalid sample rate");
  }
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(buf.size()) * 4;
  if (data_bytes > 0xffffffffULL - 36) throw InvalidParameter("buffer too long for RIFF");
  std::vector<unsigned char> out;
  out.reserve(kWavHeaderBytes + data_bytes);
  const auto sr = static_cast<std::uint32_t>(buf.sample_rate);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, 2);
  detail::put_u32(out, sr);
  detail::put_u32(out, sr * 4);
  detail::put_u16(out, 4);
  detail::put_u16(out, 16);
  detail::put_tag(out, "data");
  detail::put_u32(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t i = 0; i < buf.size(); ++i) {
    detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(buf.left[i])));
    detail::put_u16(out, static_cast<std::uint16_t>(quantize_pcm16(buf.right[i])));
  }
  return out;
}

inline StereoBuffer decode_wav(const std::vector<unsigned char>& bytes) {
  auto tag_is = [&](std::size_t at, const char* tag) {
    return bytes.size() >= at + 4 && std::memcmp(bytes.data() + at, tag, 4) == 0;
  };
  if (bytes.size() < kWavHeaderBytes || !tag_is(0, "RIFF") || !tag_is(8, "WAVE")) {
    throw IoError("not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t len = detail::get_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) throw IoError("truncated WAV chunk");
    if (tag_is(pos, "fmt ")) {
      if (len < 16) throw IoError("short fmt chunk");
      const unsigned char* f = bytes.data() + body;
      if (detail::get_u16(f) != 1 || detail::get_u16(f + 2) != 2 || detail::get_u16(f + 14) != 16) {
        throw IoError("only 16-bit PCM stereo is supported");
      }
      sample_rate = detail::get_u32(f + 4);
      have_fmt = true;
    } else if (tag_is(pos, "data")) {
      if (!have_fmt) throw IoError("data chunk before fmt chunk");
      StereoBuffer buf;
      buf.sample_rate = sample_rate;
      const std::size_t frames = len / 4;
      buf.left.resize(frames);
      buf.right.resize(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char* s = bytes.data() + body + 4 * i;
        buf.left[i] = static_cast<std::int16_t>(detail::get_u16(s)) / 32767.0;
        buf.right[i] = static_cast<std::int16_t>(detail::get_u16(s + 2)) / 32767.0;
      }
      return buf;
    }
    pos = body + len + (len & 1);
  }
  throw IoError("WAV file has no data chunk");
}

inline void write_wav(const StereoBuffer& buf, const std::filesystem::path& path,
                      bool overwrite = false) {
  detail::write_file_atomically(encode_wav(buf), path, overwrite);
}

inline StereoBuffer read_wav(const std::filesystem::path& path) {
  return decode_wav(detail::read_file(path));
}

}  // namespace oqs
