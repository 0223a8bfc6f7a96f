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

// CSV tables and the binary trajectory store.
//
// Trajectory store layout, all little-endian:
//   offset 0   8 bytes  magic "OQSTRAJ\0"
//   offset 8   u32      format version (1)
//   offset 12  u32      dim
//   offset 16  u64      frame count F
//   offset 24  F records of: f64 time, then dim*dim entries of (f64 re, f64 im)
//              in row-major order.

#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "oqsonic/dynamics.hpp"
#include "oqsonic/wav.hpp"

namespace oqs {

inline constexpr char kTrajectoryMagic[8] = {'O', 'Q', 'S', 'T', 'R', 'A', 'J', '\0'};
inline constexpr std::uint32_t kTrajectoryVersion = 1;

static_assert(std::endian::native == std::endian::little, "trajectory store assumes little-endian");

// Shortest-safe round-trip formatting: 17 significant digits.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const std::vector<std::string>& header,
                          const std::vector<std::vector<double>>& columns) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_csv(const SeriesTable& table) { return to_csv(table.names, table.columns); }

inline void write_text(const std::string& text, const std::filesystem::path& path,
                       bool overwrite) {
  detail::write_file_atomically(std::vector<unsigned char>(text.begin(), text.end()), path,
                                overwrite);
}

namespace detail {

template <typename T>
void put_raw(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get_raw(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("trajectory store truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::vector<unsigned char> encode_trajectory(const StateTrajectory& traj) {
  std::vector<unsigned char> out(kTrajectoryMagic, kTrajectoryMagic + 8);
  const auto dim = static_cast<std::uint32_t>(traj.dim());
  detail::put_raw(out, kTrajectoryVersion);
  detail::put_raw(out, dim);
  detail::put_raw(out, static_cast<std::uint64_t>(traj.size()));
  out.reserve(out.size() + traj.size() * (8 + 16 * static_cast<std::size_t>(dim) * dim));
  for (std::size_t f = 0; f < traj.size(); ++f) {
    detail::put_raw(out, traj.times[f]);
    const Matrix& m = traj.frames[f].matrix();
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        detail::put_raw(out, m(i, j).real());
        detail::put_raw(out, m(i, j).imag());
      }
    }
  }
  return out;
}

inline StateTrajectory decode_trajectory(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kTrajectoryMagic, 8) != 0) {
    throw IoError("not a trajectory store (bad magic)");
  }
  std::size_t pos = 8;
  const auto version = detail::get_raw<std::uint32_t>(bytes, pos);
  if (version != kTrajectoryVersion) {
    throw IoError("unsupported trajectory store version " + std::to_string(version));
  }
  const auto dim = static_cast<Index>(detail::get_raw<std::uint32_t>(bytes, pos));
  const auto frames = detail::get_raw<std::uint64_t>(bytes, pos);
  const std::uint64_t record = 8 + 16 * static_cast<std::uint64_t>(dim) * static_cast<std::uint64_t>(dim);
  if (dim < 1 || (bytes.size() - 24) != frames * record) throw IoError("trajectory store size mismatch");
  StateTrajectory traj;
  for (std::uint64_t f = 0; f < frames; ++f) {
    const double t = detail::get_raw<double>(bytes, pos);
    Matrix m(dim, dim);
    for (Index i = 0; i < dim; ++i) {
      for (Index j = 0; j < dim; ++j) {
        const double re = detail::get_raw<double>(bytes, pos);
        const double im = detail::get_raw<double>(bytes, pos);
        m(i, j) = Complex(re, im);
      }
    }
    traj.push(t, DensityMatrix(Operator(std::move(m))));
  }
  return traj;
}

inline void write_trajectory(const StateTrajectory& traj, const std::filesystem::path& path,
                             bool overwrite) {
  detail::write_file_atomically(encode_trajectory(traj), path, overwrite);
}

inline StateTrajectory read_trajectory(const std::filesystem::path& path) {
  return decode_trajectory(detail::read_file(path));
}

}  // namespace oqs
