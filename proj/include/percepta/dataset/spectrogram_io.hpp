// Copyright 2026 The Percepta Authors
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

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "percepta/core/binary_io.hpp"
#include "percepta/core/error.hpp"
#include "percepta/core/matrix.hpp"
#include "percepta/dataset/mel.hpp"
#include "percepta/dataset/spectrogram.hpp"
#include "percepta/dataset/wav.hpp"

// Spectrogram file formats.
//
// SPEC binary: "SPC1", u32 rows, u32 cols, rows*cols f32 values row-major,
// all little-endian. CSV: one line per mel band, comma-separated, no header.
// WAV files are converted with compute_mel on load.

namespace percepta {

inline constexpr std::string_view kSpecMagic = "SPC1";

inline void save_spectrogram(const Matrix& m, const std::string& path) {
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) throw InputError("spectrogram too large for SPEC format");
  io::ByteWriter out;
  out.bytes(kSpecMagic);
  out.u32(static_cast<std::uint32_t>(m.rows()));
  out.u32(static_cast<std::uint32_t>(m.cols()));
  for (double v : m.values()) out.f32(static_cast<float>(v));
  out.write_file(path);
}

inline Matrix decode_spec(io::ByteReader in, const std::string& path) {
  if (in.remaining() < 4 || in.bytes(4, "magic") != kSpecMagic) {
    throw FormatError("'" + path + "': bad SPEC magic", 0);
  }
  const std::uint32_t rows = in.u32("row count");
  const std::uint32_t cols = in.u32("column count");
  if (rows == 0 || cols == 0) throw FormatError("'" + path + "': zero dimension in header", 4);
  const std::uint64_t expected = static_cast<std::uint64_t>(rows) * cols * 4;
  if (in.remaining() < expected) {
    throw FormatError("'" + path + "': payload truncated, header says " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " but only " + std::to_string(in.remaining()) +
                          " payload bytes remain",
                      in.offset() + in.remaining());
  }
  if (in.remaining() > expected) {
    throw FormatError("'" + path + "': trailing bytes after payload", in.offset() + expected);
  }
  Matrix m(rows, cols);
  for (double& v : m.values()) {
    const std::uint64_t at = in.offset();
    v = in.f32("value");
    if (!std::isfinite(v)) {
      throw DataError("'" + path + "': non-finite value at byte offset " + std::to_string(at));
    }
  }
  return m;
}

inline Matrix load_spec_binary(const std::string& path) {
  return decode_spec(io::ByteReader::from_file(path), path);
}

inline Matrix parse_spectrogram_csv(const std::string& text, const std::string& path = "<csv>") {
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::size_t line_end = end;
    if (line_end > pos && text[line_end - 1] == '\r') --line_end;
    if (line_end > pos) {
      std::size_t count = 0;
      std::size_t cur = pos;
      while (true) {
        std::size_t comma = text.find(',', cur);
        if (comma == std::string::npos || comma > line_end) comma = line_end;
        std::size_t a = cur, b = comma;
        while (a < b && (text[a] == ' ' || text[a] == '\t')) ++a;
        while (b > a && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
        double v = 0.0;
        const auto res = std::from_chars(text.data() + a, text.data() + b, v);
        if (a == b || res.ec != std::errc() || res.ptr != text.data() + b) {
          throw FormatError("'" + path + "': malformed number on line " + std::to_string(rows + 1), a);
        }
        if (!std::isfinite(v)) {
          throw DataError("'" + path + "': non-finite value on line " + std::to_string(rows + 1));
        }
        values.push_back(v);
        ++count;
        if (comma == line_end) break;
        cur = comma + 1;
      }
      if (rows == 0) {
        cols = count;
      } else if (count != cols) {
        throw FormatError("'" + path + "': line " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                              " values, expected " + std::to_string(cols),
                          pos);
      }
      ++rows;
    }
    pos = end + 1;
  }
  if (rows == 0) throw FormatError("'" + path + "': empty CSV", 0);
  return Matrix(rows, cols, std::move(values));
}

inline Matrix load_spectrogram_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_spectrogram_csv(text, path);
}

/// Shortest round-trip decimal form for each value.
inline void save_spectrogram_csv(const Matrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, m(r, c));
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

inline bool is_spectrogram_file(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  return ext == ".spc" || ext == ".csv" || ext == ".wav";
}

/// Loads a matrix from .spc, .csv, or .wav (mel-converted at 22050 Hz).
inline Matrix load_spectrogram_matrix(const std::string& path, const MelParams& mel = {}) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".csv") return load_spectrogram_csv(path);
  if (ext == ".wav") {
    const Waveform w = read_wav(path);
    if (static_cast<double>(w.sample_rate) != mel.sample_rate) {
      throw DataError("'" + path + "' has sample rate " + std::to_string(w.sample_rate) + ", expected " +
                      std::to_string(static_cast<long>(mel.sample_rate)) + " (no resampling)");
    }
    return compute_mel(w.samples, mel);
  }
  return load_spec_binary(path);
}

/// Loads a spectrogram; the id is the file stem and the genre is the parent
/// directory name when that names a known genre.
inline Spectrogram load_spectrogram(const std::string& path, const MelParams& mel = {}) {
  const std::filesystem::path p(path);
  const std::string parent = p.parent_path().filename().string();
  return {p.stem().string(), is_genre(parent) ? parent : Label{}, load_spectrogram_matrix(path, mel)};
}

}  // namespace percepta
