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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "percepta/core/binary_io.hpp"
#include "percepta/core/error.hpp"

namespace percepta {

/// Mono PCM audio.
struct Waveform {
  std::uint32_t sample_rate = 0;
  std::vector<double> samples;  // in [-1, 1]
};

/// Reads a RIFF/WAVE file with integer PCM (8/16/24/32-bit) or 32-bit float
/// samples. Multi-channel audio is averaged to mono.
inline Waveform read_wav(const std::string& path) {
  auto in = io::ByteReader::from_file(path);
  if (in.bytes(4, "RIFF tag") != "RIFF") throw FormatError("'" + path + "' is not a RIFF file", 0);
  in.u32("RIFF size");
  if (in.bytes(4, "WAVE tag") != "WAVE") throw FormatError("'" + path + "' is not a WAVE file", 8);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (!in.at_end()) {
    const std::uint64_t chunk_at = in.offset();
    const std::string tag = in.bytes(4, "chunk tag");
    const std::uint32_t size = in.u32("chunk size");
    if (tag == "fmt ") {
      if (size < 16) throw FormatError("fmt chunk too small", chunk_at);
      format = in.u16("audio format");
      channels = in.u16("channel count");
      rate = in.u32("sample rate");
      in.u32("byte rate");
      in.u16("block align");
      bits = in.u16("bits per sample");
      if (format == 0xfffe && size >= 40) {  // WAVE_FORMAT_EXTENSIBLE
        in.bytes(8, "extension header");
        format = in.u16("sub format");
        in.bytes(size - 26, "extension tail");
      } else {
        in.bytes(size - 16, "fmt tail");
      }
      have_fmt = true;
    } else if (tag == "data") {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk", chunk_at);
      if (channels == 0) throw FormatError("zero channels", chunk_at);
      const bool pcm = format == 1 && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
      const bool flt = format == 3 && bits == 32;
      if (!pcm && !flt) {
        throw FormatError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits)", chunk_at);
      }
      const std::size_t width = bits / 8;
      const std::size_t frames = size / (width * channels);
      in.need(static_cast<std::uint64_t>(frames) * width * channels, "sample data");
      Waveform w;
      w.sample_rate = rate;
      w.samples.resize(frames);
      const std::string raw = in.bytes(frames * width * channels, "sample data");
      const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c, p += width) {
          double v = 0.0;
          if (flt) {
            float x;
            std::memcpy(&x, p, 4);
            v = x;
          } else if (bits == 8) {
            v = (static_cast<double>(p[0]) - 128.0) / 128.0;
          } else if (bits == 16) {
            std::int16_t x;
            std::memcpy(&x, p, 2);
            v = x / 32768.0;
          } else if (bits == 24) {
            std::int32_t x = (p[0] | (p[1] << 8) | (p[2] << 16));
            if (x & 0x800000) x |= ~0xffffff;
            v = x / 8388608.0;
          } else {
            std::int32_t x;
            std::memcpy(&x, p, 4);
            v = x / 2147483648.0;
          }
          acc += v;
        }
        w.samples[f] = acc / channels;
      }
      return w;
    } else {
      in.bytes(size + (size & 1u), "chunk body");
    }
  }
  throw FormatError("'" + path + "' has no data chunk");
}

/// Writes 16-bit mono PCM. Used to build test corpora.
inline void write_wav16(const std::string& path, const Waveform& w) {
  io::ByteWriter out;
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  out.bytes("RIFF");
  out.u32(36 + data_bytes);
  out.bytes("WAVE");
  out.bytes("fmt ");
  out.u32(16);
  out.u16(1);
  out.u16(1);
  out.u32(w.sample_rate);
  out.u32(w.sample_rate * 2);
  out.u16(2);
  out.u16(16);
  out.bytes("data");
  out.u32(data_bytes);
  for (double s : w.samples) {
    const double c = std::max(-1.0, std::min(1.0, s));
    out.u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
  }
  out.write_file(path);
}

}  // namespace percepta
