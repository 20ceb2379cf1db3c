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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "percepta/core/error.hpp"

// Little-endian encode/decode helpers shared by the binary artifact formats.

namespace percepta::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(std::uint16_t v) { raw(&v, sizeof v); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str16(std::string_view s) {
    if (s.size() > 0xffff) throw InputError("string too long for u16 length prefix");
    u16(static_cast<std::uint16_t>(s.size()));
    bytes(s);
  }

  const std::vector<char>& buffer() const noexcept { return buf_; }

  void write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw ConfigError("write failed for '" + path + "'");
  }

 private:
  void raw(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }

  std::vector<char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> data) : data_(std::move(data)) {}

  static ByteReader from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::vector<char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ByteReader(std::move(data));
  }

  std::uint64_t offset() const noexcept { return pos_; }
  std::uint64_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) { return scalar<std::uint8_t>(what); }
  std::uint16_t u16(const char* what) { return scalar<std::uint16_t>(what); }
  std::uint32_t u32(const char* what) { return scalar<std::uint32_t>(what); }
  float f32(const char* what) { return scalar<float>(what); }
  double f64(const char* what) { return scalar<double>(what); }
  std::string str16(const char* what) {
    const std::uint16_t n = u16(what);
    return bytes(n, what);
  }

  void need(std::uint64_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(std::string("truncated file while reading ") + what, pos_);
    }
  }

 private:
  template <typename T>
  T scalar(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::vector<char> data_;
  std::uint64_t pos_ = 0;
};

}  // namespace percepta::io
