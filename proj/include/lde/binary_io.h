// lde/binary_io.h

// Copyright 2026  The ldelid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LDE_BINARY_IO_H_
#define LDE_BINARY_IO_H_

// Little-endian primitives shared by the corpus and checkpoint formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lde/error.h"

namespace lde::io {

class Writer {
 public:
  void Bytes(const void *p, std::size_t n) {
    const auto *c = static_cast<const char *>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  void Tag(std::string_view tag) { Bytes(tag.data(), tag.size()); }
  void U8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void F64s(std::span<const double> v) {
    for (double x : v) F64(x);
  }
  void String(std::string_view s) {
    U32(static_cast<std::uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }

  const std::vector<char> &buffer() const { return buf_; }
  std::size_t size() const { return buf_.size(); }

 private:
  std::vector<char> buf_;
};

// Bounds-checked reader over an in-memory file; every overrun is a
// FormatError naming what was being read.
class Reader {
 public:
  Reader(std::span<const char> data, std::string context)
      : data_(data), context_(std::move(context)) {}

  bool AtEnd() const { return pos_ == data_.size(); }
  std::size_t Remaining() const { return data_.size() - pos_; }

  void Need(std::size_t n, const char *what) const {
    if (Remaining() < n)
      throw FormatError(context_ + ": truncated while reading " + what);
  }
  std::string Bytes(std::size_t n, const char *what) {
    Need(n, what);
    std::string s(data_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t U8(const char *what) {
    Need(1, what);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t U32(const char *what) {
    Need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t U64(const char *what) {
    Need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double F64(const char *what) { return std::bit_cast<double>(U64(what)); }
  void F64s(std::span<double> out, const char *what) {
    Need(8 * out.size(), what);
    for (double &x : out) x = F64(what);
  }
  std::string String(const char *what) { return Bytes(U32(what), what); }

  const std::string &context() const { return context_; }

 private:
  std::span<const char> data_;
  std::string context_;
  std::size_t pos_ = 0;
};

std::vector<char> ReadFile(const std::string &path);
/// 64-bit FNV-1a digest.
std::uint64_t Fnv1a(std::span<const char> data);
void WriteFile(const std::string &path, const std::vector<char> &data);

}  // namespace lde::io

#endif  // LDE_BINARY_IO_H_
