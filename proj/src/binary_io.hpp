// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitives shared by the table cache and checkpoint formats.
#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "lunet/error.hpp"

namespace lunet::io {

inline void put_u64(std::ostream &out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i)
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline void put_u32(std::ostream &out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i)
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

inline void put_f64(std::ostream &out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_string(std::ostream &out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void put_magic(std::ostream &out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

class Reader {
 public:
  Reader(std::istream &in, std::string source)
      : in_(in), source_(std::move(source)) {}

  void expect_magic(std::string_view magic) {
    std::string got(magic.size(), '\0');
    in_.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (!in_ || got != magic)
      throw FormatError(source_ + ": bad magic, expected \"" +
                        std::string(magic) + "\"");
  }

  std::uint64_t u64() {
    unsigned char bytes[8];
    read(bytes, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
      v = (v << 8) | bytes[i];
    return v;
  }

  std::uint32_t u32() {
    unsigned char bytes[4];
    read(bytes, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
      v = (v << 8) | bytes[i];
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string string() {
    const std::uint32_t n = u32();
    if (n > (1u << 24))
      throw FormatError(source_ + ": implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }

  /// Guards element counts read from the file before allocating.
  std::uint64_t count(std::uint64_t limit, const char *what) {
    const std::uint64_t n = u64();
    if (n > limit)
      throw FormatError(source_ + ": implausible " + what + " count " +
                        std::to_string(n));
    return n;
  }

 private:
  void read(void *dst, std::size_t n) {
    in_.read(static_cast<char *>(dst), static_cast<std::streamsize>(n));
    if (!in_)
      throw FormatError(source_ + ": truncated file");
  }

  std::istream &in_;
  std::string source_;
};

} // namespace lunet::io
