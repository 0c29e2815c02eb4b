// Copyright (C) 2026 The cmauth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmauth/error.hpp"

namespace cmauth {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Fixed 32-byte value. The tag keeps digests, keys and nonces from being
/// mixed up at compile time.
template <class Tag>
struct Block32 {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};

  ByteView view() const { return {bytes.data(), bytes.size()}; }

  static Block32 from(ByteView v) {
    if (v.size() != kSize) {
      throw Error(ErrorCode::kMalformed, "expected 32 bytes, got " + std::to_string(v.size()));
    }
    Block32 b;
    std::copy(v.begin(), v.end(), b.bytes.begin());
    return b;
  }

  friend bool operator==(const Block32&, const Block32&) = default;
  friend auto operator<=>(const Block32&, const Block32&) = default;
};

inline std::string to_hex(ByteView v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(v.size() * 2);
  for (auto b : v) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

template <class Tag>
std::string to_hex(const Block32<Tag>& b) {
  return to_hex(b.view());
}

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(ErrorCode::kMalformed, "odd hex length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::kMalformed, "bad hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

// Big-endian appenders.
inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

inline void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_u64(Bytes& out, std::uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

inline void put_bytes(Bytes& out, ByteView v) { out.insert(out.end(), v.begin(), v.end()); }

/// Bounds-checked big-endian cursor over untrusted input.
class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t position() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

  ByteView take(std::size_t n) {
    if (remaining() < n) throw Error(ErrorCode::kMalformed, "truncated input");
    auto v = data_.subspan(pos_, n);
    pos_ += n;
    return v;
  }

  std::uint8_t u8() { return take(1)[0]; }

  std::uint16_t u16() {
    auto v = take(2);
    return static_cast<std::uint16_t>((v[0] << 8) | v[1]);
  }

  std::uint32_t u32() {
    auto v = take(4);
    std::uint32_t r = 0;
    for (auto b : v) r = (r << 8) | b;
    return r;
  }

  std::uint64_t u64() {
    auto v = take(8);
    std::uint64_t r = 0;
    for (auto b : v) r = (r << 8) | b;
    return r;
  }

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace cmauth
