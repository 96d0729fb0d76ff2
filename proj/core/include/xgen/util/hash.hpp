#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace xgen::util {

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// fnv1a64 as 16 lower-case hex digits.
inline std::string fnv1a64_hex(std::string_view data) {
  static constexpr char digits[] = "0123456789abcdef";
  auto h = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

}  // namespace xgen::util
