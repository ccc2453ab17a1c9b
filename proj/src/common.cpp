#include "npsim/common.hpp"

#include <openssl/sha.h>

namespace npsim {

Hash256 sha256(std::span<const uint8_t> data) {
  Hash256 out;
  SHA256(data.data(), data.size(), out.data());
  return out;
}

std::string to_hex(const Hash256& h) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (uint8_t b : h) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

bool from_hex(const std::string& s, Hash256& out) {
  if (s.size() != 64) return false;
  for (size_t i = 0; i < 32; ++i) {
    int hi = hex_val(s[2 * i]), lo = hex_val(s[2 * i + 1]);
    if (hi < 0 || lo < 0) return false;
    out[i] = uint8_t(hi << 4 | lo);
  }
  return true;
}

}  // namespace npsim
