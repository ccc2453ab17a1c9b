#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace npsim {

using Bytes = std::vector<uint8_t>;
using Hash256 = std::array<uint8_t, 32>;

inline constexpr Hash256 kZeroHash{};

Hash256 sha256(std::span<const uint8_t> data);

std::string to_hex(const Hash256& h);
bool from_hex(const std::string& s, Hash256& out);

// Length-prefixed little-endian serializer used for canonical encodings.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }
  void i64(int64_t v) { u64(uint64_t(v)); }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    u64(bits);
  }
  void str(const std::string& s) {
    u32(uint32_t(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void raw(std::span<const uint8_t> s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  const Bytes& bytes() const { return buf_; }

 private:
  Bytes buf_;
};

}  // namespace npsim
