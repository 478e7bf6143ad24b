#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace fp2mol {

// FNV-1a, 64-bit. Stable across platforms; used for fingerprint environment
// ids, vocabulary hashes and manifest digests. Not cryptographic.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 1469598103934665603ull;
  static constexpr std::uint64_t kPrime = 1099511628211ull;

  void update(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= kPrime;
    }
  }

  void update_u64(std::uint64_t value) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    update(bytes, 8);
  }

  void update_i32(std::int32_t value) {
    unsigned char bytes[4];
    const auto u = static_cast<std::uint32_t>(value);
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(u >> (8 * i));
    update(bytes, 4);
  }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a64(std::string_view data) {
  Fnv1a64 h;
  h.update(data.data(), data.size());
  return h.digest();
}

}  // namespace fp2mol
