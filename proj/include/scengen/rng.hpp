#pragma once

#include <array>
#include <cstdint>

namespace scengen {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A (seed,
// stream) pair names an independent random stream; draws are reproducible
// byte-for-byte and streams can be consumed in any order, which is what lets
// scenario generation assign one stream per scenario index.
class PhiloxRng {
 public:
  explicit PhiloxRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1) with 53-bit resolution.
  double next_double();

  // Standard normal via the inverse-CDF transform.
  double next_normal();

  // One raw block, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(
      const std::array<std::uint32_t, 4>& counter,
      const std::array<std::uint32_t, 2>& key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

}  // namespace scengen
