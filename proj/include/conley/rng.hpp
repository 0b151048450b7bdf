#pragma once

#include <array>
#include <cstdint>

namespace conley {

// Philox4x32-10 counter-based generator. A stream is addressed by
// (master_seed, stream_id); the draw index is the low half of the counter,
// so any draw of any stream can be regenerated without replaying others.
class StreamRng {
 public:
  StreamRng(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal by inverse-CDF transform of uniform().
  double normal();

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace conley
