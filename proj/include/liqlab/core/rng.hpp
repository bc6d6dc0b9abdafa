#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace liqlab {

/// Philox4x32-10 counter-based generator.
///
/// A stream is fully determined by (seed, stream_id): the seed is the cipher
/// key and the stream id occupies the upper half of the 128-bit counter, so
/// replicas can be handed distinct stream ids without any coordination and
/// every draw sequence is reproducible bit for bit.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t blocks_consumed() const noexcept { return block_; }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;
  /// Exponential variate with the given rate (> 0).
  double exponential(double rate) noexcept;
  /// Uniform integer in [0, n), n > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  /// Standard normal variate (Marsaglia polar method).
  double normal() noexcept;
  /// Fair coin.
  bool coin() noexcept { return (operator()() >> 63) != 0; }

  /// Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int next_ = 4;  // index into buffer_ in 32-bit words; 4 means empty
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive stream ids from structured indices.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministic stream id for replica `replica` of grid cell `cell`.
constexpr std::uint64_t stream_id_for(std::uint64_t cell, std::uint64_t replica) noexcept {
  return mix64(mix64(cell) ^ (replica + 0x632BE59BD9B4E019ull));
}

}  // namespace liqlab
