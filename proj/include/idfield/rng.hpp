#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace idfield {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3", SC 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

// SplitMix64 finalizer, used to derive stream identifiers.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-based random stream.
///
/// The key is the seed; the 128-bit counter holds (stream_id, position).
/// Streams with distinct ids never share a counter block, and a given
/// (seed, stream_id) pair always replays the same bits. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform on the open interval (0, 1).
  double uniform_open() noexcept;

  // Independent child stream; depends only on (seed, stream_id, index).
  RngStream substream(std::uint64_t index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int next_ = 2;  // 64-bit words consumed from block_
};

}  // namespace idfield
