#include "idfield/rng.hpp"

namespace idfield {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> round(const std::array<std::uint32_t, 4>& c,
                                          const std::array<std::uint32_t, 2>& k) noexcept {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kMul0, c[0], hi0, lo0);
  mulhilo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept {
  counter = round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = round(counter, key);
  }
  return counter;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() noexcept {
  const std::array<std::uint32_t, 4> ctr{
      static_cast<std::uint32_t>(position_), static_cast<std::uint32_t>(position_ >> 32),
      static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  block_ = philox4x32(ctr, key);
  ++position_;
  next_ = 0;
}

RngStream::result_type RngStream::operator()() noexcept {
  if (next_ >= 2) refill();
  const int i = 2 * next_++;
  return (static_cast<std::uint64_t>(block_[i + 1]) << 32) | block_[i];
}

double RngStream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() noexcept {
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

RngStream RngStream::substream(std::uint64_t index) const noexcept {
  return RngStream(seed_, mix64(stream_id_ ^ mix64(index + 0x632be59bd9b4e019ull)));
}

}  // namespace idfield
