#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace fdpburst {

/// What a random stream is used for. Each role of each replicate reads its
/// own counter space, so streams never overlap.
enum class StreamRole : std::uint32_t { hypotheses = 1, factors = 2, noise = 3, aux = 4 };

/// Philox4x32-10 counter-based generator (Salmon et al., 2011).
///
/// The 64-bit key is the experiment seed; the 128-bit counter is
/// (block index, replicate, role). Any (seed, replicate, role) triple is an
/// independent, reproducible stream regardless of which thread consumes it.
class PhiloxStream {
 public:
  using Block = std::array<std::uint32_t, 4>;

  PhiloxStream(std::uint64_t seed, std::uint64_t replicate, StreamRole role) noexcept;

  /// The raw block function, exposed for known-answer tests.
  static Block philox4x32_10(Block counter, std::array<std::uint32_t, 2> key) noexcept;

  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double next_uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; values are produced in pairs.
  double next_normal() noexcept;

  void fill_normals(std::span<double> out) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_ = 0;
  std::uint32_t rep_lo_;
  std::uint32_t rep_hi_role_;
  Block buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive sub-seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace fdpburst
