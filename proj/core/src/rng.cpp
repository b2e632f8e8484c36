#include "fdpburst/rng.hpp"

#include <cmath>
#include <numbers>

namespace fdpburst {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxStream::PhiloxStream(std::uint64_t seed, std::uint64_t replicate,
                           StreamRole role) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      rep_lo_(static_cast<std::uint32_t>(replicate)),
      rep_hi_role_((static_cast<std::uint32_t>(role) << 24) |
                   (static_cast<std::uint32_t>(replicate >> 32) & 0x00FFFFFFu)) {}

PhiloxStream::Block PhiloxStream::philox4x32_10(Block c, std::array<std::uint32_t, 2> k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

void PhiloxStream::refill() noexcept {
  const Block ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                  rep_lo_, rep_hi_role_};
  buf_ = philox4x32_10(ctr, key_);
  ++block_;
  pos_ = 0;
}

double PhiloxStream::next_normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

void PhiloxStream::fill_normals(std::span<double> out) noexcept {
  for (double& x : out) x = next_normal();
}

}  // namespace fdpburst
