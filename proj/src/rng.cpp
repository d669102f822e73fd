#include "hsm/rng.hpp"

#include <cmath>

namespace hsm {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c,
                         const std::array<std::uint32_t, 2>& k) noexcept {
    const std::uint64_t p0 = std::uint64_t(kM0) * c[0];
    const std::uint64_t p1 = std::uint64_t(kM1) * c[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> Rng::philox_block(
    const std::array<std::uint32_t, 4>& counter,
    const std::array<std::uint32_t, 2>& key) noexcept {
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k);
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

void Rng::refill() noexcept {
    // Counter layout: words 0-1 index the block, words 2-3 the stream.
    const std::array<std::uint32_t, 4> ctr = {
        std::uint32_t(block_), std::uint32_t(block_ >> 32),
        std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {std::uint32_t(seed_),
                                              std::uint32_t(seed_ >> 32)};
    buf_ = philox_block(ctr, key);
    ++block_;
    buf_pos_ = 0;
}

std::uint64_t Rng::next_u64() noexcept {
    if (buf_pos_ > 2) refill();
    const std::uint64_t lo = buf_[buf_pos_];
    const std::uint64_t hi = buf_[buf_pos_ + 1];
    buf_pos_ += 2;
    return (hi << 32) | lo;
}

double Rng::uniform() noexcept {
    // (0,1]: top 53 bits, shifted into (0,1] so log(uniform()) is finite.
    return double((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
}

}  // namespace hsm
