#pragma once

#include <array>
#include <cstdint>

namespace hsm {

/// Counter-based pseudo-random generator (Philox4x32-10, Salmon et al. 2011).
///
/// The generator is a pure function of (seed, stream, counter), which gives
/// reproducible, platform-independent draws and cheap independent substreams:
/// two Rng instances with the same seed but different stream ids never share
/// a counter block.  Replicated experiments assign one stream per replicate
/// so results do not depend on scheduling order.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    /// Fresh generator on substream `id` of the same seed, starting at counter 0.
    [[nodiscard]] Rng substream(std::uint64_t id) const noexcept {
        return Rng(seed_, id);
    }

    std::uint64_t next_u64() noexcept;

    /// Uniform on (0,1]; 53-bit resolution, never exactly 0 so log() is safe.
    double uniform() noexcept;

    /// Standard normal via Box-Muller (pairs cached).  Deterministic given
    /// the counter state, unlike std::normal_distribution whose algorithm
    /// is implementation-defined.
    double normal() noexcept;

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    /// Raw Philox4x32-10 block, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox_block(
        const std::array<std::uint32_t, 4>& counter,
        const std::array<std::uint32_t, 2>& key) noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;      // counter: which 128-bit block comes next
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;              // 4 == buffer exhausted
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

}  // namespace hsm
