#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rkm {

/// Philox4x64-10 block function (Salmon et al., Random123). Maps a 256-bit
/// counter and a 128-bit key to 256 pseudo-random bits.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter, std::array<std::uint64_t, 2> key);

/// Counter-based generator over Philox4x64-10.
///
/// The key is (seed, stream). Distinct streams under the same seed are
/// independent, so work split across components, restarts or threads gets
/// one stream each and results never depend on scheduling. Stream ids in
/// use: 0 for mixture label/count draws, 1+i for component i samples,
/// 0x6b6d0000+r for k-means restart r, 0x5375 for subspace start blocks.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_{seed, stream} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    double uniform();

    /// Standard normal draw by Box-Muller; the paired value is cached.
    double normal();

    /// Jumps to block `index` of the stream, discarding cached values.
    void seek(std::uint64_t index);

private:
    std::array<std::uint64_t, 2> key_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 4> buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace rkm
