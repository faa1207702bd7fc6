#ifndef EAAS_RNG_H
#define EAAS_RNG_H

#include <array>
#include <cstdint>
#include <limits>

namespace eaas {

/// xoshiro256** generator with SplitMix64 seeding.
///
/// Streams are derived from (seed, stream index) so every Monte-Carlo trial
/// owns an independent generator and results do not depend on scheduling.
class Rng {
   public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    /// Generator for stream `stream` of master seed `seed`.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n), n >= 1 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t n);

    static constexpr result_type min() {
        return 0;
    }
    static constexpr result_type max() {
        return std::numeric_limits<result_type>::max();
    }

   private:
    std::array<std::uint64_t, 4> s_;
};

/// SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace eaas

#endif
