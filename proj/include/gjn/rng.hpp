#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gjn
{
    /// splitmix64 finalizer. Bijective on 64-bit words.
    constexpr std::uint64_t mix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Tags that keep streams of different roles apart when deriving seeds.
    enum class StreamRole : std::uint64_t
    {
        arrival = 0xA1,
        service = 0x5E,
        routing = 0x20,
        walk = 0x3A,
        delay = 0xDE,
        generic = 0x01,
    };

    /// Counter-style seed derivation: hash(master, replicate, station, role).
    constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate,
                                        std::uint64_t station = 0,
                                        StreamRole role = StreamRole::generic) noexcept
    {
        std::uint64_t h = mix64(master);
        h = mix64(h ^ (replicate + 0x632be59bd9b4e019ULL));
        h = mix64(h ^ (station + 0x8cb92ba72f3d8dd7ULL));
        h = mix64(h ^ static_cast<std::uint64_t>(role));
        return h;
    }

    /// xoshiro256** generator. Satisfies UniformRandomBitGenerator.
    class Xoshiro256
    {
    public:
        using result_type = std::uint64_t;

        explicit Xoshiro256(std::uint64_t seed) noexcept;

        static constexpr result_type min() noexcept { return 0; }
        static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

        result_type operator()() noexcept;

        /// Advances the state by 2^128 draws.
        void jump() noexcept;

        /// Uniform on [0, 1) with 53 bits of resolution.
        double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

        /// Uniform on the open interval (0, 1).
        double uniform_open() noexcept
        {
            return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
        }

    private:
        std::array<std::uint64_t, 4> s_{};
    };
} // namespace gjn
