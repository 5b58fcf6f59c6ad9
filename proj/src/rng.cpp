#include "gjn/rng.hpp"

namespace gjn
{
    namespace
    {
        constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
        {
            return (x << k) | (x >> (64 - k));
        }
    } // namespace

    Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept
    {
        // splitmix64 expansion; never produces the all-zero state.
        std::uint64_t x = seed;
        for (auto &word : s_)
        {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    Xoshiro256::result_type Xoshiro256::operator()() noexcept
    {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    void Xoshiro256::jump() noexcept
    {
        static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                                  0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
        std::array<std::uint64_t, 4> acc{};
        for (std::uint64_t word : kJump)
        {
            for (int b = 0; b < 64; ++b)
            {
                if (word & (std::uint64_t{1} << b))
                {
                    for (int i = 0; i < 4; ++i)
                        acc[i] ^= s_[i];
                }
                (*this)();
            }
        }
        s_ = acc;
    }
} // namespace gjn
