#pragma once

#include "gjn/distribution.hpp"
#include "gjn/path.hpp"
#include "gjn/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gjn
{
    /// How the first epoch of a renewal stream is drawn.
    struct DelayMode
    {
        enum class Kind
        {
            ordinary,    // first gap has the generic law
            equilibrium, // first gap has the integrated-tail law (stationary increments)
            fixed,       // first epoch at a given time
        };

        Kind kind = Kind::ordinary;
        double delay = 0.0; // used by fixed

        static DelayMode ordinary() { return {Kind::ordinary, 0.0}; }
        static DelayMode equilibrium() { return {Kind::equilibrium, 0.0}; }
        static DelayMode fixed(double delay) { return {Kind::fixed, delay}; }
    };

    /// Renewal epochs τ_1 < τ_2 < ... drawn from a single-owner generator.
    class RenewalStream
    {
    public:
        RenewalStream(DistributionSpec dist, DelayMode mode, std::uint64_t seed);

        double next_epoch();
        std::int64_t count() const noexcept { return count_; }
        const DistributionSpec &distribution() const noexcept { return dist_; }

    private:
        DistributionSpec dist_;
        DelayMode mode_;
        Xoshiro256 rng_;
        double last_ = 0.0;
        std::int64_t count_ = 0;
    };

    /// One draw from the equilibrium law of `dist`.
    double equilibrium_delay_sample(const DistributionSpec &dist, std::uint64_t seed);

    /// Counts of the first m routing decisions of one station.
    struct RoutingTally
    {
        std::int64_t exits = 0;
        std::vector<std::int64_t> to_station; // Φ_kl(m), l = 0..K-1

        std::int64_t total() const;
    };

    /// i.i.d. Bernoulli routing decisions ζ^{(1)}, ζ^{(2)}, ... of one station.
    /// Destinations are station indices 0..K-1, or kExit.
    class RoutingSequence
    {
    public:
        static constexpr int kExit = -1;

        RoutingSequence(std::span<const double> row, std::uint64_t seed);

        int next();
        /// Φ_k(m) from the first m decisions of this sequence (independent of next()).
        RoutingTally route(std::int64_t m) const;
        int stations() const noexcept { return static_cast<int>(cumulative_.size()); }

    private:
        int draw(Xoshiro256 &rng) const;

        std::vector<double> cumulative_;
        std::uint64_t seed_;
        Xoshiro256 rng_;
    };

    /// X(t) - rate * t for a counting path X.
    Path center(const Path &counting, double rate);

    /// Φ̄(m) = Φ(m) - p m for m = 0..counts.size()-1, given cumulative counts Φ(m).
    std::vector<double> center_tally(std::span<const std::int64_t> cumulative, double p);
} // namespace gjn
