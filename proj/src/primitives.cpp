#include "gjn/primitives.hpp"

#include "gjn/errors.hpp"

#include <numeric>

namespace gjn
{
    RenewalStream::RenewalStream(DistributionSpec dist, DelayMode mode, std::uint64_t seed)
        : dist_(std::move(dist)), mode_(mode), rng_(seed)
    {
        if (mode_.kind == DelayMode::Kind::fixed && !(mode_.delay >= 0.0))
            throw ValidationError("fixed renewal delay must be nonnegative");
    }

    double RenewalStream::next_epoch()
    {
        if (count_ == 0)
        {
            switch (mode_.kind)
            {
            case DelayMode::Kind::ordinary: last_ = dist_.sample(rng_); break;
            case DelayMode::Kind::equilibrium: last_ = dist_.equilibrium_sample(rng_); break;
            case DelayMode::Kind::fixed: last_ = mode_.delay; break;
            }
        }
        else
        {
            last_ += dist_.sample(rng_);
        }
        ++count_;
        return last_;
    }

    double equilibrium_delay_sample(const DistributionSpec &dist, std::uint64_t seed)
    {
        Xoshiro256 rng(seed);
        return dist.equilibrium_sample(rng);
    }

    std::int64_t RoutingTally::total() const
    {
        return std::accumulate(to_station.begin(), to_station.end(), exits);
    }

    RoutingSequence::RoutingSequence(std::span<const double> row, std::uint64_t seed) : seed_(seed), rng_(seed)
    {
        double acc = 0.0;
        for (double p : row)
        {
            if (!(p >= 0.0 && p <= 1.0))
                throw ValidationError("routing probability outside [0,1]");
            acc += p;
            cumulative_.push_back(acc);
        }
        if (acc > 1.0 + 1e-12)
            throw ValidationError("routing row sums to more than 1");
    }

    int RoutingSequence::draw(Xoshiro256 &rng) const
    {
        const double u = rng.uniform01();
        for (std::size_t l = 0; l < cumulative_.size(); ++l)
        {
            if (u < cumulative_[l])
                return static_cast<int>(l);
        }
        return kExit;
    }

    int RoutingSequence::next() { return draw(rng_); }

    RoutingTally RoutingSequence::route(std::int64_t m) const
    {
        if (m < 0)
            throw ValidationError("routing count must be nonnegative");
        RoutingTally tally{0, std::vector<std::int64_t>(cumulative_.size(), 0)};
        Xoshiro256 rng(seed_);
        for (std::int64_t i = 0; i < m; ++i)
        {
            const int l = draw(rng);
            if (l == kExit)
                ++tally.exits;
            else
                ++tally.to_station[l];
        }
        return tally;
    }

    Path center(const Path &counting, double rate) { return counting.plus_linear(-rate); }

    std::vector<double> center_tally(std::span<const std::int64_t> cumulative, double p)
    {
        std::vector<double> out(cumulative.size());
        for (std::size_t m = 0; m < cumulative.size(); ++m)
            out[m] = static_cast<double>(cumulative[m]) - p * static_cast<double>(m);
        return out;
    }
} // namespace gjn
