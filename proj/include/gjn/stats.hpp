#pragma once

#include <cstddef>
#include <utility>

namespace gjn
{
    inline constexpr double kZ95 = 1.959963984540054;

    /// Wilson score interval for a binomial proportion.
    std::pair<double, double> wilson_interval(std::size_t hits, std::size_t trials, double z = kZ95);

    struct ProportionEstimate
    {
        std::size_t hits = 0;
        std::size_t trials = 0;
        double p_hat = 0.0;
        double se = 0.0; // sqrt(p(1-p)/n)
        double ci_low = 0.0;
        double ci_high = 0.0;
    };

    ProportionEstimate estimate_proportion(std::size_t hits, std::size_t trials, double z = kZ95);
} // namespace gjn
