#include "gjn/stats.hpp"

#include "gjn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gjn
{
    std::pair<double, double> wilson_interval(std::size_t hits, std::size_t trials, double z)
    {
        if (trials == 0 || hits > trials)
            throw ValidationError("wilson interval needs 0 <= hits <= trials, trials > 0");
        const double n = static_cast<double>(trials);
        const double p = static_cast<double>(hits) / n;
        const double z2 = z * z;
        const double denom = 1.0 + z2 / n;
        const double centre = (p + z2 / (2.0 * n)) / denom;
        const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
        // Clamp so the interval always contains p_hat despite rounding at p = 0 or 1.
        return {std::clamp(std::min(centre - half, p), 0.0, 1.0), std::clamp(std::max(centre + half, p), 0.0, 1.0)};
    }

    ProportionEstimate estimate_proportion(std::size_t hits, std::size_t trials, double z)
    {
        ProportionEstimate e;
        e.hits = hits;
        e.trials = trials;
        const auto [lo, hi] = wilson_interval(hits, trials, z);
        e.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
        e.se = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(trials));
        e.ci_low = lo;
        e.ci_high = hi;
        return e;
    }
} // namespace gjn
