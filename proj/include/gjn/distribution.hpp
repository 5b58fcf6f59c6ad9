#pragma once

#include "gjn/rng.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace gjn
{
    enum class Family
    {
        exponential,
        deterministic,
        uniform,
        gamma,
        lognormal,
        pareto,
    };

    std::string_view to_string(Family family);
    Family family_from_string(std::string_view name);

    /// Moment classes that select which tightness argument applies to a primitive.
    struct MomentCapabilities
    {
        bool exp_moment = false;           // E e^{θX} < ∞ for some θ > 0
        bool two_plus_eps_moment = false;  // E X^{2+ε} < ∞ for some ε > 0
        bool stretched_exp_moment = false; // E exp(α X^β) < ∞ for some α > 0, β ∈ (0,1]

        bool operator==(const MomentCapabilities &) const = default;
    };

    /// A nonnegative interarrival or service time law from one of six families.
    ///
    /// Parameters (all positive unless noted):
    ///   exponential  {rate}
    ///   deterministic{value}
    ///   uniform      {low >= 0, high > low}
    ///   gamma        {shape, scale}
    ///   lognormal    {mu (real), sigma}     -- parameters of log X
    ///   pareto       {shape > 1, scale}     -- support [scale, ∞)
    class DistributionSpec
    {
    public:
        static DistributionSpec exponential(double rate);
        static DistributionSpec deterministic(double value);
        static DistributionSpec uniform(double low, double high);
        static DistributionSpec gamma(double shape, double scale);
        static DistributionSpec gamma_with_mean(double shape, double mean);
        static DistributionSpec lognormal(double mu, double sigma);
        static DistributionSpec pareto(double shape, double scale);

        Family family() const noexcept { return family_; }
        double param(std::size_t i) const { return params_.at(i); }

        double mean() const;
        double rate() const { return 1.0 / mean(); }
        std::optional<double> second_moment() const;
        std::optional<double> variance() const;
        MomentCapabilities capabilities() const;

        double quantile(double u) const;
        double survival(double x) const;
        double sample(Xoshiro256 &rng) const { return quantile(rng.uniform_open()); }

        /// ∫_0^x P(X > y) dy.
        double integrated_tail(double x) const;

        /// log E e^{θX} where a closed form exists; nullopt when infinite or not closed-form.
        std::optional<double> log_mgf(double theta) const;
        /// sup{θ : E e^{θX} < ∞}; 0 for heavy-tailed families.
        double mgf_upper() const;

        // Equilibrium (integrated-tail) law with density P(X > x) / E X.
        double equilibrium_cdf(double x) const;
        double equilibrium_quantile(double u) const;
        double equilibrium_sample(Xoshiro256 &rng) const
        {
            return equilibrium_quantile(rng.uniform_open());
        }
        /// E X² / (2 E X); nullopt when the second moment is infinite.
        std::optional<double> equilibrium_mean() const;
        std::optional<double> equilibrium_log_mgf(double theta) const;

        /// Same family, time axis rescaled so the mean becomes `target_mean`.
        DistributionSpec scaled_to_mean(double target_mean) const;

        std::string describe() const;

        bool operator==(const DistributionSpec &) const = default;

    private:
        DistributionSpec(Family family, double a, double b) : family_(family), params_{a, b} {}

        Family family_;
        std::array<double, 2> params_;
    };
} // namespace gjn
