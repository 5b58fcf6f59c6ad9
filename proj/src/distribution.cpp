#include "gjn/distribution.hpp"

#include "gjn/errors.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace gjn
{
    namespace
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();

        void require(bool ok, const char *what)
        {
            if (!ok)
                throw ValidationError(what);
        }

        bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

        double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
    } // namespace

    std::string_view to_string(Family family)
    {
        switch (family)
        {
        case Family::exponential: return "exponential";
        case Family::deterministic: return "deterministic";
        case Family::uniform: return "uniform";
        case Family::gamma: return "gamma";
        case Family::lognormal: return "lognormal";
        case Family::pareto: return "pareto";
        }
        return "unknown";
    }

    Family family_from_string(std::string_view name)
    {
        for (Family f : {Family::exponential, Family::deterministic, Family::uniform, Family::gamma,
                         Family::lognormal, Family::pareto})
        {
            if (to_string(f) == name)
                return f;
        }
        throw ValidationError("unknown distribution family '" + std::string(name) + "'");
    }

    DistributionSpec DistributionSpec::exponential(double rate)
    {
        require(positive_finite(rate), "exponential rate must be positive and finite");
        return {Family::exponential, rate, 0.0};
    }

    DistributionSpec DistributionSpec::deterministic(double value)
    {
        require(positive_finite(value), "deterministic value must be positive and finite");
        return {Family::deterministic, value, 0.0};
    }

    DistributionSpec DistributionSpec::uniform(double low, double high)
    {
        require(std::isfinite(low) && low >= 0.0, "uniform low must be nonnegative");
        require(std::isfinite(high) && high > low, "uniform high must exceed low");
        return {Family::uniform, low, high};
    }

    DistributionSpec DistributionSpec::gamma(double shape, double scale)
    {
        require(positive_finite(shape), "gamma shape must be positive and finite");
        require(positive_finite(scale), "gamma scale must be positive and finite");
        return {Family::gamma, shape, scale};
    }

    DistributionSpec DistributionSpec::gamma_with_mean(double shape, double mean)
    {
        require(positive_finite(mean), "gamma mean must be positive and finite");
        return gamma(shape, mean / shape);
    }

    DistributionSpec DistributionSpec::lognormal(double mu, double sigma)
    {
        require(std::isfinite(mu), "lognormal mu must be finite");
        require(positive_finite(sigma), "lognormal sigma must be positive and finite");
        return {Family::lognormal, mu, sigma};
    }

    DistributionSpec DistributionSpec::pareto(double shape, double scale)
    {
        require(std::isfinite(shape) && shape > 1.0, "pareto shape must exceed 1 (finite mean)");
        require(positive_finite(scale), "pareto scale must be positive and finite");
        return {Family::pareto, shape, scale};
    }

    double DistributionSpec::mean() const
    {
        const auto [a, b] = params_;
        switch (family_)
        {
        case Family::exponential: return 1.0 / a;
        case Family::deterministic: return a;
        case Family::uniform: return 0.5 * (a + b);
        case Family::gamma: return a * b;
        case Family::lognormal: return std::exp(a + 0.5 * b * b);
        case Family::pareto: return a * b / (a - 1.0);
        }
        return kInf;
    }

    std::optional<double> DistributionSpec::second_moment() const
    {
        const auto [a, b] = params_;
        switch (family_)
        {
        case Family::exponential: return 2.0 / (a * a);
        case Family::deterministic: return a * a;
        case Family::uniform: return (a * a + a * b + b * b) / 3.0;
        case Family::gamma: return a * (a + 1.0) * b * b;
        case Family::lognormal: return std::exp(2.0 * a + 2.0 * b * b);
        case Family::pareto:
            if (a <= 2.0)
                return std::nullopt;
            return a * b * b / (a - 2.0);
        }
        return std::nullopt;
    }

    std::optional<double> DistributionSpec::variance() const
    {
        const auto [a, b] = params_;
        switch (family_)
        {
        case Family::exponential: return 1.0 / (a * a);
        case Family::deterministic: return 0.0;
        case Family::uniform: return (b - a) * (b - a) / 12.0;
        case Family::gamma: return a * b * b;
        case Family::lognormal: return std::expm1(b * b) * std::exp(2.0 * a + b * b);
        case Family::pareto:
            if (a <= 2.0)
                return std::nullopt;
            return b * b * a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
        }
        return std::nullopt;
    }

    MomentCapabilities DistributionSpec::capabilities() const
    {
        switch (family_)
        {
        case Family::exponential:
        case Family::deterministic:
        case Family::uniform:
        case Family::gamma:
            return {true, true, true};
        case Family::lognormal:
            // exp(α e^{βY}) with Y normal is not integrable for any β > 0.
            return {false, true, false};
        case Family::pareto:
            return {false, params_[0] > 2.0, false};
        }
        return {};
    }

    double DistributionSpec::quantile(double u) const
    {
        if (!(u > 0.0 && u < 1.0))
            throw ValidationError("quantile level must lie in (0,1)");
        const auto [a, b] = params_;
        switch (family_)
        {
        case Family::exponential: return -std::log1p(-u) / a;
        case Family::deterministic: return a;
        case Family::uniform: return a + u * (b - a);
        case Family::gamma: return boost::math::gamma_p_inv(a, u) * b;
        case Family::lognormal:
            return std::exp(a - b * std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u));
        case Family::pareto: return b * std::pow(1.0 - u, -1.0 / a);
        }
        return 0.0;
    }

    double DistributionSpec::survival(double x) const
    {
        const auto [a, b] = params_;
        if (x < 0.0)
            return 1.0;
        switch (family_)
        {
        case Family::exponential: return std::exp(-a * x);
        case Family::deterministic: return x < a ? 1.0 : 0.0;
        case Family::uniform:
            if (x <= a)
                return 1.0;
            return x >= b ? 0.0 : (b - x) / (b - a);
        case Family::gamma: return x == 0.0 ? 1.0 : boost::math::gamma_q(a, x / b);
        case Family::lognormal:
            return x == 0.0 ? 1.0 : 1.0 - std_normal_cdf((std::log(x) - a) / b);
        case Family::pareto: return x <= b ? 1.0 : std::pow(b / x, a);
        }
        return 0.0;
    }

    double DistributionSpec::integrated_tail(double x) const
    {
        if (x <= 0.0)
            return 0.0;
        const auto [a, b] = params_;
        switch (family_)
        {
        case Family::exponential: return -std::expm1(-a * x) / a;
        case Family::deterministic: return std::min(x, a);
        case Family::uniform:
            if (x <= a)
                return x;
            if (x >= b)
                return mean();
            return a + ((b - a) * (b - a) - (b - x) * (b - x)) / (2.0 * (b - a));
        case Family::gamma:
            // x P(X > x) + E[X; X <= x]
            return x * boost::math::gamma_q(a, x / b) + a * b * boost::math::gamma_p(a + 1.0, x / b);
        case Family::lognormal:
        {
            const double z = (std::log(x) - a) / b;
            return x * (1.0 - std_normal_cdf(z)) + mean() * std_normal_cdf(z - b);
        }
        case Family::pareto:
            if (x <= b)
                return x;
            return b + b / (a - 1.0) * (1.0 - std::pow(b / x, a - 1.0));
        }
        return 0.0;
    }

    std::optional<double> DistributionSpec::log_mgf(double theta) const
    {
        if (theta == 0.0)
            return 0.0;
        const auto [a, b] = params_;
        switch (family_)
        {
        case Family::exponential:
            if (theta >= a)
                return std::nullopt;
            return -std::log1p(-theta / a);
        case Family::deterministic: return theta * a;
        case Family::uniform:
        {
            const double w = theta * (b - a);
            return theta * a + std::log(std::expm1(w) / w);
        }
        case Family::gamma:
            if (theta * b >= 1.0)
                return std::nullopt;
            return -a * std::log1p(-theta * b);
        case Family::lognormal:
        case Family::pareto:
            return std::nullopt;
        }
        return std::nullopt;
    }

    double DistributionSpec::mgf_upper() const
    {
        switch (family_)
        {
        case Family::exponential: return params_[0];
        case Family::gamma: return 1.0 / params_[1];
        case Family::deterministic:
        case Family::uniform: return kInf;
        case Family::lognormal:
        case Family::pareto: return 0.0;
        }
        return 0.0;
    }

    double DistributionSpec::equilibrium_cdf(double x) const
    {
        return std::min(1.0, integrated_tail(x) / mean());
    }

    double DistributionSpec::equilibrium_quantile(double u) const
    {
        if (!(u > 0.0 && u < 1.0))
            throw ValidationError("quantile level must lie in (0,1)");
        const auto [a, b] = params_;
        const double m = mean();
        switch (family_)
        {
        case Family::exponential: return quantile(u);
        case Family::deterministic: return u * a;
        case Family::uniform:
        {
            const double level = u * m;
            if (level <= a)
                return level;
            const double w = b - a;
            return b - std::sqrt(std::max(0.0, w * w - 2.0 * w * (level - a)));
        }
        case Family::gamma:
        case Family::lognormal:
        case Family::pareto:
            break;
        }

        // Monotone root-finding on F_e(x) = u: expand, then bisect.
        double lo = 0.0;
        double hi = m;
        int expansions = 0;
        while (equilibrium_cdf(hi) < u)
        {
            lo = hi;
            hi *= 2.0;
            if (++expansions > 2000)
                throw NumericalError("equilibrium quantile bracket did not close");
        }
        for (int it = 0; it < 400 && hi - lo > 1e-10 * std::max(1.0, hi); ++it)
        {
            const double mid = 0.5 * (lo + hi);
            if (equilibrium_cdf(mid) < u)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    std::optional<double> DistributionSpec::equilibrium_mean() const
    {
        const auto m2 = second_moment();
        if (!m2)
            return std::nullopt;
        return *m2 / (2.0 * mean());
    }

    std::optional<double> DistributionSpec::equilibrium_log_mgf(double theta) const
    {
        if (theta == 0.0)
            return 0.0;
        if (family_ == Family::exponential)
            return log_mgf(theta);
        const auto lm = log_mgf(theta);
        if (!lm)
            return std::nullopt;
        // E e^{θX_e} = (E e^{θX} - 1) / (θ E X)
        return std::log(std::expm1(*lm) / (theta * mean()));
    }

    DistributionSpec DistributionSpec::scaled_to_mean(double target_mean) const
    {
        require(positive_finite(target_mean), "target mean must be positive and finite");
        const double c = target_mean / mean();
        const auto [a, b] = params_;
        switch (family_)
        {
        case Family::exponential: return exponential(a / c);
        case Family::deterministic: return deterministic(target_mean);
        case Family::uniform: return uniform(a * c, b * c);
        case Family::gamma: return gamma(a, b * c);
        case Family::lognormal: return lognormal(a + std::log(c), b);
        case Family::pareto: return pareto(a, b * c);
        }
        return *this;
    }

    std::string DistributionSpec::describe() const
    {
        std::ostringstream os;
        os << to_string(family_) << "(mean=" << mean() << ")";
        return os.str();
    }
} // namespace gjn
