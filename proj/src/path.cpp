#include "gjn/path.hpp"

#include "gjn/errors.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace gjn
{
    void Path::append(double t, double value, double slope)
    {
        if (!times_.empty())
        {
            if (t < times_.back())
                throw ValidationError("path breakpoints must be nondecreasing in time");
            if (t == times_.back())
            {
                values_.back() = value;
                slopes_.back() = slope;
                return;
            }
        }
        times_.push_back(t);
        values_.push_back(value);
        slopes_.push_back(slope);
    }

    double Path::left_limit(std::size_t i) const
    {
        return i == 0 ? values_[0] : values_[i - 1] + slopes_[i - 1] * (times_[i] - times_[i - 1]);
    }

    std::size_t Path::segment(double t) const
    {
        if (times_.empty() || t < times_.front())
            throw ValidationError("path evaluated before its first breakpoint");
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        return static_cast<std::size_t>(it - times_.begin()) - 1;
    }

    double Path::at(double t) const
    {
        const std::size_t i = segment(t);
        return values_[i] + slopes_[i] * (t - times_[i]);
    }

    double Path::left_at(double t) const
    {
        const std::size_t i = segment(t);
        if (times_[i] == t)
            return left_limit(i);
        return values_[i] + slopes_[i] * (t - times_[i]);
    }

    double Path::sup_on(double a, double b) const
    {
        double best = std::max(at(a), at(b));
        best = std::max(best, left_at(b));
        for (std::size_t i = segment(a) + 1; i < times_.size() && times_[i] <= b; ++i)
            best = std::max({best, values_[i], left_limit(i)});
        return best;
    }

    double Path::inf_on(double a, double b) const
    {
        double best = std::min(at(a), at(b));
        best = std::min(best, left_at(b));
        for (std::size_t i = segment(a) + 1; i < times_.size() && times_[i] <= b; ++i)
            best = std::min({best, values_[i], left_limit(i)});
        return best;
    }

    Path Path::resampled(std::span<const double> grid) const
    {
        Path out;
        std::size_t i = 0;
        for (double g : grid)
        {
            while (i + 1 < times_.size() && times_[i + 1] <= g)
                ++i;
            if (g < times_.front())
                throw ValidationError("resampling grid starts before the path");
            out.append(g, values_[i] + slopes_[i] * (g - times_[i]), slopes_[i]);
        }
        return out;
    }

    Path Path::plus_linear(double rate) const
    {
        Path out = *this;
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            out.values_[i] += rate * out.times_[i];
            out.slopes_[i] += rate;
        }
        return out;
    }

    Path &Path::operator+=(const Path &other)
    {
        if (other.times_ != times_)
            throw ValidationError("path arithmetic requires identical grids");
        for (std::size_t i = 0; i < size(); ++i)
        {
            values_[i] += other.values_[i];
            slopes_[i] += other.slopes_[i];
        }
        return *this;
    }

    Path &Path::operator*=(double c)
    {
        for (std::size_t i = 0; i < size(); ++i)
        {
            values_[i] *= c;
            slopes_[i] *= c;
        }
        return *this;
    }

    Path operator+(Path a, const Path &b) { return a += b; }
    Path operator-(Path a, const Path &b) { return a += (-1.0) * b; }
    Path operator*(double c, Path a) { return a *= c; }

    Path step_path(std::span<const double> times, std::span<const double> values)
    {
        assert(times.size() == values.size());
        Path out;
        for (std::size_t i = 0; i < times.size(); ++i)
            out.append(times[i], values[i], 0.0);
        return out;
    }

    std::vector<double> drawup_with_drift(const Path &x, double c)
    {
        std::vector<double> out(x.size());
        double running_inf = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            const double t = x.time(i);
            running_inf = std::min(running_inf, x.left_limit(i) - c * t);
            const double g = x.value(i) - c * t;
            running_inf = std::min(running_inf, g);
            out[i] = g - running_inf;
        }
        return out;
    }
} // namespace gjn
