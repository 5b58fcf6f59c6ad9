#pragma once

#include <span>
#include <vector>

namespace gjn
{
    /// Right-continuous piecewise-linear path on [times.front(), ∞).
    ///
    /// Breakpoint i carries the value at times[i] (after any jump) and the slope on
    /// [times[i], times[i+1]). Counting and queue paths have zero slopes; busy time
    /// and centered processes are linear between events. Extrema over an interval
    /// are attained at breakpoints or at left limits, so every supremum below is exact.
    class Path
    {
    public:
        Path() = default;

        /// Appends a breakpoint. t must be >= the last time; an equal time overwrites
        /// the last breakpoint (right-continuity), keeping its left limit.
        void append(double t, double value, double slope = 0.0);

        bool empty() const noexcept { return times_.empty(); }
        std::size_t size() const noexcept { return times_.size(); }
        std::span<const double> times() const noexcept { return times_; }
        std::span<const double> values() const noexcept { return values_; }
        std::span<const double> slopes() const noexcept { return slopes_; }

        double time(std::size_t i) const { return times_[i]; }
        double value(std::size_t i) const { return values_[i]; }
        double slope(std::size_t i) const { return slopes_[i]; }
        /// Value approached from the left at breakpoint i (equals value(0) for i = 0).
        double left_limit(std::size_t i) const;

        /// Right-continuous evaluation; t must be >= times.front().
        double at(double t) const;
        /// Left limit at t.
        double left_at(double t) const;

        /// sup / inf over s ∈ [a, b], left limits included.
        double sup_on(double a, double b) const;
        double inf_on(double a, double b) const;

        /// Same function expressed on `grid`; grid must contain every breakpoint in its range.
        Path resampled(std::span<const double> grid) const;

        /// Pointwise x(t) + rate * t.
        Path plus_linear(double rate) const;

        Path &operator+=(const Path &other); // identical grids
        Path &operator*=(double c);

    private:
        std::size_t segment(double t) const; // last index with times[i] <= t

        std::vector<double> times_;
        std::vector<double> values_;
        std::vector<double> slopes_;
    };

    Path operator+(Path a, const Path &b);
    Path operator-(Path a, const Path &b);
    Path operator*(double c, Path a);

    /// Step path through the given (time, value) pairs.
    Path step_path(std::span<const double> times, std::span<const double> values);

    /// For each breakpoint t_i: (x(t_i) - c t_i) - inf_{s<=t_i} (x(s) - c s),
    /// i.e. sup_{0<=s<=t_i} (x(t_i) - x(s) - c (t_i - s)), exact on the piecewise structure.
    std::vector<double> drawup_with_drift(const Path &x, double c);
} // namespace gjn
