#pragma once

#include "gjn/model.hpp"
#include "gjn/path.hpp"
#include "gjn/simulator.hpp"

#include <vector>

namespace gjn
{
    /// One-dimensional Skorohod reflection ψ(x)(t) = x(t) - min(inf_{s<=t} x(s), 0).
    ///
    /// Exact on [first, last breakpoint]: where a decreasing segment reaches the running
    /// minimum a breakpoint is inserted, after which ψ stays at 0 for the segment.
    Path skorohod_reflect(const Path &x);

    /// Y₁(t), Y₂,ₗ(t), Y₃,ₗ(t) for one station at one time.
    struct YComponents
    {
        double y1 = 0.0;
        std::vector<double> y2; // per source station l
        std::vector<double> y3; // per source station l

        double y2_sum() const;
        double y3_sum() const;
    };

    /// Majorizing processes of station k on the trajectory's event grid.
    struct MajorantBundle
    {
        int station = 0;
        double nu = 0.0;
        std::vector<double> times; // event grid, including 0 and the horizon

        Path queue;     // Q_k
        Path centered;  // Q̄_k = Q_k(0) + Ā_k + Σ_l Φ̄_lk(D_l) + Σ_l p_lk D̄_l - D̄_k
        Path drifted;   // Q̃_k = Q̄_k - ν_k t
        Path reflected; // Q̂_k = ψ(Q̃_k); extra breakpoints at zero crossings, so evaluate with at()
        std::vector<Path> departures_centered; // D̄_l = D_l - μ_l B_l

        std::vector<double> y1;
        std::vector<std::vector<double>> y2; // [l][grid index]
        std::vector<std::vector<double>> y3;
        std::vector<double> y2_sum;
        std::vector<double> y3_sum;
        std::vector<double> initial_slack; // (Q_k(0) - ν_k t / 4)⁺

        std::size_t majorization_violations = 0;  // Q_k > Q̂_k (right values or left limits)
        std::size_t decomposition_violations = 0; // Q_k > Y₁ + ΣY₂ + ΣY₃ + slack

        double decomposition_rhs(std::size_t i) const { return y1[i] + y2_sum[i] + y3_sum[i] + initial_slack[i]; }
        bool ok() const noexcept { return majorization_violations == 0 && decomposition_violations == 0; }
    };

    inline constexpr double kPathwiseTolerance = 1e-9;

    /// Builds Q̄_k, Q̃_k, Q̂_k and the Y components on the event grid and counts breaches
    /// of both pathwise inequalities. Throws ValidationError when ν_k <= 0.
    MajorantBundle build_majorants(const Trajectory &traj, const DriftReport &drift, int k,
                                   double tolerance = kPathwiseTolerance);

    /// Direct evaluation at a single time by enumerating every candidate s <= t.
    YComponents y_components(const Trajectory &traj, const DriftReport &drift, int k, double t);
} // namespace gjn
