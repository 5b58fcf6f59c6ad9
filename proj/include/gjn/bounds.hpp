#pragma once

#include "gjn/distribution.hpp"
#include "gjn/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gjn
{
    enum class WalkKind
    {
        scaled_centered_interarrival, // a·ξ̄ increments
        routing_plus_service,         // Bernoulli(p) - p plus a·σ̄
        scaled_centered_service,      // a·σ̄ increments
    };

    std::string to_string(WalkKind kind);

    /// Negative-drift random walk
    ///
    ///   W_i = a (T_i - E T_i) + (Φ_i - p i) - d (i - 1),   T_i = gap_1 + ... + gap_i,
    ///
    /// whose first gap is drawn from the equilibrium law (or the generic law when
    /// `equilibrium_first` is false) and whose Bernoulli routing term is present only
    /// for routing_plus_service. The tail event is sup_{i>=1} W_i >= u + offset.
    struct SupWalkSpec
    {
        WalkKind kind = WalkKind::scaled_centered_interarrival;
        DistributionSpec gap = DistributionSpec::deterministic(1.0);
        bool equilibrium_first = true;
        double coefficient = 0.0;         // a
        double routing_probability = 0.0; // p
        double drift = 0.0;               // d
        double offset = 0.0;              // c

        /// Throws ValidationError on d <= 0 ("supremum may be infinite") or p outside [0,1].
        void validate() const;

        /// E T_1. CapabilityError when infinite.
        double first_mean() const;
        /// log E e^{θ Z} for a generic centered increment Z (drift excluded).
        std::optional<double> increment_log_mgf(double theta) const;
        /// log E e^{θ W_1}.
        std::optional<double> first_log_mgf(double theta) const;
        /// sup{θ > 0 : E e^{θ Z} < ∞}.
        double theta_upper() const;
        bool light_tailed() const;
        /// Variance of a generic centered increment; nullopt when infinite.
        std::optional<double> increment_variance() const;
    };

    struct McOptions
    {
        std::size_t replications = 10000;
        std::uint64_t seed = 1;
        std::size_t truncation = 0; // 0: choose automatically
        std::size_t initial_truncation = 64;
        std::size_t max_truncation = std::size_t{1} << 20;
        unsigned threads = 1;
    };

    struct WalkTailEstimate
    {
        double threshold = 0.0; // u + offset
        std::size_t hits = 0;
        std::size_t replications = 0;
        double p_hat = 0.0;
        double se = 0.0;
        double ci_low = 0.0;
        double ci_high = 0.0;
        std::size_t truncation = 0;
        /// Lundberg bound on P(sup_{i > truncation} W_i >= threshold); NaN when the level
        /// came from the doubling rule instead.
        double truncation_bound = 0.0;
        bool certified = false;  // truncation_bound is a proven bound
        bool stabilized = false; // doubling rule satisfied (heuristic path)
    };

    /// Monte Carlo estimate of P(sup_{1<=i<=I} W_i >= u + offset).
    WalkTailEstimate supwalk_tail_mc(const SupWalkSpec &spec, double u, const McOptions &options);

    /// Estimates on a u grid from one coupled set of paths (nonincreasing in u).
    std::vector<WalkTailEstimate> supwalk_tail_mc(const SupWalkSpec &spec, const std::vector<double> &u_grid,
                                                  const McOptions &options);

    /// Positive root θ* of log E e^{θ(Z - d)} = 0, or nullopt when none exists below the
    /// mgf boundary. CapabilityError without an exponential moment.
    std::optional<double> lundberg_exponent(const SupWalkSpec &spec);

    /// E e^{θ* W_1} e^{-θ*(u + offset)}, capped at 1; nullopt when θ* is absent.
    std::optional<double> lundberg_tail_bound(const SupWalkSpec &spec, double u);

    /// Bound on P(sup_i (M_i - d i) >= x) with M_i = W_i + d (i - 1).
    struct ChernoffDyadicBound
    {
        double value = 0.0;
        double head = 0.0;
        double tail = 0.0;
        double theta = 0.0;    // ϑ
        double log_rho = 0.0;  // log ϱ = L(ϑ) - ϑ d / 4
        double threshold = 0.0;       // x
        std::size_t head_count = 0;   // N
        std::size_t terms = 0;
        /// Threshold for supwalk_tail_mc on the same spec with offset 0 giving the same event.
        double walk_threshold = 0.0;
    };

    /// Head Chernoff term over i <= N plus dyadic block sum from N on, at threshold x.
    /// ϑ starts at `theta` (default θ*/2) and is halved until ϱ < 1 and L(ϑ) < ϑ·head_rate.
    ChernoffDyadicBound chernoff_dyadic_core(const SupWalkSpec &spec, double x, std::size_t head_count,
                                             double head_rate, std::optional<double> theta = std::nullopt);

    /// Scaled form: x = n u / divisor, N = max(1, ⌊n u⌋).
    ChernoffDyadicBound chernoff_dyadic_bound(const SupWalkSpec &spec, double u, double n, double divisor = 5.0,
                                              std::optional<double> theta = std::nullopt);

    struct SecondMomentBlockBound
    {
        double value = 0.0;
        double head = 0.0;
        double tail = 0.0;
        double threshold = 0.0;     // x
        std::size_t head_count = 0; // N
        double first_positive_mean = 0.0; // bound on E Z_1⁺
        double increment_variance = 0.0;
        double delayed_block_constant = 0.0;  // block j term <= constant / 2^j
        double ordinary_block_constant = 0.0;
    };

    /// Markov + Kolmogorov bound on P(sup_i (M_i - d i) >= x) with head over i <= N.
    SecondMomentBlockBound second_moment_block_core(const SupWalkSpec &spec, double x, std::size_t head_count);

    /// Scaled form: x = √n u / divisor, N = max(1, ⌊n u⌋).
    SecondMomentBlockBound second_moment_block_bound(const SupWalkSpec &spec, double u, double n,
                                                     double divisor = 9.0);

    /// Monte Carlo estimate of P(max_{1<=i<=count} M_i >= threshold) for the undrifted walk.
    WalkTailEstimate block_event_mc(const SupWalkSpec &spec, std::size_t count, double threshold,
                                    std::size_t replications, std::uint64_t seed, bool equilibrium_first = true);

    enum class LemmaTerm
    {
        eq37,
        eq41,
        eq3,
    };

    std::string to_string(LemmaTerm term);
    LemmaTerm lemma_term_from_string(const std::string &name);

    /// The walk(s) whose tail sum is the chosen right-hand side for station k and source l
    /// (0-based). Empty for eq37 at a station without exogenous arrivals.
    std::vector<SupWalkSpec> lemma_walks(const NetworkSpec &network, const DriftReport &drift, int k, int l,
                                         LemmaTerm which);

    struct LemmaEstimate
    {
        LemmaTerm which = LemmaTerm::eq37;
        double u = 0.0;
        double estimate = 0.0;
        double se = 0.0;
        double ci_low = 0.0;
        double ci_high = 0.0;
        std::vector<SupWalkSpec> walks;
        std::vector<WalkTailEstimate> branches;
        std::optional<double> lundberg_bound; // sum over branches when every branch has θ*
    };

    LemmaEstimate lemma_rhs(const NetworkSpec &network, const DriftReport &drift, int k, int l, LemmaTerm which,
                            double u, const McOptions &mc);

    /// One CSV row of a bound-verification table.
    struct BoundRow
    {
        std::string which;
        double u = 0.0;
        double mc_estimate = 0.0;
        double ci_low = 0.0;
        double ci_high = 0.0;
        std::optional<double> lundberg_bound;
        std::optional<double> dyadic_bound;
        std::optional<double> second_moment_bound;
    };

    std::string bound_csv_header();
    std::string to_csv(const BoundRow &row);
} // namespace gjn
