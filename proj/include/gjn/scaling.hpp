#pragma once

#include "gjn/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gjn
{
    enum class RegimeKind
    {
        raw,             // no scaling: threshold u, value p
        large_deviation, // threshold n u, value p^{1/n}
        diffusion,       // threshold √n u, value p
        moderate,        // threshold b_n √n u, value p^{1/b_n²}
    };

    std::string to_string(RegimeKind kind);
    /// Accepts raw, ld, large_deviation, diffusion, moderate.
    RegimeKind regime_from_string(const std::string &name);

    /// b_n = n^γ with γ ∈ (0, 1/2), or b_n = (ln n)^γ with γ > 1/2.
    struct BnSequence
    {
        enum class Form
        {
            power,
            log_power,
        };

        Form form = Form::power;
        double gamma = 0.25;

        double operator()(double n) const;
        void validate() const;
        /// "pow:γ" or "logpow:γ".
        static BnSequence parse(const std::string &text);
        std::string describe() const;
    };

    struct ScalingRegime
    {
        RegimeKind kind = RegimeKind::raw;
        double n = 1.0;
        Eigen::VectorXd r; // diffusion and moderate only, entrywise negative
        BnSequence bn;

        /// s_n: n, √n, b_n √n, or 1.
        double threshold_scale() const;
        /// Integer queue threshold ⌈s_n u⌉ (a relative 1e-9 slack absorbs rounding noise).
        std::int64_t threshold(double u) const;
        /// Regime power applied to a probability.
        double normalize(double p) const;
    };

    /// Network for index n of the chosen regime. Large-deviation and raw regimes return the
    /// base unchanged; diffusion and moderate regimes rescale the service laws so that
    /// (I - Pᵀ) μ_n = λ - r / √n (resp. λ - r b_n / √n). The base must be critical.
    NetworkSpec make_sequence(const NetworkSpec &base, const ScalingRegime &regime);

    struct WarmupPolicy
    {
        enum class Rule
        {
            drift,      // multiplier / min_k ν_k, falling back to multiplier / min_k (μ_k - a_k)
            relaxation, // multiplier · max_k 1 / (√μ_k - √a_k)²
        };

        Rule rule = Rule::drift;
        double multiplier = 20.0;
        std::optional<double> horizon; // overrides the rule

        struct Resolved
        {
            double time = 0.0;
            std::string rule;
        };

        Resolved resolve(const DriftReport &drift) const;
    };

    struct TailOptions
    {
        std::size_t replications = 1000;
        std::uint64_t seed = 1;
        WarmupPolicy warmup;
        std::size_t event_cap = 50'000'000;
        unsigned threads = 1;
    };

    struct TailEstimate
    {
        RegimeKind regime = RegimeKind::raw;
        double n = 1.0;
        int station = 0; // 0-based
        double u = 0.0;
        std::int64_t threshold = 0;
        std::size_t hits = 0;
        std::size_t replications = 0;
        double p_hat = 0.0;
        double se = 0.0;
        double ci_low = 0.0;
        double ci_high = 0.0;
        double normalized = 0.0;
        double normalized_low = 0.0;
        double normalized_high = 0.0;
        bool below_floor = false; // p̂ < 10 / R
        double warmup = 0.0;
        std::string warmup_rule;
    };

    struct StationarySamples
    {
        double warmup = 0.0;
        std::string warmup_rule;
        std::vector<std::vector<std::int64_t>> queues; // [replicate][station] at the warm-up time
    };

    /// One queue-vector sample per replicate at the warm-up time, started empty with
    /// equilibrium arrival delays. Requires a subcritical network and R >= 100.
    StationarySamples sample_stationary_queues(const NetworkSpec &spec, const TailOptions &options);

    TailEstimate tail_from_samples(const StationarySamples &samples, const ScalingRegime &regime, int station,
                                   double u);

    std::vector<TailEstimate> estimate_stationary_tail(const NetworkSpec &spec, const ScalingRegime &regime,
                                                       const std::vector<double> &u_grid, int station,
                                                       const TailOptions &options);

    TailEstimate estimate_stationary_tail(const NetworkSpec &spec, const ScalingRegime &regime, double u, int station,
                                          const TailOptions &options);

    /// Long-run fraction of time in [burn_in, horizon] with Q_k >= threshold, one long path.
    std::vector<double> time_average_tail(const NetworkSpec &spec, int station,
                                          const std::vector<std::int64_t> &thresholds, double horizon,
                                          double burn_in, std::uint64_t seed);

    struct SweepConfig
    {
        RegimeKind regime = RegimeKind::large_deviation;
        Eigen::VectorXd r;
        BnSequence bn;
        std::vector<double> n_grid;
        std::vector<double> u_grid;
        int station = 0;
        TailOptions tail;
    };

    struct SweepSummary
    {
        double u = 0.0;
        std::optional<double> max_normalized; // over n, cells above the resolution floor only
        std::optional<double> argmax_n;
        std::size_t resolved_cells = 0;
    };

    struct SweepResult
    {
        std::vector<TailEstimate> cells; // n-major, then u
        std::vector<SweepSummary> per_u;
        /// Kendall-type statistic of max_normalized against u over resolved entries:
        /// -1 strictly decreasing, +1 strictly increasing, 0 with fewer than two entries.
        double trend_in_u = 0.0;
    };

    SweepResult tightness_sweep(const NetworkSpec &base, const SweepConfig &config);

    /// Moment classes held by every arrival and service law of the network.
    MomentCapabilities network_moment_classes(const NetworkSpec &spec);

    std::string tail_csv_header();
    std::string to_csv(const TailEstimate &estimate);
} // namespace gjn
