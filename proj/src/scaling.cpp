#include "gjn/scaling.hpp"

#include "gjn/errors.hpp"
#include "gjn/format.hpp"
#include "gjn/parallel.hpp"
#include "gjn/rng.hpp"
#include "gjn/simulator.hpp"
#include "gjn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gjn
{
    namespace
    {
        void require_increasing(const std::vector<double> &grid, const char *name)
        {
            if (grid.empty())
                throw ValidationError(std::string(name) + " grid is empty");
            for (std::size_t i = 0; i < grid.size(); ++i)
            {
                if (!std::isfinite(grid[i]))
                    throw ValidationError(std::string(name) + " grid has a non-finite entry");
                if (i > 0 && !(grid[i] > grid[i - 1]))
                    throw ValidationError(std::string(name) + " grid must be strictly increasing");
            }
        }

        double drift_scale(const ScalingRegime &regime)
        {
            const double root = std::sqrt(regime.n);
            if (regime.kind == RegimeKind::diffusion)
                return 1.0 / root;
            return regime.bn(regime.n) / root;
        }

        int sign(double x) { return (x > 0.0) - (x < 0.0); }
    } // namespace

    std::string to_string(RegimeKind kind)
    {
        switch (kind)
        {
        case RegimeKind::raw: return "raw";
        case RegimeKind::large_deviation: return "ld";
        case RegimeKind::diffusion: return "diffusion";
        case RegimeKind::moderate: return "moderate";
        }
        return "unknown";
    }

    RegimeKind regime_from_string(const std::string &name)
    {
        if (name == "raw")
            return RegimeKind::raw;
        if (name == "ld" || name == "large_deviation")
            return RegimeKind::large_deviation;
        if (name == "diffusion")
            return RegimeKind::diffusion;
        if (name == "moderate")
            return RegimeKind::moderate;
        throw ValidationError("unknown regime '" + name + "' (expected raw, ld, diffusion or moderate)");
    }

    double BnSequence::operator()(double n) const
    {
        if (form == Form::power)
            return std::pow(n, gamma);
        return std::pow(std::log(n), gamma);
    }

    void BnSequence::validate() const
    {
        if (form == Form::power && !(gamma > 0.0 && gamma < 0.5))
            throw ValidationError("b_n = n^gamma needs gamma in (0, 1/2)");
        if (form == Form::log_power && !(gamma > 0.5 && std::isfinite(gamma)))
            throw ValidationError("b_n = (ln n)^gamma needs gamma > 1/2");
    }

    BnSequence BnSequence::parse(const std::string &text)
    {
        const auto colon = text.find(':');
        if (colon == std::string::npos)
            throw ValidationError("b_n must look like pow:GAMMA or logpow:GAMMA");
        const std::string form = text.substr(0, colon);
        BnSequence bn;
        if (form == "pow")
            bn.form = Form::power;
        else if (form == "logpow")
            bn.form = Form::log_power;
        else
            throw ValidationError("unknown b_n form '" + form + "'");
        try
        {
            std::size_t used = 0;
            bn.gamma = std::stod(text.substr(colon + 1), &used);
            if (used != text.size() - colon - 1)
                throw std::invalid_argument("trailing characters");
        }
        catch (const std::logic_error &)
        {
            throw ValidationError("b_n exponent is not a number: '" + text + "'");
        }
        bn.validate();
        return bn;
    }

    std::string BnSequence::describe() const
    {
        return (form == Form::power ? "pow:" : "logpow:") + format_double(gamma);
    }

    double ScalingRegime::threshold_scale() const
    {
        switch (kind)
        {
        case RegimeKind::raw: return 1.0;
        case RegimeKind::large_deviation: return n;
        case RegimeKind::diffusion: return std::sqrt(n);
        case RegimeKind::moderate: return bn(n) * std::sqrt(n);
        }
        return 1.0;
    }

    std::int64_t ScalingRegime::threshold(double u) const
    {
        const double x = threshold_scale() * u;
        return static_cast<std::int64_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
    }

    double ScalingRegime::normalize(double p) const
    {
        switch (kind)
        {
        case RegimeKind::raw:
        case RegimeKind::diffusion: return p;
        case RegimeKind::large_deviation: return std::pow(p, 1.0 / n);
        case RegimeKind::moderate:
        {
            const double b = bn(n);
            return std::pow(p, 1.0 / (b * b));
        }
        }
        return p;
    }

    NetworkSpec make_sequence(const NetworkSpec &base, const ScalingRegime &regime)
    {
        if (!(regime.n > 0.0) || !std::isfinite(regime.n))
            throw ValidationError("scale index n must be positive");
        if (regime.kind == RegimeKind::raw || regime.kind == RegimeKind::large_deviation)
            return base;
        if (regime.kind == RegimeKind::moderate)
        {
            regime.bn.validate();
            if (!(regime.n > 1.0))
                throw ValidationError("moderate regime needs n > 1");
        }

        const auto drift = solve_traffic(base);
        const int k = base.size();
        if (regime.r.size() != k)
            throw ValidationError("drift vector r must have one entry per station");
        for (int i = 0; i < k; ++i)
        {
            if (!(regime.r[i] < 0.0))
                throw ValidationError("drift vector r must be entrywise negative (station " + std::to_string(i + 1) +
                                      ")");
            const double tol = 1e-9 * std::max(1.0, std::abs(drift.mu[i]));
            if (std::abs(drift.mu[i] - drift.effective_arrivals[i]) > tol)
                throw ValidationError("base network is not critical at station " + std::to_string(i + 1) +
                                      ": mu must equal (I - P^T)^{-1} lambda");
        }

        const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k) - drift.routing.transpose();
        const Eigen::VectorXd rhs = drift.lambda - regime.r * drift_scale(regime);
        const Eigen::VectorXd mu_n = m.partialPivLu().solve(rhs);

        NetworkSpec out = base;
        for (int i = 0; i < k; ++i)
        {
            if (!(mu_n[i] > 0.0))
                throw ValidationError("scaled service rate is not positive at station " + std::to_string(i + 1));
            auto &station = out.stations[static_cast<std::size_t>(i)];
            station.service = station.service.scaled_to_mean(1.0 / mu_n[i]);
        }
        return out;
    }

    WarmupPolicy::Resolved WarmupPolicy::resolve(const DriftReport &drift) const
    {
        if (horizon)
        {
            if (!(*horizon > 0.0) || !std::isfinite(*horizon))
                throw ValidationError("warm-up horizon must be positive and finite");
            return {*horizon, "fixed"};
        }
        if (!(multiplier > 0.0) || !std::isfinite(multiplier))
            throw ValidationError("warm-up multiplier must be positive");
        if (!drift.subcritical)
            throw ValidationError("stationary estimates need a subcritical network");

        if (rule == Rule::relaxation)
        {
            double slowest = 0.0;
            for (int i = 0; i < drift.size(); ++i)
            {
                const double gap = std::sqrt(drift.mu[i]) - std::sqrt(drift.effective_arrivals[i]);
                slowest = std::max(slowest, 1.0 / (gap * gap));
            }
            return {multiplier * slowest, "relaxation"};
        }
        if (drift.strong_drift)
            return {multiplier / drift.nu.minCoeff(), "drift"};
        return {multiplier / (drift.mu - drift.effective_arrivals).minCoeff(), "slack"};
    }

    StationarySamples sample_stationary_queues(const NetworkSpec &spec, const TailOptions &options)
    {
        if (options.replications < 100)
            throw ValidationError("stationary tail estimates need at least 100 replications");
        const auto drift = validated_drift(spec, {.subcritical = true, .strong_drift = false});
        const auto warm = options.warmup.resolve(drift);

        // Events per unit time: exogenous arrivals plus one departure per effective arrival.
        const double rate = drift.lambda.sum() + drift.effective_arrivals.sum();
        if (warm.time * rate > static_cast<double>(options.event_cap))
            throw ResourceError("warm-up horizon " + format_double(warm.time) + " needs about " +
                                format_double(warm.time * rate) + " events, above the event cap");

        SimulationOptions sim;
        sim.horizon = warm.time;
        sim.event_cap = options.event_cap;
        sim.arrival_delay = DelayMode::equilibrium();
        sim.record = false;

        StationarySamples out;
        out.warmup = warm.time;
        out.warmup_rule = warm.rule;
        out.queues.resize(options.replications);
        parallel_for(options.replications, options.threads, [&](std::size_t r) {
            out.queues[r] = simulate(spec, sim, options.seed, r).final_queue;
        });
        return out;
    }

    TailEstimate tail_from_samples(const StationarySamples &samples, const ScalingRegime &regime, int station,
                                   double u)
    {
        if (samples.queues.empty())
            throw ValidationError("no stationary samples");
        if (station < 0 || static_cast<std::size_t>(station) >= samples.queues.front().size())
            throw ValidationError("station index out of range");
        TailEstimate e;
        e.regime = regime.kind;
        e.n = regime.n;
        e.station = station;
        e.u = u;
        e.threshold = regime.threshold(u);
        e.replications = samples.queues.size();
        for (const auto &q : samples.queues)
            if (q[static_cast<std::size_t>(station)] >= e.threshold)
                ++e.hits;
        const auto p = estimate_proportion(e.hits, e.replications);
        e.p_hat = p.p_hat;
        e.se = p.se;
        e.ci_low = p.ci_low;
        e.ci_high = p.ci_high;
        e.normalized = regime.normalize(e.p_hat);
        e.normalized_low = regime.normalize(e.ci_low);
        e.normalized_high = regime.normalize(e.ci_high);
        e.below_floor = e.p_hat < 10.0 / static_cast<double>(e.replications);
        e.warmup = samples.warmup;
        e.warmup_rule = samples.warmup_rule;
        return e;
    }

    std::vector<TailEstimate> estimate_stationary_tail(const NetworkSpec &spec, const ScalingRegime &regime,
                                                       const std::vector<double> &u_grid, int station,
                                                       const TailOptions &options)
    {
        if (u_grid.empty())
            throw ValidationError("u grid is empty");
        if (station < 0 || station >= spec.size())
            throw ValidationError("station index out of range");
        const auto samples = sample_stationary_queues(spec, options);
        std::vector<TailEstimate> out;
        out.reserve(u_grid.size());
        for (double u : u_grid)
            out.push_back(tail_from_samples(samples, regime, station, u));
        return out;
    }

    TailEstimate estimate_stationary_tail(const NetworkSpec &spec, const ScalingRegime &regime, double u, int station,
                                          const TailOptions &options)
    {
        return estimate_stationary_tail(spec, regime, std::vector<double>{u}, station, options).front();
    }

    std::vector<double> time_average_tail(const NetworkSpec &spec, int station,
                                          const std::vector<std::int64_t> &thresholds, double horizon,
                                          double burn_in, std::uint64_t seed)
    {
        if (!(horizon > burn_in) || burn_in < 0.0)
            throw ValidationError("time average needs 0 <= burn_in < horizon");
        if (station < 0 || station >= spec.size())
            throw ValidationError("station index out of range");
        validated_drift(spec, {.subcritical = true, .strong_drift = false});
        SimulationOptions sim;
        sim.horizon = horizon;
        sim.arrival_delay = DelayMode::equilibrium();
        const auto traj = simulate(spec, sim, seed);
        const Path &q = traj.stations[static_cast<std::size_t>(station)].queue;

        std::vector<double> occupancy(thresholds.size(), 0.0);
        for (std::size_t i = 0; i < q.size(); ++i)
        {
            const double start = std::max(q.time(i), burn_in);
            const double end = i + 1 < q.size() ? q.time(i + 1) : horizon;
            if (end <= start)
                continue;
            for (std::size_t j = 0; j < thresholds.size(); ++j)
                if (q.value(i) >= static_cast<double>(thresholds[j]))
                    occupancy[j] += end - start;
        }
        for (auto &v : occupancy)
            v /= horizon - burn_in;
        return occupancy;
    }

    SweepResult tightness_sweep(const NetworkSpec &base, const SweepConfig &config)
    {
        require_increasing(config.n_grid, "n");
        require_increasing(config.u_grid, "u");

        SweepResult result;
        for (double n : config.n_grid)
        {
            ScalingRegime regime{config.regime, n, config.r, config.bn};
            const auto spec = make_sequence(base, regime);
            TailOptions options = config.tail;
            options.seed = derive_seed(config.tail.seed, static_cast<std::uint64_t>(std::llround(n * 1000.0)));
            const auto cells = estimate_stationary_tail(spec, regime, config.u_grid, config.station, options);
            result.cells.insert(result.cells.end(), cells.begin(), cells.end());
        }

        for (std::size_t j = 0; j < config.u_grid.size(); ++j)
        {
            SweepSummary s;
            s.u = config.u_grid[j];
            for (std::size_t i = 0; i < config.n_grid.size(); ++i)
            {
                const auto &cell = result.cells[i * config.u_grid.size() + j];
                if (cell.below_floor)
                    continue;
                ++s.resolved_cells;
                if (!s.max_normalized || cell.normalized > *s.max_normalized)
                {
                    s.max_normalized = cell.normalized;
                    s.argmax_n = cell.n;
                }
            }
            result.per_u.push_back(s);
        }

        std::vector<std::pair<double, double>> points;
        for (const auto &s : result.per_u)
            if (s.max_normalized)
                points.emplace_back(s.u, *s.max_normalized);
        if (points.size() >= 2)
        {
            double concordance = 0.0;
            std::size_t pairs = 0;
            for (std::size_t a = 0; a < points.size(); ++a)
                for (std::size_t b = a + 1; b < points.size(); ++b)
                {
                    concordance += sign(points[b].first - points[a].first) * sign(points[b].second - points[a].second);
                    ++pairs;
                }
            result.trend_in_u = concordance / static_cast<double>(pairs);
        }
        return result;
    }

    MomentCapabilities network_moment_classes(const NetworkSpec &spec)
    {
        MomentCapabilities all{true, true, true};
        auto meet = [&all](const DistributionSpec &law) {
            const auto c = law.capabilities();
            all.exp_moment = all.exp_moment && c.exp_moment;
            all.two_plus_eps_moment = all.two_plus_eps_moment && c.two_plus_eps_moment;
            all.stretched_exp_moment = all.stretched_exp_moment && c.stretched_exp_moment;
        };
        for (const auto &st : spec.stations)
        {
            if (st.arrival)
                meet(*st.arrival);
            meet(st.service);
        }
        return all;
    }

    std::string tail_csv_header()
    {
        return "regime,n,u,k,threshold,p_hat,ci_low,ci_high,normalized,normalized_low,normalized_high,below_floor,"
               "replications,warmup";
    }

    std::string to_csv(const TailEstimate &e)
    {
        return to_string(e.regime) + "," + format_double(e.n) + "," + format_double(e.u) + "," +
               std::to_string(e.station + 1) + "," + std::to_string(e.threshold) + "," + format_double(e.p_hat) + "," +
               format_double(e.ci_low) + "," + format_double(e.ci_high) + "," + format_double(e.normalized) + "," +
               format_double(e.normalized_low) + "," + format_double(e.normalized_high) + "," +
               (e.below_floor ? "1" : "0") + "," + std::to_string(e.replications) + "," + format_double(e.warmup);
    }
} // namespace gjn
