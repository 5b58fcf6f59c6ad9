#include "gjn/bounds.hpp"

#include "gjn/errors.hpp"
#include "gjn/format.hpp"
#include "gjn/parallel.hpp"
#include "gjn/rng.hpp"
#include "gjn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gjn
{
    namespace
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();

        std::optional<double> finite_or_none(std::optional<double> v)
        {
            if (v && std::isfinite(*v))
                return v;
            return std::nullopt;
        }

        // log(1 - p + p e^θ) - θ p, written to avoid overflow for large |θ|.
        double bernoulli_centered_log_mgf(double p, double theta)
        {
            if (p <= 0.0 || p >= 1.0)
                return 0.0;
            double v;
            if (theta > 0.0)
                v = theta + std::log(p + (1.0 - p) * std::exp(-theta));
            else
                v = std::log1p(p * std::expm1(theta));
            return v - theta * p;
        }

        bool has_routing(const SupWalkSpec &s)
        {
            return s.kind == WalkKind::routing_plus_service && s.routing_probability > 0.0;
        }

        // Draws W_1, W_2, ... one at a time. The drift may differ from spec.drift so that
        // block events of the undrifted walk can reuse the same code.
        class Walker
        {
        public:
            Walker(const SupWalkSpec &spec, double drift, double first_mean, bool equilibrium_first,
                   std::uint64_t seed)
                : spec_(&spec), drift_(drift), first_mean_(first_mean), mean_(spec.gap.mean()),
                  equilibrium_first_(equilibrium_first), routing_(has_routing(spec)), rng_(seed)
            {
            }

            double step()
            {
                const bool first = steps_ == 0;
                double z = 0.0;
                if (spec_->coefficient != 0.0)
                {
                    const double gap = first && equilibrium_first_ ? spec_->gap.equilibrium_sample(rng_)
                                                                   : spec_->gap.sample(rng_);
                    z = spec_->coefficient * (gap - (first ? first_mean_ : mean_));
                }
                if (routing_)
                {
                    const double p = spec_->routing_probability;
                    z += (rng_.uniform01() < p ? 1.0 : 0.0) - p;
                }
                value_ += first ? z : z - drift_;
                ++steps_;
                return value_;
            }

            std::size_t steps() const noexcept { return steps_; }

        private:
            const SupWalkSpec *spec_;
            double drift_;
            double first_mean_;
            double mean_;
            bool equilibrium_first_;
            bool routing_;
            Xoshiro256 rng_;
            double value_ = 0.0;
            std::size_t steps_ = 0;
        };

        double first_mean_for(const SupWalkSpec &spec, bool equilibrium_first)
        {
            if (spec.coefficient == 0.0)
                return 0.0;
            if (!equilibrium_first)
                return spec.gap.mean();
            return spec.first_mean();
        }

        struct PathRun
        {
            Walker walker;
            double sup = -kInf;
        };

        void advance(PathRun &run, std::size_t to, double stop_level)
        {
            while (run.walker.steps() < to && run.sup < stop_level)
                run.sup = std::max(run.sup, run.walker.step());
        }

        std::vector<std::size_t> count_hits(const std::vector<PathRun> &runs, const std::vector<double> &thresholds)
        {
            std::vector<std::size_t> hits(thresholds.size(), 0);
            for (const auto &run : runs)
                for (std::size_t j = 0; j < thresholds.size(); ++j)
                    if (run.sup >= thresholds[j])
                        ++hits[j];
            return hits;
        }

        void advance_all(std::vector<PathRun> &runs, std::size_t to, double stop_level, unsigned threads)
        {
            constexpr std::size_t chunk = 256;
            const std::size_t chunks = (runs.size() + chunk - 1) / chunk;
            parallel_for(chunks, threads, [&](std::size_t c) {
                const std::size_t end = std::min(runs.size(), (c + 1) * chunk);
                for (std::size_t r = c * chunk; r < end; ++r)
                    advance(runs[r], to, stop_level);
            });
        }

        struct Certificate
        {
            std::size_t truncation = 0;
            double bound = 0.0;
        };

        // Smallest I with E e^{θW_{I+1}} e^{-θx} <= tol over a grid of θ with ϱ(θ) < 1.
        // W_{I+1} bounds the tail beyond I because e^{θ W_i}, i >= I+1, is a supermartingale.
        std::optional<Certificate> certified_truncation(const SupWalkSpec &spec, double x, double tol,
                                                        std::size_t max_truncation)
        {
            if (!spec.light_tailed())
                return std::nullopt;
            std::vector<double> thetas;
            const auto root = lundberg_exponent(spec);
            if (root)
            {
                for (int j = 1; j < 16; ++j)
                    thetas.push_back(*root * j / 16.0);
            }
            else
            {
                const double upper = spec.theta_upper();
                for (int j = -20; j <= 20; ++j)
                {
                    const double t = std::ldexp(1.0, j);
                    if (t < upper)
                        thetas.push_back(t);
                }
            }
            std::optional<Certificate> best;
            for (double t : thetas)
            {
                const auto l = finite_or_none(spec.increment_log_mgf(t));
                const auto l1 = finite_or_none(spec.first_log_mgf(t));
                if (!l || !l1)
                    continue;
                const double log_rho = *l - t * spec.drift;
                if (!(log_rho < 0.0))
                    continue;
                const double need = (*l1 - t * x - std::log(tol)) / (-log_rho);
                const double steps = std::max(1.0, std::ceil(need));
                if (!(steps <= static_cast<double>(max_truncation)))
                    continue;
                const auto i = static_cast<std::size_t>(steps);
                if (!best || i < best->truncation)
                {
                    const double bound = std::exp(*l1 + static_cast<double>(i) * log_rho - t * x);
                    best = Certificate{i, bound};
                }
            }
            return best;
        }

        WalkTailEstimate make_estimate(std::size_t hits, std::size_t reps, double threshold)
        {
            const auto p = estimate_proportion(hits, reps);
            WalkTailEstimate e;
            e.threshold = threshold;
            e.hits = hits;
            e.replications = reps;
            e.p_hat = p.p_hat;
            e.se = p.se;
            e.ci_low = p.ci_low;
            e.ci_high = p.ci_high;
            return e;
        }

        // Λ(θ) = log E e^{θ(Z - d)}.
        std::optional<double> lundberg_lambda(const SupWalkSpec &spec, double theta)
        {
            const auto l = finite_or_none(spec.increment_log_mgf(theta));
            if (!l)
                return std::nullopt;
            return *l - theta * spec.drift;
        }
    } // namespace

    std::string to_string(WalkKind kind)
    {
        switch (kind)
        {
        case WalkKind::scaled_centered_interarrival: return "scaled_centered_interarrival";
        case WalkKind::routing_plus_service: return "routing_plus_service";
        case WalkKind::scaled_centered_service: return "scaled_centered_service";
        }
        return "unknown";
    }

    void SupWalkSpec::validate() const
    {
        if (!(drift > 0.0) || !std::isfinite(drift))
            throw ValidationError("supremum may be infinite: per-step drift must be positive");
        if (!(routing_probability >= 0.0 && routing_probability <= 1.0))
            throw ValidationError("routing probability must lie in [0,1]");
        if (routing_probability > 0.0 && kind != WalkKind::routing_plus_service)
            throw ValidationError("routing probability is only used by routing_plus_service walks");
        if (!std::isfinite(coefficient) || !std::isfinite(offset))
            throw ValidationError("walk coefficient and offset must be finite");
    }

    double SupWalkSpec::first_mean() const
    {
        if (!equilibrium_first)
            return gap.mean();
        const auto m = gap.equilibrium_mean();
        if (!m)
            throw CapabilityError("equilibrium first gap has infinite mean (" + gap.describe() +
                                  "); the centered walk is undefined");
        return *m;
    }

    std::optional<double> SupWalkSpec::increment_log_mgf(double theta) const
    {
        double total = 0.0;
        if (coefficient != 0.0 && theta != 0.0)
        {
            const auto g = gap.log_mgf(coefficient * theta);
            if (!g)
                return std::nullopt;
            total += *g - coefficient * theta * gap.mean();
        }
        if (has_routing(*this))
            total += bernoulli_centered_log_mgf(routing_probability, theta);
        return total;
    }

    std::optional<double> SupWalkSpec::first_log_mgf(double theta) const
    {
        double total = 0.0;
        if (coefficient != 0.0 && theta != 0.0)
        {
            const double at = coefficient * theta;
            const auto g = equilibrium_first ? gap.equilibrium_log_mgf(at) : gap.log_mgf(at);
            if (!g)
                return std::nullopt;
            total += *g - at * first_mean();
        }
        if (has_routing(*this))
            total += bernoulli_centered_log_mgf(routing_probability, theta);
        return total;
    }

    double SupWalkSpec::theta_upper() const
    {
        if (coefficient > 0.0)
            return gap.mgf_upper() / coefficient;
        return kInf;
    }

    bool SupWalkSpec::light_tailed() const
    {
        return coefficient == 0.0 || gap.capabilities().exp_moment;
    }

    std::optional<double> SupWalkSpec::increment_variance() const
    {
        double v = 0.0;
        if (coefficient != 0.0)
        {
            const auto g = gap.variance();
            if (!g)
                return std::nullopt;
            v += coefficient * coefficient * *g;
        }
        if (has_routing(*this))
            v += routing_probability * (1.0 - routing_probability);
        return v;
    }

    std::vector<WalkTailEstimate> supwalk_tail_mc(const SupWalkSpec &spec, const std::vector<double> &u_grid,
                                                  const McOptions &options)
    {
        spec.validate();
        if (options.replications < 1000)
            throw ValidationError("supwalk_tail_mc needs at least 1000 replications");
        if (u_grid.empty())
            throw ValidationError("u grid is empty");

        std::vector<double> thresholds;
        for (double u : u_grid)
            thresholds.push_back(u + spec.offset);
        const double lowest = *std::min_element(thresholds.begin(), thresholds.end());
        const double highest = *std::max_element(thresholds.begin(), thresholds.end());

        const std::size_t reps = options.replications;
        const double first_mean = first_mean_for(spec, spec.equilibrium_first);
        std::vector<PathRun> runs;
        runs.reserve(reps);
        for (std::size_t r = 0; r < reps; ++r)
            runs.push_back(PathRun{Walker(spec, spec.drift, first_mean, spec.equilibrium_first,
                                          derive_seed(options.seed, r, 0, StreamRole::walk))});

        std::size_t truncation = options.truncation;
        double truncation_bound = std::numeric_limits<double>::quiet_NaN();
        bool certified = false;
        bool stabilized = false;

        if (truncation == 0)
        {
            const double tol = 0.01 / static_cast<double>(reps);
            if (auto cert = certified_truncation(spec, lowest, tol, options.max_truncation))
            {
                truncation = cert->truncation;
                truncation_bound = cert->bound;
                certified = true;
            }
        }

        if (truncation > 0)
        {
            advance_all(runs, truncation, highest, options.threads);
        }
        else
        {
            // Doubling rule: accept I once the estimate at 2I moves by at most half a SE.
            std::size_t level = std::max<std::size_t>(1, options.initial_truncation);
            advance_all(runs, level, highest, options.threads);
            auto hits = count_hits(runs, thresholds);
            while (true)
            {
                if (level * 2 > options.max_truncation)
                    break;
                advance_all(runs, level * 2, highest, options.threads);
                const auto next = count_hits(runs, thresholds);
                bool stable = true;
                for (std::size_t j = 0; j < thresholds.size(); ++j)
                {
                    const auto e = estimate_proportion(next[j], reps);
                    const double diff = static_cast<double>(next[j] - hits[j]) / static_cast<double>(reps);
                    if (diff > 0.5 * e.se)
                        stable = false;
                }
                if (stable)
                {
                    stabilized = true;
                    break;
                }
                level *= 2;
                hits = next;
            }
            truncation = level;
            std::vector<WalkTailEstimate> out;
            for (std::size_t j = 0; j < thresholds.size(); ++j)
            {
                auto e = make_estimate(hits[j], reps, thresholds[j]);
                e.truncation = truncation;
                e.truncation_bound = truncation_bound;
                e.stabilized = stabilized;
                out.push_back(e);
            }
            return out;
        }

        const auto hits = count_hits(runs, thresholds);
        std::vector<WalkTailEstimate> out;
        for (std::size_t j = 0; j < thresholds.size(); ++j)
        {
            auto e = make_estimate(hits[j], reps, thresholds[j]);
            e.truncation = truncation;
            e.truncation_bound = truncation_bound;
            e.certified = certified;
            e.stabilized = stabilized;
            out.push_back(e);
        }
        return out;
    }

    WalkTailEstimate supwalk_tail_mc(const SupWalkSpec &spec, double u, const McOptions &options)
    {
        return supwalk_tail_mc(spec, std::vector<double>{u}, options).front();
    }

    std::optional<double> lundberg_exponent(const SupWalkSpec &spec)
    {
        spec.validate();
        if (!spec.light_tailed())
            throw CapabilityError("increment law " + spec.gap.describe() +
                                  " has no exponential moment; use second_moment_block_bound");
        const double upper = spec.theta_upper();

        double lo = 0.0;
        std::optional<double> hi;
        for (double t = 1e-6; t < 1e12 && t < upper; t *= 2.0)
        {
            const auto v = lundberg_lambda(spec, t);
            if (!v)
                break;
            if (*v == 0.0)
                return t;
            if (*v > 0.0)
            {
                hi = t;
                break;
            }
            lo = t;
        }
        if (!hi && std::isfinite(upper))
        {
            for (int j = 1; j <= 60; ++j)
            {
                const double t = upper * (1.0 - std::ldexp(1.0, -j));
                if (t <= lo)
                    continue;
                const auto v = lundberg_lambda(spec, t);
                if (!v)
                    break;
                if (*v > 0.0)
                {
                    hi = t;
                    break;
                }
                lo = t;
            }
        }
        if (!hi)
            return std::nullopt;

        double h = *hi;
        for (int it = 0; it < 400 && h - lo > 1e-15 * h; ++it)
        {
            const double mid = 0.5 * (lo + h);
            const auto v = lundberg_lambda(spec, mid);
            if (!v || *v > 0.0)
                h = mid;
            else if (*v < 0.0)
                lo = mid;
            else
                return mid;
        }
        return 0.5 * (lo + h);
    }

    std::optional<double> lundberg_tail_bound(const SupWalkSpec &spec, double u)
    {
        const auto theta = lundberg_exponent(spec);
        if (!theta)
            return std::nullopt;
        const auto l1 = finite_or_none(spec.first_log_mgf(*theta));
        if (!l1)
            return std::nullopt;
        return std::min(1.0, std::exp(*l1 - *theta * (u + spec.offset)));
    }

    ChernoffDyadicBound chernoff_dyadic_core(const SupWalkSpec &spec, double x, std::size_t head_count,
                                             double head_rate, std::optional<double> theta)
    {
        spec.validate();
        if (!spec.light_tailed())
            throw CapabilityError("chernoff bound needs an exponential moment; use second_moment_block_bound");
        const std::size_t n_head = std::max<std::size_t>(1, head_count);
        // Using x/head_rate - 1 >= N - 1 steps keeps the scaled head continuous in u.
        const double head_steps = std::max(static_cast<double>(n_head - 1), x / head_rate - 1.0);

        double t;
        if (theta)
            t = *theta;
        else if (const auto root = lundberg_exponent(spec))
            t = *root / 2.0;
        else
            t = std::isfinite(spec.theta_upper()) ? spec.theta_upper() / 2.0 : 1.0;

        const double d = spec.drift;
        std::optional<double> l, l1;
        bool ok = false;
        for (int halvings = 0; halvings <= 60; ++halvings)
        {
            l = finite_or_none(spec.increment_log_mgf(t));
            l1 = finite_or_none(spec.first_log_mgf(t));
            if (l && l1 && *l - t * d / 4.0 < 0.0 && *l < t * head_rate)
            {
                ok = true;
                break;
            }
            t /= 2.0;
        }
        if (!ok)
            throw NumericalError("chernoff parameter: rho >= 1 after 60 halvings");

        ChernoffDyadicBound b;
        b.theta = t;
        b.log_rho = *l - t * d / 4.0;
        b.threshold = x;
        b.head_count = n_head;
        b.walk_threshold = x + d;
        b.head = std::min(1.0, std::exp(*l1 + head_steps * *l - t * x));

        double tail = 0.0;
        for (int m = 0; m < 4000; ++m)
        {
            const double count = static_cast<double>(n_head) * std::ldexp(1.0, m);
            const double delayed = std::min(1.0, std::exp(*l1 - *l + count * b.log_rho));
            const double ordinary = std::min(1.0, std::exp(count * b.log_rho));
            const double term = delayed + ordinary;
            tail += term;
            ++b.terms;
            if (term == 0.0 || term < 1e-16 * (b.head + tail))
                break;
        }
        b.tail = tail;
        b.value = std::min(1.0, b.head + b.tail);
        return b;
    }

    ChernoffDyadicBound chernoff_dyadic_bound(const SupWalkSpec &spec, double u, double n, double divisor,
                                              std::optional<double> theta)
    {
        if (!(n > 0.0) || !(divisor > 0.0))
            throw ValidationError("scale n and divisor must be positive");
        const double nu = n * u;
        const auto count = static_cast<std::size_t>(std::max(1.0, std::floor(nu)));
        return chernoff_dyadic_core(spec, nu / divisor, count, 1.0 / divisor, theta);
    }

    SecondMomentBlockBound second_moment_block_core(const SupWalkSpec &spec, double x, std::size_t head_count)
    {
        spec.validate();
        const auto var = spec.increment_variance();
        if (!var)
            throw CapabilityError("second_moment_block_bound needs a finite second moment of " + spec.gap.describe());
        const double p = has_routing(spec) ? spec.routing_probability : 0.0;
        const double first_mean = spec.coefficient == 0.0 ? 0.0 : spec.first_mean();

        SecondMomentBlockBound b;
        b.threshold = x;
        b.head_count = std::max<std::size_t>(1, head_count);
        b.increment_variance = *var;
        b.first_positive_mean = std::abs(spec.coefficient) * first_mean + p * (1.0 - p);

        const double d = spec.drift;
        const double n = static_cast<double>(b.head_count);
        b.delayed_block_constant = 4.0 / d * b.first_positive_mean + 16.0 / (d * d) * b.increment_variance;
        b.ordinary_block_constant = 4.0 / (d * d) * b.increment_variance;
        b.tail = (b.delayed_block_constant + b.ordinary_block_constant) * 4.0 / n;

        if (x > 0.0)
            b.head = std::min(1.0, 2.0 * b.first_positive_mean / x + 4.0 * (n - 1.0) * b.increment_variance / (x * x));
        else
            b.head = 1.0;
        b.value = std::min(1.0, b.head + b.tail);
        return b;
    }

    SecondMomentBlockBound second_moment_block_bound(const SupWalkSpec &spec, double u, double n, double divisor)
    {
        if (!(n > 0.0) || !(divisor > 0.0))
            throw ValidationError("scale n and divisor must be positive");
        const auto count = static_cast<std::size_t>(std::max(1.0, std::floor(n * u)));
        return second_moment_block_core(spec, std::sqrt(n) * u / divisor, count);
    }

    WalkTailEstimate block_event_mc(const SupWalkSpec &spec, std::size_t count, double threshold,
                                    std::size_t replications, std::uint64_t seed, bool equilibrium_first)
    {
        if (count == 0 || replications == 0)
            throw ValidationError("block event needs count >= 1 and replications >= 1");
        const double first_mean = first_mean_for(spec, equilibrium_first);
        std::size_t hits = 0;
        for (std::size_t r = 0; r < replications; ++r)
        {
            PathRun run{Walker(spec, 0.0, first_mean, equilibrium_first, derive_seed(seed, r, 1, StreamRole::walk))};
            advance(run, count, threshold);
            if (run.sup >= threshold)
                ++hits;
        }
        auto e = make_estimate(hits, replications, threshold);
        e.truncation = count;
        return e;
    }

    std::string to_string(LemmaTerm term)
    {
        switch (term)
        {
        case LemmaTerm::eq37: return "eq37";
        case LemmaTerm::eq41: return "eq41";
        case LemmaTerm::eq3: return "eq3";
        }
        return "unknown";
    }

    LemmaTerm lemma_term_from_string(const std::string &name)
    {
        if (name == "eq37")
            return LemmaTerm::eq37;
        if (name == "eq41")
            return LemmaTerm::eq41;
        if (name == "eq3")
            return LemmaTerm::eq3;
        throw ValidationError("unknown lemma term '" + name + "' (expected eq37, eq41 or eq3)");
    }

    std::vector<SupWalkSpec> lemma_walks(const NetworkSpec &network, const DriftReport &drift, int k, int l,
                                         LemmaTerm which)
    {
        const int stations = drift.size();
        if (k < 0 || k >= stations || l < 0 || l >= stations || network.size() != stations)
            throw ValidationError("station index out of range");
        const double nu = drift.nu[k];
        if (!(nu > 0.0))
            throw ValidationError("lemma bounds need nu_k > 0 at station " + std::to_string(k + 1));
        const double big_k = static_cast<double>(stations);

        std::vector<SupWalkSpec> walks;
        if (which == LemmaTerm::eq37)
        {
            const double lambda = drift.lambda[k];
            const auto &arrival = network.stations[static_cast<std::size_t>(k)].arrival;
            if (!arrival || lambda <= 0.0)
                return walks;
            SupWalkSpec w;
            w.kind = WalkKind::scaled_centered_interarrival;
            w.gap = *arrival;
            w.coefficient = -(lambda + nu / 4.0);
            w.drift = nu / (4.0 * lambda);
            w.offset = -1.0 + (lambda + nu / 4.0) * w.first_mean();
            walks.push_back(w);
            return walks;
        }

        const double mu = drift.mu[l];
        const auto &service = network.stations[static_cast<std::size_t>(l)].service;
        const double share = nu / (4.0 * big_k);
        SupWalkSpec base;
        base.gap = service;
        base.drift = share / mu;
        if (which == LemmaTerm::eq41)
        {
            base.kind = WalkKind::routing_plus_service;
            base.routing_probability = drift.routing(l, k);
            base.coefficient = -share;
            base.offset = share * base.first_mean();
            walks.push_back(base);
            return walks;
        }

        base.kind = WalkKind::scaled_centered_service;
        SupWalkSpec lower = base;
        lower.coefficient = -(mu + share);
        lower.offset = -1.0 + (mu + share) * lower.first_mean();
        SupWalkSpec upper = base;
        upper.coefficient = mu - share;
        upper.offset = -(mu - share) * upper.first_mean();
        walks.push_back(lower);
        walks.push_back(upper);
        return walks;
    }

    LemmaEstimate lemma_rhs(const NetworkSpec &network, const DriftReport &drift, int k, int l, LemmaTerm which,
                            double u, const McOptions &mc)
    {
        LemmaEstimate out;
        out.which = which;
        out.u = u;
        out.walks = lemma_walks(network, drift, k, l, which);
        if (out.walks.empty())
        {
            out.lundberg_bound = 0.0;
            return out;
        }
        double var = 0.0;
        std::optional<double> lundberg = 0.0;
        for (std::size_t b = 0; b < out.walks.size(); ++b)
        {
            McOptions branch = mc;
            branch.seed = derive_seed(mc.seed, b, static_cast<std::uint64_t>(which), StreamRole::walk);
            const auto e = supwalk_tail_mc(out.walks[b], u, branch);
            out.branches.push_back(e);
            out.estimate += e.p_hat;
            out.ci_low += e.ci_low;
            out.ci_high += e.ci_high;
            var += e.se * e.se;
            if (lundberg)
            {
                try
                {
                    const auto lb = lundberg_tail_bound(out.walks[b], u);
                    lundberg = lb ? std::optional<double>(*lundberg + *lb) : std::nullopt;
                }
                catch (const CapabilityError &)
                {
                    lundberg = std::nullopt;
                }
            }
        }
        out.se = std::sqrt(var);
        out.lundberg_bound = lundberg;
        return out;
    }

    std::string bound_csv_header()
    {
        return "which,u,mc_estimate,ci_low,ci_high,lundberg_bound,dyadic_bound,second_moment_bound";
    }

    std::string to_csv(const BoundRow &row)
    {
        const auto opt = [](const std::optional<double> &v) { return v ? format_double(*v) : std::string(); };
        return row.which + "," + format_double(row.u) + "," + format_double(row.mc_estimate) + "," +
               format_double(row.ci_low) + "," + format_double(row.ci_high) + "," + opt(row.lundberg_bound) + "," +
               opt(row.dyadic_bound) + "," + opt(row.second_moment_bound);
    }
} // namespace gjn
