#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gjn/errors.hpp"
#include "gjn/reflection.hpp"
#include "gjn/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace gjn;

namespace
{
    Path random_step_path(Xoshiro256 &rng, int n, std::vector<double> *times_out = nullptr)
    {
        std::vector<double> t, v;
        double time = 0.0, value = 4.0 * rng.uniform01() - 2.0;
        for (int i = 0; i < n; ++i)
        {
            t.push_back(time);
            v.push_back(value);
            time += 0.05 + rng.uniform01();
            value += 2.0 * rng.uniform01() - 1.05;
        }
        if (times_out)
            *times_out = t;
        return step_path(t, v);
    }

    NetworkSpec one_station(std::optional<DistributionSpec> arrival, DistributionSpec service, std::int64_t q0 = 0)
    {
        NetworkSpec s;
        s.stations.push_back({std::move(arrival), std::move(service), q0});
        s.routing = RoutingMatrix::zero(1);
        return s;
    }

    NetworkSpec feedback_network()
    {
        NetworkSpec s;
        s.stations.push_back({DistributionSpec::exponential(0.3), DistributionSpec::gamma(2.0, 0.25), 0});
        s.stations.push_back({DistributionSpec::uniform(5.0, 15.0), DistributionSpec::exponential(2.0), 1});
        s.stations.push_back({std::nullopt, DistributionSpec::deterministic(0.5), 0});
        Eigen::MatrixXd p(3, 3);
        p << 0.0, 0.5, 0.2, 0.0, 0.0, 0.6, 0.1, 0.0, 0.0;
        s.routing = RoutingMatrix(p);
        return s;
    }

    SimulationOptions horizon(double t)
    {
        SimulationOptions o;
        o.horizon = t;
        return o;
    }
} // namespace

TEST_CASE("reflection of a nonnegative nondecreasing path is the path")
{
    const std::vector<double> t{0, 1, 2, 3}, v{0.5, 0.5, 1.0, 4.0};
    const auto r = skorohod_reflect(step_path(t, v));
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(r.at(t[i]) == doctest::Approx(v[i]));
}

TEST_CASE("reflection of a step down below zero")
{
    const std::vector<double> t{0, 1, 2}, v{0, 1, -1};
    const auto r = skorohod_reflect(step_path(t, v));
    CHECK(r.at(0.0) == 0.0);
    CHECK(r.at(1.0) == 1.0);
    CHECK(r.at(2.0) == 0.0);
}

TEST_CASE("reflection of a falling line is zero")
{
    Path x;
    x.append(0.0, 0.0, -0.7);
    x.append(10.0, -7.0, -0.7);
    const auto r = skorohod_reflect(x);
    for (double t : {0.0, 1.0, 5.5, 10.0})
        CHECK(r.at(t) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(skorohod_reflect(Path{}).empty());
}

TEST_CASE("reflection of a line that crosses zero gets a breakpoint at the crossing")
{
    Path x;
    x.append(0.0, 2.0, -1.0);
    x.append(4.0, -2.0, 0.0);
    const auto r = skorohod_reflect(x);
    CHECK(r.at(1.0) == doctest::Approx(1.0));
    CHECK(r.at(2.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(r.at(3.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(r.at(4.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("reflection properties on random step paths")
{
    Xoshiro256 rng(2718);
    for (int trial = 0; trial < 1000; ++trial)
    {
        std::vector<double> times;
        const auto x = random_step_path(rng, 40, &times);
        const auto r = skorohod_reflect(x);
        double prev_reg = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
        {
            const double psi = r.at(times[i]);
            CHECK(psi >= -1e-12);
            const double reg = psi - x.at(times[i]);
            CHECK(reg >= prev_reg - 1e-12);
            if (reg > prev_reg + 1e-12)
                CHECK(psi == doctest::Approx(0.0).scale(1.0));
            prev_reg = reg;
        }
        // Identity on its own range.
        const auto rr = skorohod_reflect(r);
        for (double t : times)
            CHECK(rr.at(t) == doctest::Approx(r.at(t)).scale(1.0));

        // Lipschitz constant two in the sup norm.
        std::vector<double> v2;
        for (double t : times)
            v2.push_back(x.at(t) + (2.0 * rng.uniform01() - 1.0));
        const auto y = step_path(times, v2);
        const auto ry = skorohod_reflect(y);
        double dx = 0.0, dpsi = 0.0;
        for (double t : times)
        {
            dx = std::max(dx, std::abs(x.at(t) - y.at(t)));
            dpsi = std::max(dpsi, std::abs(r.at(t) - ry.at(t)));
        }
        CHECK(dpsi <= 2.0 * dx + 1e-12);
    }
}

TEST_CASE("majorants of an empty network")
{
    // No arrivals anywhere: validate() rejects this, so build the drift report directly.
    const auto spec = one_station(std::nullopt, DistributionSpec::exponential(1.0));
    const auto drift = solve_traffic(spec);
    const auto tr = simulate(spec, horizon(10.0), 1);
    const auto b = build_majorants(tr, drift, 0);
    CHECK(b.ok());
    for (std::size_t i = 0; i < b.times.size(); ++i)
    {
        CHECK(b.drifted.value(i) == doctest::Approx(-drift.nu[0] * b.times[i]));
        CHECK(b.reflected.at(b.times[i]) == doctest::Approx(0.0).scale(1.0));
        CHECK(b.queue.value(i) == 0.0);
    }
}

TEST_CASE("majorants of the pure drain")
{
    const auto spec = one_station(std::nullopt, DistributionSpec::deterministic(1.0), 3);
    const auto drift = solve_traffic(spec);
    const auto tr = simulate(spec, horizon(6.0), 1);
    const auto b = build_majorants(tr, drift, 0);
    CHECK(b.ok());
    // Hand computation: D̄(t) = D(t) - B(t) is 0 at integers up to 3, so Q̄ = 3 there and
    // Q̃(t) = 3 - t; Q̂ = 3 - t + (inf-part) stays at or above Q.
    for (double t : {0.0, 1.0, 2.0, 3.0})
        CHECK(b.centered.at(t) == doctest::Approx(3.0));
    for (std::size_t i = 0; i < b.times.size(); ++i)
        CHECK(b.reflected.at(b.times[i]) >= b.queue.value(i) - 1e-9);
}

TEST_CASE("drift condition is required")
{
    NetworkSpec s;
    s.stations.push_back({DistributionSpec::exponential(0.5), DistributionSpec::exponential(1.0), 0});
    s.stations.push_back({std::nullopt, DistributionSpec::exponential(1.0), 0});
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
    p(0, 1) = 1.0;
    s.routing = RoutingMatrix(p);
    const auto drift = solve_traffic(s);
    const auto tr = simulate(s, horizon(10.0), 1);
    CHECK_NOTHROW(build_majorants(tr, drift, 0));
    CHECK_THROWS_AS(build_majorants(tr, drift, 1), ValidationError);
}

TEST_CASE("M/M/1 paths with ten thousand events satisfy both inequalities")
{
    const auto spec = one_station(DistributionSpec::exponential(0.5), DistributionSpec::exponential(1.0), 2);
    const auto drift = solve_traffic(spec);
    for (std::uint64_t r = 0; r < 5; ++r)
    {
        SimulationOptions o = horizon(1e9);
        o.stop_after_events = 10000;
        const auto tr = simulate(spec, o, 21, r);
        const auto b = build_majorants(tr, drift, 0);
        CHECK(b.majorization_violations == 0);
        CHECK(b.decomposition_violations == 0);
    }
}

TEST_CASE("feedback network: identity for the queue and the breve path")
{
    const auto spec = feedback_network();
    const auto drift = solve_traffic(spec);
    REQUIRE(drift.strong_drift);
    for (std::uint64_t r = 0; r < 5; ++r)
    {
        const auto tr = simulate(spec, horizon(300.0), 5, r);
        for (int k = 0; k < 3; ++k)
        {
            const auto b = build_majorants(tr, drift, k);
            CHECK(b.ok());
            // Q = Q̄ - νt - Σ_l p_lk μ_l (t - B_l) + μ_k (t - B_k).
            for (std::size_t i = 0; i < b.times.size(); ++i)
            {
                const double t = b.times[i];
                double feed = 0.0;
                for (int l = 0; l < 3; ++l)
                    feed += drift.routing(l, k) * drift.mu[l] * (t - tr.busy_time(l, t));
                const double identity = b.centered.value(i) - drift.nu[k] * t - feed +
                                        drift.mu[k] * (t - tr.busy_time(k, t));
                CHECK(identity == doctest::Approx(static_cast<double>(tr.queue_at(k, t))).scale(1.0));
            }
            // The breve path Q̆ = Q̃ - Σ_l p_lk μ_l (t - B_l) reflects exactly to Q.
            Path clock;
            for (double t : b.times)
                clock.append(t, t, 1.0);
            Path breve = b.drifted;
            for (int l = 0; l < 3; ++l)
            {
                const double w = drift.routing(l, k) * drift.mu[l];
                if (w != 0.0)
                    breve = breve - w * (clock - tr.stations[l].busy.resampled(b.times));
            }
            const auto reflected = skorohod_reflect(breve);
            for (double t : b.times)
                CHECK(reflected.at(t) == doctest::Approx(static_cast<double>(tr.queue_at(k, t))).scale(1.0));
        }
    }
}

TEST_CASE("direct Y evaluation agrees with the bundle")
{
    const auto spec = feedback_network();
    const auto drift = solve_traffic(spec);
    const auto tr = simulate(spec, horizon(100.0), 8);
    for (int k = 0; k < 3; ++k)
    {
        const auto b = build_majorants(tr, drift, k);
        const auto y0 = y_components(tr, drift, k, 0.0);
        CHECK(y0.y1 == 0.0);
        CHECK(y0.y2_sum() == 0.0);
        CHECK(y0.y3_sum() == 0.0);
        for (std::size_t i = 0; i < b.times.size(); i += std::max<std::size_t>(1, b.times.size() / 40))
        {
            const auto y = y_components(tr, drift, k, b.times[i]);
            CHECK(y.y1 == doctest::Approx(b.y1[i]).epsilon(1e-9).scale(1.0));
            CHECK(y.y2_sum() == doctest::Approx(b.y2_sum[i]).epsilon(1e-9).scale(1.0));
            CHECK(y.y3_sum() == doctest::Approx(b.y3_sum[i]).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("no-arrival station has Y1 identically zero")
{
    const auto spec = feedback_network();
    const auto drift = solve_traffic(spec);
    const auto tr = simulate(spec, horizon(100.0), 2);
    const auto b = build_majorants(tr, drift, 2);
    for (double v : b.y1)
        CHECK(v == 0.0);
}

TEST_CASE("decomposition holds at random times on M/M/1 paths")
{
    const auto spec = one_station(DistributionSpec::exponential(0.5), DistributionSpec::exponential(1.0), 1);
    const auto drift = solve_traffic(spec);
    Xoshiro256 rng(4);
    const auto tr = simulate(spec, horizon(500.0), 4);
    for (int i = 0; i < 100; ++i)
    {
        const double t = 500.0 * rng.uniform01();
        const auto y = y_components(tr, drift, 0, t);
        const double slack = std::max(0.0, 1.0 - drift.nu[0] * t / 4.0);
        CHECK(y.y1 + y.y2_sum() + y.y3_sum() + slack >= static_cast<double>(tr.queue_at(0, t)) - 1e-9);
    }
}
