#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gjn/errors.hpp"
#include "gjn/primitives.hpp"

#include <cmath>
#include <vector>

using namespace gjn;

TEST_CASE("deterministic ordinary stream")
{
    RenewalStream s(DistributionSpec::deterministic(1.0), DelayMode::ordinary(), 1);
    for (int i = 1; i <= 5; ++i)
        CHECK(s.next_epoch() == doctest::Approx(i));
    CHECK(s.count() == 5);
}

TEST_CASE("fixed delay shifts the first epoch")
{
    RenewalStream s(DistributionSpec::deterministic(1.0), DelayMode::fixed(0.5), 1);
    for (int i = 0; i < 5; ++i)
        CHECK(s.next_epoch() == doctest::Approx(0.5 + i));
    CHECK_THROWS_AS(RenewalStream(DistributionSpec::deterministic(1.0), DelayMode::fixed(-1.0), 1), ValidationError);
}

TEST_CASE("streams are reproducible and strictly increasing")
{
    RenewalStream a(DistributionSpec::exponential(1.0), DelayMode::equilibrium(), 9);
    RenewalStream b(DistributionSpec::exponential(1.0), DelayMode::equilibrium(), 9);
    double last = -1.0;
    for (int i = 0; i < 1000; ++i)
    {
        const double x = a.next_epoch();
        CHECK(x == b.next_epoch());
        CHECK(x > last);
        last = x;
    }
}

TEST_CASE("gaps after the first have the generic mean")
{
    const auto d = DistributionSpec::gamma(3.0, 0.5);
    RenewalStream s(d, DelayMode::equilibrium(), 4);
    const int n = 1'000'000;
    double prev = s.next_epoch();
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double x = s.next_epoch();
        sum += x - prev;
        prev = x;
    }
    CHECK(std::abs(sum / n - d.mean()) < 4.0 * std::sqrt(d.variance().value() / n));
}

TEST_CASE("equilibrium first epoch has mean E X^2 / (2 E X)")
{
    const auto d = DistributionSpec::uniform(0.0, 2.0);
    const int n = 200'000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i)
    {
        RenewalStream r(d, DelayMode::equilibrium(), derive_seed(3, i));
        const double x = r.next_epoch();
        s += x;
        s2 += x * x;
    }
    const double m = s / n;
    CHECK(std::abs(m - d.equilibrium_mean().value()) < 4.0 * std::sqrt((s2 / n - m * m) / n));
}

TEST_CASE("equilibrium delay samples")
{
    // Memoryless law: the equilibrium draw is the exponential quantile of the same uniform.
    const auto e = DistributionSpec::exponential(2.0);
    Xoshiro256 rng(11);
    CHECK(equilibrium_delay_sample(e, 11) == doctest::Approx(e.quantile(rng.uniform_open())));

    const int n = 1'000'000;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        s += equilibrium_delay_sample(DistributionSpec::deterministic(1.0), derive_seed(8, i));
    CHECK(std::abs(s / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("routing tallies")
{
    const std::vector<double> all_exit{0.0, 0.0};
    RoutingSequence exit_only(all_exit, 1);
    const auto t0 = exit_only.route(0);
    CHECK(t0.total() == 0);
    CHECK(t0.to_station == std::vector<std::int64_t>{0, 0});
    const auto t = exit_only.route(50);
    CHECK(t.exits == 50);
    CHECK(t.to_station == std::vector<std::int64_t>{0, 0});

    const std::vector<double> to_first{1.0, 0.0};
    RoutingSequence fixed(to_first, 2);
    CHECK(fixed.route(37).to_station[0] == 37);
}

TEST_CASE("routing counts are nondecreasing and sum to m")
{
    const std::vector<double> row{0.2, 0.3, 0.1};
    RoutingSequence seq(row, 5);
    RoutingTally prev = seq.route(0);
    for (std::int64_t m = 1; m <= 300; ++m)
    {
        const auto cur = seq.route(m);
        CHECK(cur.total() == m);
        CHECK(cur.exits >= prev.exits);
        for (std::size_t l = 0; l < row.size(); ++l)
            CHECK(cur.to_station[l] >= prev.to_station[l]);
        prev = cur;
    }
}

TEST_CASE("streamed decisions agree with replayed tallies")
{
    const std::vector<double> row{0.25, 0.25};
    RoutingSequence seq(row, 17);
    RoutingTally manual{0, {0, 0}};
    for (int i = 0; i < 1000; ++i)
    {
        const int d = seq.next();
        if (d == RoutingSequence::kExit)
            ++manual.exits;
        else
            ++manual.to_station[static_cast<std::size_t>(d)];
    }
    const auto replay = seq.route(1000);
    CHECK(replay.exits == manual.exits);
    CHECK(replay.to_station == manual.to_station);
}

TEST_CASE("routing frequencies converge to the row")
{
    const std::vector<double> row{0.2, 0.5};
    RoutingSequence seq(row, 123);
    const std::int64_t n = 1'000'000;
    const auto t = seq.route(n);
    for (std::size_t l = 0; l < row.size(); ++l)
    {
        const double f = static_cast<double>(t.to_station[l]) / n;
        CHECK(std::abs(f - row[l]) < 4.0 * std::sqrt(row[l] * (1 - row[l]) / n));
    }
    const double fe = static_cast<double>(t.exits) / n;
    CHECK(std::abs(fe - 0.3) < 4.0 * std::sqrt(0.21 / n));
}

TEST_CASE("centering")
{
    std::vector<double> times{0, 1, 2, 3, 4}, values{0, 1, 2, 3, 4};
    const auto c = center(step_path(times, values), 1.0);
    for (int i = 0; i <= 4; ++i)
        CHECK(c.at(i) == doctest::Approx(0.0));
    CHECK(c.left_at(2.0) == doctest::Approx(-1.0));

    Path zero;
    zero.append(0.0, 0.0);
    zero.append(5.0, 0.0);
    const auto z = center(zero, 0.7);
    CHECK(z.at(3.0) == doctest::Approx(-2.1));

    const std::vector<std::int64_t> cum{0, 1, 1, 2};
    const auto bar = center_tally(cum, 0.5);
    CHECK(bar == std::vector<double>{0.0, 0.5, 0.0, 0.5});
}

TEST_CASE("centered arrival process has no drift over a long horizon")
{
    const auto d = DistributionSpec::exponential(1.3);
    RenewalStream s(d, DelayMode::equilibrium(), 31);
    const double horizon = 1e5;
    std::int64_t count = 0;
    while (s.next_epoch() <= horizon)
        ++count;
    const double centered = static_cast<double>(count) - 1.3 * horizon;
    // Poisson count: variance λT.
    CHECK(std::abs(centered) < 4.0 * std::sqrt(1.3 * horizon));
    CHECK(std::abs(centered) / horizon < 0.01);
}
