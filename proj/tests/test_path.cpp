#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gjn/errors.hpp"
#include "gjn/path.hpp"
#include "gjn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace gjn;

namespace
{
    Path random_path(Xoshiro256 &rng, int n)
    {
        Path p;
        double t = 0.0, v = 0.0;
        for (int i = 0; i < n; ++i)
        {
            const double slope = rng.uniform01() < 0.5 ? 0.0 : 2.0 * rng.uniform01() - 1.0;
            p.append(t, v, slope);
            const double dt = 0.1 + rng.uniform01();
            v += slope * dt + (rng.uniform01() < 0.5 ? std::round(4.0 * rng.uniform01() - 2.0) : 0.0);
            t += dt;
        }
        return p;
    }
} // namespace

TEST_CASE("right-continuous evaluation with left limits")
{
    Path p;
    p.append(0.0, 0.0, 1.0);
    p.append(2.0, 5.0, 0.0);
    CHECK(p.at(1.0) == doctest::Approx(1.0));
    CHECK(p.at(2.0) == doctest::Approx(5.0));
    CHECK(p.left_at(2.0) == doctest::Approx(2.0));
    CHECK(p.left_limit(1) == doctest::Approx(2.0));
    CHECK(p.left_limit(0) == doctest::Approx(0.0));
    CHECK(p.at(10.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(p.at(-1.0), ValidationError);
}

TEST_CASE("equal times overwrite and decreasing times fail")
{
    Path p;
    p.append(0.0, 1.0);
    p.append(1.0, 2.0);
    p.append(1.0, 3.0);
    CHECK(p.size() == 2);
    CHECK(p.at(1.0) == 3.0);
    CHECK(p.left_at(1.0) == 1.0);
    CHECK_THROWS_AS(p.append(0.5, 0.0), ValidationError);
}

TEST_CASE("interval extrema include left limits")
{
    Path p;
    p.append(0.0, 0.0, 1.0);
    p.append(3.0, -1.0, 0.0);
    CHECK(p.sup_on(0.0, 5.0) == doctest::Approx(3.0));
    CHECK(p.inf_on(0.0, 5.0) == doctest::Approx(-1.0));
    CHECK(p.sup_on(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(p.sup_on(4.0, 5.0) == doctest::Approx(-1.0));
}

TEST_CASE("extrema agree with dense sampling")
{
    Xoshiro256 rng(3);
    for (int trial = 0; trial < 50; ++trial)
    {
        const auto p = random_path(rng, 30);
        const double a = p.time(3) + 0.05, b = p.time(20) + 0.05;
        double hi = -std::numeric_limits<double>::infinity(), lo = -hi;
        for (int i = 0; i <= 200000; ++i)
        {
            const double t = a + (b - a) * i / 200000.0;
            hi = std::max(hi, p.at(t));
            lo = std::min(lo, p.at(t));
        }
        CHECK(p.sup_on(a, b) >= hi - 1e-12);
        CHECK(p.inf_on(a, b) <= lo + 1e-12);
        CHECK(p.sup_on(a, b) - hi < 1e-3);
        CHECK(lo - p.inf_on(a, b) < 1e-3);
    }
}

TEST_CASE("resampling keeps values and arithmetic needs equal grids")
{
    Path p;
    p.append(0.0, 1.0, 2.0);
    p.append(2.0, 0.0, 0.0);
    const std::vector<double> grid{0.0, 0.5, 2.0, 3.0};
    const auto r = p.resampled(grid);
    CHECK(r.size() == 4);
    for (double t : {0.0, 0.25, 0.5, 1.7, 2.0, 2.5, 3.0})
        CHECK(r.at(t) == doctest::Approx(p.at(t)));
    CHECK(r.left_at(2.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(p + r, ValidationError);
    const auto s = r + r;
    CHECK(s.at(1.0) == doctest::Approx(2.0 * p.at(1.0)));
    const auto d = r - r;
    CHECK(d.at(1.0) == doctest::Approx(0.0));
    const auto m = 3.0 * r;
    CHECK(m.at(1.0) == doctest::Approx(3.0 * p.at(1.0)));
    const auto l = r.plus_linear(-1.0);
    CHECK(l.at(1.0) == doctest::Approx(p.at(1.0) - 1.0));
}

TEST_CASE("step path construction")
{
    const std::vector<double> t{0, 1, 2}, v{0, 1, -1};
    const auto p = step_path(t, v);
    CHECK(p.at(1.5) == 1.0);
    CHECK(p.left_at(2.0) == 1.0);
}

TEST_CASE("drawup with drift matches brute force over breakpoints and left limits")
{
    Xoshiro256 rng(8);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto p = random_path(rng, 25);
        const double c = 0.3 * rng.uniform01();
        const auto got = drawup_with_drift(p, c);
        REQUIRE(got.size() == p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
        {
            const double ti = p.time(i);
            double best = 0.0;
            for (std::size_t j = 0; j <= i; ++j)
            {
                const double sj = p.time(j);
                best = std::max(best, p.value(i) - p.value(j) - c * (ti - sj));
                if (j > 0)
                    best = std::max(best, p.value(i) - p.left_limit(j) - c * (ti - sj));
            }
            CHECK(got[i] == doctest::Approx(best).epsilon(1e-12).scale(1.0));
        }
    }
}
