#include "gjn/reflection.hpp"

#include "gjn/errors.hpp"
#include "gjn/primitives.hpp"

#include <algorithm>
#include <numeric>

namespace gjn
{
    Path skorohod_reflect(const Path &x)
    {
        Path out;
        double floor = 0.0; // min(inf_{s<=t} x(s), 0)
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            const double t = x.time(i);
            const double v = x.value(i);
            if (i > 0)
                floor = std::min(floor, x.left_limit(i));
            floor = std::min(floor, v);
            const double s = x.slope(i);
            const double height = v - floor;
            const bool last = i + 1 == x.size();

            if (s >= 0.0)
            {
                out.append(t, height, s);
            }
            else if (height <= 0.0)
            {
                out.append(t, 0.0, 0.0);
            }
            else
            {
                out.append(t, height, s);
                const double hit = t + height / (-s);
                if (!last && hit < x.time(i + 1))
                    out.append(hit, 0.0, 0.0);
            }
        }
        return out;
    }

    double YComponents::y2_sum() const { return std::accumulate(y2.begin(), y2.end(), 0.0); }
    double YComponents::y3_sum() const { return std::accumulate(y3.begin(), y3.end(), 0.0); }

    namespace
    {
        void require_drift(const DriftReport &drift, int k)
        {
            if (k < 0 || k >= drift.size())
                throw ValidationError("station index out of range");
            if (!(drift.nu(k) > 0.0))
                throw ValidationError("drift nu_k <= 0 at station " + std::to_string(k + 1) +
                                      ": majorization bounds need nu_k > 0");
        }

        Path constant_on(std::span<const double> grid, double value)
        {
            Path out;
            for (double t : grid)
                out.append(t, value, 0.0);
            return out;
        }

        // sup over s in [0, t] of (h(t) - h(s) - c (t - s)), enumerating breakpoints and left limits.
        double direct_drawup(const Path &h, double c, double t)
        {
            const double ht = h.at(t);
            double best = 0.0; // s = t
            for (std::size_t i = 0; i < h.size() && h.time(i) <= t; ++i)
            {
                const double s = h.time(i);
                best = std::max(best, ht - h.value(i) - c * (t - s));
                best = std::max(best, ht - h.left_limit(i) - c * (t - s));
            }
            return best;
        }

        Path negated(Path p) { return (-1.0) * std::move(p); }
    } // namespace

    MajorantBundle build_majorants(const Trajectory &traj, const DriftReport &drift, int k, double tolerance)
    {
        require_drift(drift, k);
        const int kk = drift.size();
        if (traj.size() != kk)
            throw ValidationError("trajectory and drift report disagree on station count");

        MajorantBundle b;
        b.station = k;
        b.nu = drift.nu(k);
        b.times = traj.grid();
        const std::span<const double> grid(b.times);

        b.queue = traj.stations[k].queue.resampled(grid);
        const Path arrivals_centered = center(traj.stations[k].arrivals.resampled(grid), drift.lambda(k));

        std::vector<Path> departures(kk);
        b.departures_centered.resize(kk);
        for (int l = 0; l < kk; ++l)
        {
            departures[l] = traj.stations[l].departures.resampled(grid);
            const Path busy = traj.stations[l].busy.resampled(grid);
            b.departures_centered[l] = departures[l] - drift.mu(l) * busy;
        }

        std::vector<Path> routing_centered(kk);
        Path centered = constant_on(grid, static_cast<double>(traj.initial_queue[k])) + arrivals_centered;
        for (int l = 0; l < kk; ++l)
        {
            const double p = drift.routing(l, k);
            routing_centered[l] = traj.routed(l, k).resampled(grid) - p * departures[l];
            centered += routing_centered[l];
            centered += p * b.departures_centered[l];
        }
        centered = centered - b.departures_centered[k];
        b.centered = std::move(centered);
        b.drifted = b.centered.plus_linear(-b.nu);
        b.reflected = skorohod_reflect(b.drifted);

        const double c1 = b.nu / 4.0;
        const double cl = b.nu / (4.0 * kk);
        b.y1 = drawup_with_drift(arrivals_centered, c1);
        b.y2.resize(kk);
        b.y3.resize(kk);
        const std::size_t n = b.times.size();
        b.y2_sum.assign(n, 0.0);
        b.y3_sum.assign(n, 0.0);
        for (int l = 0; l < kk; ++l)
        {
            b.y2[l] = drawup_with_drift(routing_centered[l], cl);
            const auto up = drawup_with_drift(b.departures_centered[l], cl);
            const auto down = drawup_with_drift(negated(b.departures_centered[l]), cl);
            b.y3[l].resize(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                b.y3[l][i] = std::max(up[i], down[i]);
                b.y2_sum[i] += b.y2[l][i];
                b.y3_sum[i] += b.y3[l][i];
            }
        }

        b.initial_slack.resize(n);
        const double q0 = static_cast<double>(traj.initial_queue[k]);
        for (std::size_t i = 0; i < n; ++i)
        {
            const double t = b.times[i];
            b.initial_slack[i] = std::max(0.0, q0 - b.nu * t / 4.0);
            const double q = b.queue.value(i);
            if (q > b.reflected.at(t) + tolerance || b.queue.left_limit(i) > b.reflected.left_at(t) + tolerance)
                ++b.majorization_violations;
            if (q > b.decomposition_rhs(i) + tolerance)
                ++b.decomposition_violations;
        }
        return b;
    }

    YComponents y_components(const Trajectory &traj, const DriftReport &drift, int k, double t)
    {
        require_drift(drift, k);
        if (!(t >= 0.0 && t <= traj.horizon))
            throw ValidationError("time outside [0, horizon]");
        const int kk = drift.size();
        const double nu = drift.nu(k);
        const double cl = nu / (4.0 * kk);

        YComponents y;
        y.y1 = direct_drawup(center(traj.stations[k].arrivals, drift.lambda(k)), nu / 4.0, t);
        y.y2.resize(kk);
        y.y3.resize(kk);
        for (int l = 0; l < kk; ++l)
        {
            const auto &st = traj.stations[l];
            const double p = drift.routing(l, k);

            // Φ̄_lk(D_l(s)) changes only at departures of l.
            Path routed_centered;
            routed_centered.append(0.0, 0.0);
            double routed = 0.0;
            for (std::size_t i = 0; i < st.departure_epochs.size(); ++i)
            {
                if (st.destinations[i] == k)
                    routed += 1.0;
                routed_centered.append(st.departure_epochs[i], routed - p * static_cast<double>(i + 1));
            }
            y.y2[l] = direct_drawup(routed_centered, cl, t);

            // D̄_l = D_l - μ_l B_l has breakpoints at departures and busy/idle switches.
            std::vector<double> times;
            for (double s : st.departures.times())
                times.push_back(s);
            for (double s : st.busy.times())
                times.push_back(s);
            std::sort(times.begin(), times.end());
            times.erase(std::unique(times.begin(), times.end()), times.end());
            const Path dbar = st.departures.resampled(times) - drift.mu(l) * st.busy.resampled(times);
            y.y3[l] = std::max(direct_drawup(dbar, cl, t), direct_drawup(negated(dbar), cl, t));
        }
        return y;
    }
} // namespace gjn
