#include "gjn/simulator.hpp"

#include "gjn/errors.hpp"
#include "gjn/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <tuple>

namespace gjn
{
    const char *to_string(EventKind kind)
    {
        switch (kind)
        {
        case EventKind::external: return "external";
        case EventKind::arrival: return "arrival";
        case EventKind::departure: return "departure";
        }
        return "unknown";
    }

    namespace
    {
        enum class Priority : int
        {
            departure = 0,
            external = 1,
        };

        struct Pending
        {
            double time;
            Priority priority;
            int station;

            auto key() const { return std::tuple(time, static_cast<int>(priority), station); }
            bool operator>(const Pending &o) const { return key() > o.key(); }
        };

        class Engine
        {
        public:
            Engine(const NetworkSpec &spec, const SimulationOptions &options, std::uint64_t master,
                   std::uint64_t replicate)
                : spec_(spec), opt_(options), k_(spec.size())
            {
                traj_.recorded = options.record;
                traj_.horizon = options.horizon;
                traj_.initial_queue.resize(k_);
                traj_.stations.resize(k_);
                queue_.resize(k_);
                arrivals_.assign(k_, 0);
                departures_.assign(k_, 0);
                busy_.assign(k_, false);
                busy_value_.assign(k_, 0.0);
                busy_since_.assign(k_, 0.0);

                for (int k = 0; k < k_; ++k)
                {
                    const auto &st = spec.stations[k];
                    if (st.arrival)
                    {
                        arrival_streams_.emplace_back(std::in_place, *st.arrival, options.arrival_delay,
                                                      derive_seed(master, replicate, k, StreamRole::arrival));
                    }
                    else
                    {
                        arrival_streams_.emplace_back(std::nullopt);
                    }
                    service_rngs_.emplace_back(derive_seed(master, replicate, k, StreamRole::service));
                    std::vector<double> probs(k_);
                    for (int l = 0; l < k_; ++l)
                        probs[l] = spec.routing(k, l);
                    routers_.emplace_back(probs, derive_seed(master, replicate, k, StreamRole::routing));
                }
            }

            Trajectory run()
            {
                for (int k = 0; k < k_; ++k)
                {
                    queue_[k] = spec_.stations[k].initial_queue;
                    traj_.initial_queue[k] = queue_[k];
                    record_counts(k, 0.0);
                    record_busy(k, 0.0);
                    if (queue_[k] > 0)
                        start_service(k, 0.0, true);
                    if (arrival_streams_[k])
                        heap_.push({arrival_streams_[k]->next_epoch(), Priority::external, k});
                }

                std::size_t processed = 0;
                double last_time = 0.0;
                double horizon = opt_.horizon;
                while (!heap_.empty())
                {
                    const Pending next = heap_.top();
                    if (next.time > horizon)
                        break;
                    if (opt_.stop_after_events && processed >= *opt_.stop_after_events && next.time > last_time)
                    {
                        horizon = last_time;
                        break;
                    }
                    heap_.pop();
                    if (++processed > opt_.event_cap)
                        throw ResourceError("event cap of " + std::to_string(opt_.event_cap) + " exceeded");
                    last_time = next.time;
                    if (next.priority == Priority::departure)
                        depart(next.station, next.time);
                    else
                        arrive_external(next.station, next.time);
                }

                traj_.horizon = horizon;
                traj_.event_count = processed;
                traj_.final_queue = queue_;
                if (opt_.record)
                {
                    for (int k = 0; k < k_; ++k)
                    {
                        record_counts(k, horizon);
                        record_busy(k, horizon);
                    }
                }
                return std::move(traj_);
            }

        private:
            double busy_at(int k, double t) const
            {
                return busy_value_[k] + (busy_[k] ? t - busy_since_[k] : 0.0);
            }

            void record_counts(int k, double t)
            {
                if (!opt_.record)
                    return;
                auto &st = traj_.stations[k];
                st.arrivals.append(t, static_cast<double>(arrivals_[k]));
                st.departures.append(t, static_cast<double>(departures_[k]));
                st.queue.append(t, static_cast<double>(queue_[k]));
            }

            void record_busy(int k, double t)
            {
                if (opt_.record)
                    traj_.stations[k].busy.append(t, busy_at(k, t), busy_[k] ? 1.0 : 0.0);
            }

            void set_busy(int k, double t, bool busy)
            {
                if (busy_[k] == busy)
                    return;
                busy_value_[k] = busy_at(k, t);
                busy_since_[k] = t;
                busy_[k] = busy;
                record_busy(k, t);
            }

            void log_event(double t, int k, EventKind kind, int routed_to = RoutingSequence::kExit)
            {
                if (opt_.record)
                    traj_.events.push_back({t, k, kind, queue_[k], routed_to});
            }

            void start_service(int k, double t, bool becoming_busy)
            {
                const double duration = spec_.stations[k].service.sample(service_rngs_[k]);
                if (opt_.record)
                    traj_.stations[k].service_times.push_back(duration);
                if (becoming_busy)
                    set_busy(k, t, true);
                heap_.push({t + duration, Priority::departure, k});
            }

            void depart(int k, double t)
            {
                --queue_[k];
                ++departures_[k];
                const int dest = routers_[k].next();
                if (opt_.record)
                {
                    traj_.stations[k].departure_epochs.push_back(t);
                    traj_.stations[k].destinations.push_back(dest);
                }
                log_event(t, k, EventKind::departure, dest);
                record_counts(k, t);

                if (dest != RoutingSequence::kExit)
                {
                    ++queue_[dest];
                    log_event(t, dest, EventKind::arrival);
                    record_counts(dest, t);
                }

                if (queue_[k] > 0)
                    start_service(k, t, false);
                else
                    set_busy(k, t, false);

                if (dest != RoutingSequence::kExit && dest != k && queue_[dest] == 1)
                    start_service(dest, t, true);
            }

            void arrive_external(int k, double t)
            {
                ++queue_[k];
                ++arrivals_[k];
                log_event(t, k, EventKind::external);
                record_counts(k, t);
                if (queue_[k] == 1)
                    start_service(k, t, true);
                heap_.push({arrival_streams_[k]->next_epoch(), Priority::external, k});
            }

            const NetworkSpec &spec_;
            const SimulationOptions &opt_;
            int k_;
            Trajectory traj_;

            std::vector<std::optional<RenewalStream>> arrival_streams_;
            std::vector<Xoshiro256> service_rngs_;
            std::vector<RoutingSequence> routers_;
            std::priority_queue<Pending, std::vector<Pending>, std::greater<>> heap_;

            std::vector<std::int64_t> queue_;
            std::vector<std::int64_t> arrivals_;
            std::vector<std::int64_t> departures_;
            std::vector<bool> busy_;
            std::vector<double> busy_value_;
            std::vector<double> busy_since_;
        };
    } // namespace

    Trajectory simulate(const NetworkSpec &spec, const SimulationOptions &options, std::uint64_t master_seed,
                        std::uint64_t replicate)
    {
        if (!(options.horizon > 0.0))
            throw ValidationError("simulation horizon must be positive");
        const int k = spec.size();
        if (k == 0 || spec.routing.size() != k || !spec.routing.is_square())
            throw ValidationError("network spec and routing matrix sizes disagree");
        for (const auto &st : spec.stations)
        {
            if (st.initial_queue < 0)
                throw ValidationError("initial queue must be nonnegative");
        }
        Engine engine(spec, options, master_seed, replicate);
        return engine.run();
    }

    void Trajectory::check_time(double t) const
    {
        if (!recorded)
            throw ValidationError("trajectory was simulated without path recording");
        if (!(t >= 0.0 && t <= horizon))
            throw ValidationError("time " + format_double(t) + " outside [0, horizon]");
    }

    std::int64_t Trajectory::queue_at(int k, double t) const
    {
        check_time(t);
        return std::llround(stations.at(k).queue.at(t));
    }

    double Trajectory::busy_time(int k, double t) const
    {
        check_time(t);
        return stations.at(k).busy.at(t);
    }

    std::vector<double> Trajectory::grid() const
    {
        std::vector<double> g;
        g.reserve(events.size() + 2);
        g.push_back(0.0);
        for (const auto &e : events)
        {
            if (e.time != g.back())
                g.push_back(e.time);
        }
        if (horizon != g.back())
            g.push_back(horizon);
        return g;
    }

    Path Trajectory::routed(int from, int to) const
    {
        const auto &st = stations.at(from);
        Path out;
        out.append(0.0, 0.0);
        double count = 0.0;
        for (std::size_t i = 0; i < st.departure_epochs.size(); ++i)
        {
            if (st.destinations[i] == to)
            {
                count += 1.0;
                out.append(st.departure_epochs[i], count);
            }
        }
        out.append(horizon, count);
        return out;
    }

    std::size_t Trajectory::flow_balance_violations() const
    {
        if (!recorded)
            throw ValidationError("trajectory was simulated without path recording");
        const int k_count = size();
        // prefix[l][k][m] = number of the first m departures of l routed to k
        std::vector<std::vector<std::vector<std::int64_t>>> prefix(k_count);
        for (int l = 0; l < k_count; ++l)
        {
            const auto &dest = stations[l].destinations;
            prefix[l].assign(k_count, std::vector<std::int64_t>(dest.size() + 1, 0));
            for (int k = 0; k < k_count; ++k)
            {
                for (std::size_t m = 0; m < dest.size(); ++m)
                    prefix[l][k][m + 1] = prefix[l][k][m] + (dest[m] == k ? 1 : 0);
            }
        }

        std::size_t violations = 0;
        for (double t : grid())
        {
            std::vector<std::int64_t> d(k_count);
            for (int l = 0; l < k_count; ++l)
                d[l] = std::llround(stations[l].departures.at(t));
            for (int k = 0; k < k_count; ++k)
            {
                std::int64_t rhs = initial_queue[k] + std::llround(stations[k].arrivals.at(t)) - d[k];
                for (int l = 0; l < k_count; ++l)
                    rhs += prefix[l][k].at(static_cast<std::size_t>(d[l]));
                if (std::llround(stations[k].queue.at(t)) != rhs)
                    ++violations;
            }
        }
        return violations;
    }

    void write_trajectory_csv(const Trajectory &traj, std::ostream &out)
    {
        out << "time,station,event_type,queue_after\n";
        for (const auto &e : traj.events)
            out << format_double(e.time) << ',' << e.station + 1 << ',' << to_string(e.kind) << ','
                << e.queue_after << '\n';
    }
} // namespace gjn
