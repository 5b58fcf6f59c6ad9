#pragma once

#include "gjn/model.hpp"
#include "gjn/path.hpp"
#include "gjn/primitives.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace gjn
{
    enum class EventKind
    {
        external,  // exogenous arrival
        arrival,   // routed arrival from another (or the same) station
        departure, // service completion
    };

    const char *to_string(EventKind kind);

    struct TrajectoryEvent
    {
        double time;
        int station;
        EventKind kind;
        std::int64_t queue_after;
        int routed_to = RoutingSequence::kExit; // departures only
    };

    /// Sample paths of one station on [0, T].
    struct StationTrace
    {
        Path arrivals;   // A_k, exogenous arrivals
        Path departures; // D_k
        Path queue;      // Q_k
        Path busy;       // B_k, slope 1 exactly while Q_k > 0
        std::vector<double> departure_epochs;
        std::vector<int> destinations;      // routing decision of each departure
        std::vector<double> service_times;  // i-th entry used by the i-th service initiation
    };

    class Trajectory
    {
    public:
        double horizon = 0.0;
        bool recorded = true;
        std::vector<std::int64_t> initial_queue;
        std::vector<std::int64_t> final_queue;
        std::vector<StationTrace> stations;
        std::vector<TrajectoryEvent> events;
        std::size_t event_count = 0;

        int size() const noexcept { return static_cast<int>(initial_queue.size()); }

        std::int64_t queue_at(int k, double t) const;
        double busy_time(int k, double t) const;

        /// Event times together with 0 and the horizon, sorted and unique.
        std::vector<double> grid() const;

        /// Φ_lk(D_l(t)): customers routed from l to k by time t.
        Path routed(int from, int to) const;

        /// Number of (grid time, station) pairs where
        /// Q_k(t) = Q_k(0) + A_k(t) + Σ_l Φ_lk(D_l(t)) - D_k(t) fails in integer arithmetic.
        std::size_t flow_balance_violations() const;

    private:
        void check_time(double t) const;
    };

    struct SimulationOptions
    {
        double horizon = 0.0;
        std::size_t event_cap = 50'000'000;
        /// Stop once this many events have been processed (the horizon shrinks to that time).
        std::optional<std::size_t> stop_after_events;
        DelayMode arrival_delay = DelayMode::ordinary();
        /// When false only the final state is kept.
        bool record = true;
    };

    /// Event-driven FIFO simulation. Ties: departures before exogenous arrivals, then
    /// station index ascending. Deterministic given (spec, options, master_seed, replicate).
    Trajectory simulate(const NetworkSpec &spec, const SimulationOptions &options, std::uint64_t master_seed,
                        std::uint64_t replicate = 0);

    /// CSV columns: time,station,event_type,queue_after (stations 1-based).
    void write_trajectory_csv(const Trajectory &traj, std::ostream &out);
} // namespace gjn
