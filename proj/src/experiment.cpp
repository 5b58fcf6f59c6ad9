#include "gjn/experiment.hpp"

#include "gjn/bounds.hpp"
#include "gjn/errors.hpp"
#include "gjn/format.hpp"
#include "gjn/network_io.hpp"
#include "gjn/parallel.hpp"
#include "gjn/reflection.hpp"
#include "gjn/rng.hpp"
#include "gjn/scaling.hpp"
#include "gjn/simulator.hpp"

#include <boost/crc.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

namespace gjn
{
    using nlohmann::json;

    namespace
    {
        const std::set<std::string> kCommands{"validate",    "simulate",      "verify-bounds",
                                              "lemma-tails", "estimate-tail", "sweep"};

        template <class T>
        void read_key(const json &j, const char *key, T &target)
        {
            if (j.contains(key))
                target = j.at(key).get<T>();
        }

        template <class T>
        void read_optional(const json &j, const char *key, std::optional<T> &target)
        {
            if (!j.contains(key))
                return;
            if (j.at(key).is_null())
                target.reset();
            else
                target = j.at(key).get<T>();
        }

        // Writes output files and keeps their checksums for results.json.
        class OutputSet
        {
        public:
            OutputSet(std::filesystem::path dir, json provenance)
                : dir_(std::move(dir)), provenance_(std::move(provenance))
            {
                std::filesystem::create_directories(dir_);
            }

            void write(const std::string &name, const std::string &content)
            {
                const auto path = dir_ / name;
                std::ofstream out(path, std::ios::binary);
                if (!out)
                    throw std::ios_base::failure("cannot open " + path.string() + " for writing");
                out << content;
                out.close();
                if (!out)
                    throw std::ios_base::failure("failed writing " + path.string());
                boost::crc_32_type crc;
                crc.process_bytes(content.data(), content.size());
                std::ostringstream hex;
                hex << std::hex << std::setw(8) << std::setfill('0') << crc.checksum();
                files_.push_back({{"path", name}, {"bytes", content.size()}, {"crc32", hex.str()}});
            }

            /// CSV text beginning with a `# manifest:` comment line.
            std::string csv_preamble() const { return "# manifest: " + provenance_.dump() + "\n"; }

            void finish(const std::string &status, int exit_code, const json &summary)
            {
                json results;
                results["status"] = status;
                results["exit_code"] = exit_code;
                results["manifest"] = provenance_;
                results["summary"] = summary;
                results["files"] = files_;
                const std::string text = results.dump(2) + "\n";
                std::ofstream out(dir_ / "results.json", std::ios::binary);
                if (!out)
                    throw std::ios_base::failure("cannot write results.json");
                out << text;
            }

        private:
            std::filesystem::path dir_;
            json provenance_;
            json files_ = json::array();
        };

        NetworkSpec load_spec(const ExperimentManifest &m)
        {
            if (m.network)
                return network_from_json(*m.network);
            if (m.spec_path)
                return load_network(*m.spec_path);
            throw ValidationError("no network given: set 'spec' or 'network'");
        }

        int station_index(int value, const NetworkSpec &spec, const char *what)
        {
            if (value < 1 || value > spec.size())
                throw ValidationError(std::string(what) + " must be between 1 and " + std::to_string(spec.size()));
            return value - 1;
        }

        Eigen::VectorXd drift_vector(const ExperimentManifest &m, int stations)
        {
            if (!m.r)
                return Eigen::VectorXd::Constant(stations, -0.5);
            if (static_cast<int>(m.r->size()) != stations)
                throw ValidationError("'r' must have one entry per station");
            Eigen::VectorXd r(stations);
            for (int i = 0; i < stations; ++i)
                r[i] = (*m.r)[static_cast<std::size_t>(i)];
            return r;
        }

        TailOptions tail_options(const ExperimentManifest &m)
        {
            TailOptions t;
            t.replications = m.replications;
            t.seed = m.seed;
            t.event_cap = m.event_cap;
            t.threads = m.threads;
            t.warmup.multiplier = m.warmup_mult;
            t.warmup.horizon = m.warmup_horizon;
            if (m.warmup_rule == "drift")
                t.warmup.rule = WarmupPolicy::Rule::drift;
            else if (m.warmup_rule == "relaxation")
                t.warmup.rule = WarmupPolicy::Rule::relaxation;
            else
                throw ValidationError("warmup_rule must be drift or relaxation");
            return t;
        }

        json command_validate(const ExperimentManifest &m, OutputSet &out, int &exit_code)
        {
            const auto spec = load_spec(m);
            const auto result = validate(spec, {.subcritical = false, .strong_drift = m.require_strong_drift});
            out.write("drift_report.json", to_json(result).dump(2) + "\n");
            exit_code = result.ok() ? kExitOk : kExitValidation;
            return {{"errors", result.errors.size()}, {"warnings", result.warnings.size()}};
        }

        json command_simulate(const ExperimentManifest &m, OutputSet &out, int &exit_code)
        {
            const auto spec = load_spec(m);
            validated_drift(spec);
            SimulationOptions opts;
            opts.horizon = m.horizon.value_or(100.0);
            opts.event_cap = m.event_cap;
            const auto traj = simulate(spec, opts, m.seed);
            std::ostringstream csv;
            csv << out.csv_preamble();
            write_trajectory_csv(traj, csv);
            out.write("trajectory.csv", csv.str());
            const auto violations = traj.flow_balance_violations();
            exit_code = violations == 0 ? kExitOk : kExitInvariant;
            return {{"events", traj.event_count},
                    {"final_queue", traj.final_queue},
                    {"flow_balance_violations", violations}};
        }

        json command_verify_bounds(const ExperimentManifest &m, OutputSet &out, int &exit_code)
        {
            const auto spec = load_spec(m);
            const auto drift = validated_drift(spec);
            std::vector<int> stations;
            for (int k = 0; k < drift.size(); ++k)
                if (drift.nu[k] > 0.0)
                    stations.push_back(k);
            if (stations.empty())
                throw ValidationError("verify-bounds needs nu_k > 0 at some station");

            SimulationOptions opts;
            opts.horizon = m.horizon.value_or(100.0);
            opts.event_cap = m.event_cap;

            struct Row
            {
                std::size_t events = 0;
                std::size_t flow = 0;
                std::vector<std::size_t> majorization;
                std::vector<std::size_t> decomposition;
                std::vector<double> max_gap; // max over the grid of Q_k - Q̂_k
            };
            std::vector<Row> rows(m.replications);
            std::string paths_csv;
            parallel_for(m.replications, m.threads, [&](std::size_t r) {
                const auto traj = simulate(spec, opts, m.seed, r);
                Row row;
                row.events = traj.event_count;
                row.flow = traj.flow_balance_violations();
                std::ostringstream detail;
                for (int k : stations)
                {
                    const auto b = build_majorants(traj, drift, k);
                    row.majorization.push_back(b.majorization_violations);
                    row.decomposition.push_back(b.decomposition_violations);
                    double gap = -std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < b.times.size(); ++i)
                        gap = std::max(gap, b.queue.value(i) - b.reflected.at(b.times[i]));
                    row.max_gap.push_back(gap);
                    if (r == 0)
                        for (std::size_t i = 0; i < b.times.size(); ++i)
                            detail << k + 1 << ',' << format_double(b.times[i]) << ','
                                   << format_double(b.queue.value(i)) << ',' << format_double(b.centered.value(i))
                                   << ',' << format_double(b.drifted.value(i)) << ','
                                   << format_double(b.reflected.at(b.times[i])) << ',' << format_double(b.y1[i]) << ','
                                   << format_double(b.y2_sum[i]) << ',' << format_double(b.y3_sum[i]) << ','
                                   << format_double(b.decomposition_rhs(i)) << '\n';
                }
                if (r == 0)
                    paths_csv = detail.str();
                rows[r] = std::move(row);
            });

            std::ostringstream csv;
            csv << out.csv_preamble()
                << "replicate,station,events,flow_violations,majorization_violations,decomposition_violations,"
                   "max_queue_minus_majorant\n";
            std::size_t total_flow = 0, total_major = 0, total_decomp = 0;
            for (std::size_t r = 0; r < rows.size(); ++r)
            {
                total_flow += rows[r].flow;
                for (std::size_t s = 0; s < stations.size(); ++s)
                {
                    total_major += rows[r].majorization[s];
                    total_decomp += rows[r].decomposition[s];
                    csv << r << ',' << stations[s] + 1 << ',' << rows[r].events << ',' << rows[r].flow << ','
                        << rows[r].majorization[s] << ',' << rows[r].decomposition[s] << ','
                        << format_double(rows[r].max_gap[s]) << '\n';
                }
            }
            out.write("majorants.csv", csv.str());
            out.write("majorant_paths.csv", out.csv_preamble() +
                                                "station,time,queue,centered,drifted,reflected,y1,y2_sum,y3_sum,"
                                                "decomposition_rhs\n" +
                                                paths_csv);
            const std::size_t total = total_flow + total_major + total_decomp;
            exit_code = total == 0 ? kExitOk : kExitInvariant;
            return {{"replications", m.replications},
                    {"flow_balance_violations", total_flow},
                    {"majorization_violations", total_major},
                    {"decomposition_violations", total_decomp}};
        }

        // Dyadic and second-moment bounds on the lemma event sup W_i >= u + c, i.e.
        // sup (M_i - d i) >= u + c - d, summed over the branches.
        void branch_bounds(const std::vector<SupWalkSpec> &walks, double u, BoundRow &row)
        {
            double dyadic = 0.0, second = 0.0;
            bool dyadic_ok = true, second_ok = true;
            for (const auto &w : walks)
            {
                const double x = u + w.offset - w.drift;
                if (x <= 0.0)
                {
                    dyadic += 1.0;
                    second += 1.0;
                    continue;
                }
                const auto count = static_cast<std::size_t>(std::max(1.0, std::floor(x)));
                try
                {
                    dyadic += chernoff_dyadic_core(w, x, count, x / static_cast<double>(count)).value;
                }
                catch (const CapabilityError &)
                {
                    dyadic_ok = false;
                }
                catch (const NumericalError &)
                {
                    dyadic_ok = false;
                }
                try
                {
                    second += second_moment_block_core(w, x, count).value;
                }
                catch (const CapabilityError &)
                {
                    second_ok = false;
                }
            }
            if (dyadic_ok)
                row.dyadic_bound = std::min(dyadic, static_cast<double>(walks.size()));
            if (second_ok)
                row.second_moment_bound = std::min(second, static_cast<double>(walks.size()));
        }

        json command_lemma_tails(const ExperimentManifest &m, OutputSet &out, int &exit_code)
        {
            const auto spec = load_spec(m);
            const auto drift = validated_drift(spec);
            const int k = station_index(m.station, spec, "station");
            std::vector<int> sources;
            if (m.source)
                sources.push_back(station_index(*m.source, spec, "source"));
            else
                for (int l = 0; l < spec.size(); ++l)
                    sources.push_back(l);

            McOptions mc;
            mc.replications = m.replications;
            mc.seed = m.seed;
            mc.threads = m.threads;

            std::ostringstream csv;
            csv << out.csv_preamble() << bound_csv_header() << '\n';
            std::size_t rows = 0, breaches = 0;
            for (const auto &name : m.terms)
            {
                const auto term = lemma_term_from_string(name);
                const std::vector<int> ls = term == LemmaTerm::eq37 ? std::vector<int>{k} : sources;
                for (int l : ls)
                {
                    const std::string label =
                        term == LemmaTerm::eq37 ? name : name + "[l=" + std::to_string(l + 1) + "]";
                    for (double u : m.u_grid)
                    {
                        const auto e = lemma_rhs(spec, drift, k, l, term, u, mc);
                        BoundRow row;
                        row.which = label;
                        row.u = u;
                        row.mc_estimate = e.estimate;
                        row.ci_low = e.ci_low;
                        row.ci_high = e.ci_high;
                        row.lundberg_bound = e.lundberg_bound;
                        if (e.walks.empty())
                        {
                            row.dyadic_bound = 0.0;
                            row.second_moment_bound = 0.0;
                        }
                        else
                        {
                            branch_bounds(e.walks, u, row);
                        }
                        for (const auto &b : {row.lundberg_bound, row.dyadic_bound, row.second_moment_bound})
                            if (b && *b < e.estimate - 3.0 * e.se)
                                ++breaches;
                        csv << to_csv(row) << '\n';
                        ++rows;
                    }
                }
            }
            out.write("bounds.csv", csv.str());
            exit_code = breaches == 0 ? kExitOk : kExitInvariant;
            return {{"rows", rows}, {"bound_breaches", breaches}};
        }

        json command_estimate_tail(const ExperimentManifest &m, OutputSet &out, int &exit_code)
        {
            const auto base = load_spec(m);
            const int k = station_index(m.station, base, "station");
            const auto kind = regime_from_string(m.regime);
            const auto options = tail_options(m);
            std::ostringstream csv;
            csv << out.csv_preamble() << tail_csv_header() << '\n';
            std::size_t cells = 0;
            for (double n : m.n_grid)
            {
                ScalingRegime regime{kind, n, drift_vector(m, base.size()), BnSequence::parse(m.bn)};
                if (kind != RegimeKind::moderate)
                    regime.bn = BnSequence{};
                const auto spec = make_sequence(base, regime);
                TailOptions opts = options;
                opts.seed = derive_seed(m.seed, static_cast<std::uint64_t>(std::llround(n * 1000.0)));
                for (const auto &e : estimate_stationary_tail(spec, regime, m.u_grid, k, opts))
                {
                    csv << to_csv(e) << '\n';
                    ++cells;
                }
            }
            out.write("tail.csv", csv.str());
            exit_code = kExitOk;
            return {{"cells", cells}};
        }

        json command_sweep(const ExperimentManifest &m, OutputSet &out, int &exit_code)
        {
            const auto base = load_spec(m);
            SweepConfig config;
            config.regime = regime_from_string(m.regime);
            config.r = drift_vector(m, base.size());
            if (config.regime == RegimeKind::moderate)
                config.bn = BnSequence::parse(m.bn);
            config.n_grid = m.n_grid;
            config.u_grid = m.u_grid;
            config.station = station_index(m.station, base, "station");
            config.tail = tail_options(m);
            const auto result = tightness_sweep(base, config);

            std::ostringstream cells;
            cells << out.csv_preamble() << tail_csv_header() << '\n';
            for (const auto &e : result.cells)
                cells << to_csv(e) << '\n';
            out.write("tail.csv", cells.str());

            std::ostringstream summary;
            summary << out.csv_preamble() << "u,max_normalized,argmax_n,resolved_cells\n";
            for (const auto &s : result.per_u)
                summary << format_double(s.u) << ',' << (s.max_normalized ? format_double(*s.max_normalized) : "")
                        << ',' << (s.argmax_n ? format_double(*s.argmax_n) : "") << ',' << s.resolved_cells << '\n';
            out.write("sweep_summary.csv", summary.str());
            exit_code = kExitOk;
            const auto moments = network_moment_classes(base);
            return {{"cells", result.cells.size()},
                    {"trend_in_u", result.trend_in_u},
                    {"moment_classes",
                     {{"exponential", moments.exp_moment},
                      {"two_plus_eps", moments.two_plus_eps_moment},
                      {"stretched_exponential", moments.stretched_exp_moment}}}};
        }
    } // namespace

    json to_json(const ExperimentManifest &m)
    {
        json j = provenance_json(m);
        j["out"] = m.out;
        j["threads"] = m.threads;
        return j;
    }

    json provenance_json(const ExperimentManifest &m)
    {
        json j;
        j["command"] = m.command;
        j["spec"] = m.spec_path ? json(*m.spec_path) : json(nullptr);
        j["network"] = m.network ? *m.network : json(nullptr);
        j["seed"] = m.seed;
        j["replications"] = m.replications;
        j["horizon"] = m.horizon ? json(*m.horizon) : json(nullptr);
        j["regime"] = m.regime;
        j["n_grid"] = m.n_grid;
        j["u_grid"] = m.u_grid;
        j["bn"] = m.bn;
        j["r"] = m.r ? json(*m.r) : json(nullptr);
        j["event_cap"] = m.event_cap;
        j["warmup_mult"] = m.warmup_mult;
        j["warmup_rule"] = m.warmup_rule;
        j["warmup_horizon"] = m.warmup_horizon ? json(*m.warmup_horizon) : json(nullptr);
        j["station"] = m.station;
        j["source"] = m.source ? json(*m.source) : json(nullptr);
        j["terms"] = m.terms;
        j["require_strong_drift"] = m.require_strong_drift;
        return j;
    }

    ExperimentManifest manifest_from_json(const json &j, ExperimentManifest m)
    {
        static const std::set<std::string> keys{
            "command", "spec",      "network",     "out",         "seed",           "replications",
            "horizon", "regime",    "n_grid",      "u_grid",      "bn",             "r",
            "event_cap", "warmup_mult", "warmup_rule", "warmup_horizon", "threads", "station",
            "source",  "terms",     "require_strong_drift"};
        if (!j.is_object())
            throw ValidationError("manifest must be a JSON object");
        for (const auto &item : j.items())
            if (!keys.count(item.key()))
                throw ValidationError("manifest: unknown key '" + item.key() + "'");
        try
        {
            read_key(j, "command", m.command);
            read_optional(j, "spec", m.spec_path);
            if (j.contains("network"))
            {
                if (j.at("network").is_null())
                    m.network.reset();
                else
                    m.network = j.at("network");
            }
            read_key(j, "out", m.out);
            read_key(j, "seed", m.seed);
            read_key(j, "replications", m.replications);
            read_optional(j, "horizon", m.horizon);
            read_key(j, "regime", m.regime);
            read_key(j, "n_grid", m.n_grid);
            read_key(j, "u_grid", m.u_grid);
            read_key(j, "bn", m.bn);
            read_optional(j, "r", m.r);
            read_key(j, "event_cap", m.event_cap);
            read_key(j, "warmup_mult", m.warmup_mult);
            read_key(j, "warmup_rule", m.warmup_rule);
            read_optional(j, "warmup_horizon", m.warmup_horizon);
            read_key(j, "threads", m.threads);
            read_key(j, "station", m.station);
            read_optional(j, "source", m.source);
            read_key(j, "terms", m.terms);
            read_key(j, "require_strong_drift", m.require_strong_drift);
        }
        catch (const json::exception &e)
        {
            throw ValidationError(std::string("manifest: ") + e.what());
        }
        if (!kCommands.count(m.command))
            throw ValidationError("manifest: unknown command '" + m.command + "'");
        return m;
    }

    int run(const ExperimentManifest &m, std::ostream &log)
    {
        std::optional<OutputSet> out;
        try
        {
            if (!kCommands.count(m.command))
                throw ValidationError("unknown command '" + m.command + "'");
            out.emplace(m.out, provenance_json(m));
            int exit_code = kExitOk;
            json summary;
            if (m.command == "validate")
                summary = command_validate(m, *out, exit_code);
            else if (m.command == "simulate")
                summary = command_simulate(m, *out, exit_code);
            else if (m.command == "verify-bounds")
                summary = command_verify_bounds(m, *out, exit_code);
            else if (m.command == "lemma-tails")
                summary = command_lemma_tails(m, *out, exit_code);
            else if (m.command == "estimate-tail")
                summary = command_estimate_tail(m, *out, exit_code);
            else
                summary = command_sweep(m, *out, exit_code);
            const std::string status = exit_code == kExitOk           ? "ok"
                                       : exit_code == kExitValidation ? "validation_error"
                                                                      : "invariant_violation";
            out->finish(status, exit_code, summary);
            if (exit_code != kExitOk)
                log << m.command << ": " << status << ' ' << summary.dump() << '\n';
            return exit_code;
        }
        catch (const ValidationError &e)
        {
            const json errors = {{"errors", json::array({e.what()})}};
            log << errors.dump() << '\n';
            if (out)
                out->finish("validation_error", kExitValidation, errors);
            return kExitValidation;
        }
        catch (const InvariantViolation &e)
        {
            log << "invariant violation: " << e.what() << '\n';
            if (out)
                out->finish("invariant_violation", kExitInvariant, {{"message", e.what()}});
            return kExitInvariant;
        }
        catch (const std::ios_base::failure &e)
        {
            log << "i/o error: " << e.what() << '\n';
            return kExitIo;
        }
        catch (const std::filesystem::filesystem_error &e)
        {
            log << "i/o error: " << e.what() << '\n';
            return kExitIo;
        }
        catch (const std::exception &e)
        {
            log << "error: " << e.what() << '\n';
            if (out)
            {
                try
                {
                    out->finish("error", kExitFailure, {{"message", e.what()}});
                }
                catch (const std::exception &)
                {
                }
            }
            return kExitFailure;
        }
    }
} // namespace gjn
