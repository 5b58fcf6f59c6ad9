#include "gjn/network_io.hpp"

#include "gjn/errors.hpp"

#include <fstream>
#include <set>

namespace gjn
{
    namespace
    {
        using nlohmann::json;

        void reject_unknown_keys(const json &j, const std::set<std::string> &allowed, const std::string &where)
        {
            if (!j.is_object())
                throw ValidationError(where + ": expected a JSON object");
            for (const auto &item : j.items())
            {
                if (!allowed.count(item.key()))
                    throw ValidationError(where + ": unknown key '" + item.key() + "'");
            }
        }

        double number(const json &j, const char *key, const std::string &where)
        {
            if (!j.contains(key))
                throw ValidationError(where + ": missing '" + key + "'");
            const auto &v = j.at(key);
            if (!v.is_number())
                throw ValidationError(where + ": '" + key + "' must be a number");
            return v.get<double>();
        }

        const char *param_name(Family f, int i)
        {
            switch (f)
            {
            case Family::exponential: return "rate";
            case Family::deterministic: return "value";
            case Family::uniform: return i == 0 ? "low" : "high";
            case Family::gamma: return i == 0 ? "shape" : "scale";
            case Family::lognormal: return i == 0 ? "mu" : "sigma";
            case Family::pareto: return i == 0 ? "shape" : "scale";
            }
            return "";
        }

        int param_count(Family f) { return (f == Family::exponential || f == Family::deterministic) ? 1 : 2; }

        json vector_json(const Eigen::VectorXd &v)
        {
            json out = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i)
                out.push_back(v(i));
            return out;
        }
    } // namespace

    DistributionSpec distribution_from_json(const json &j)
    {
        if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
            throw ValidationError("distribution: expected an object with a string 'family'");
        const Family f = family_from_string(j.at("family").get<std::string>());
        const std::string where = "distribution '" + std::string(to_string(f)) + "'";
        std::set<std::string> allowed{"family"};
        for (int i = 0; i < param_count(f); ++i)
            allowed.insert(param_name(f, i));
        reject_unknown_keys(j, allowed, where);

        const double a = number(j, param_name(f, 0), where);
        const double b = param_count(f) > 1 ? number(j, param_name(f, 1), where) : 0.0;
        switch (f)
        {
        case Family::exponential: return DistributionSpec::exponential(a);
        case Family::deterministic: return DistributionSpec::deterministic(a);
        case Family::uniform: return DistributionSpec::uniform(a, b);
        case Family::gamma: return DistributionSpec::gamma(a, b);
        case Family::lognormal: return DistributionSpec::lognormal(a, b);
        case Family::pareto: return DistributionSpec::pareto(a, b);
        }
        throw ValidationError(where + ": unsupported family");
    }

    json to_json(const DistributionSpec &dist)
    {
        json j;
        j["family"] = std::string(to_string(dist.family()));
        for (int i = 0; i < param_count(dist.family()); ++i)
            j[param_name(dist.family(), i)] = dist.param(i);
        return j;
    }

    NetworkSpec network_from_json(const json &j)
    {
        reject_unknown_keys(j, {"stations", "routing"}, "network");
        if (!j.contains("stations") || !j.at("stations").is_array() || j.at("stations").empty())
            throw ValidationError("network: 'stations' must be a nonempty array");
        NetworkSpec spec;
        int index = 0;
        for (const auto &st : j.at("stations"))
        {
            const std::string where = "station " + std::to_string(++index);
            reject_unknown_keys(st, {"arrival", "service", "initial_queue"}, where);
            if (!st.contains("service"))
                throw ValidationError(where + ": missing 'service'");
            StationSpec station{std::nullopt, distribution_from_json(st.at("service")), 0};
            if (st.contains("arrival") && !st.at("arrival").is_null())
                station.arrival = distribution_from_json(st.at("arrival"));
            if (st.contains("initial_queue"))
            {
                const auto &q = st.at("initial_queue");
                if (!q.is_number_integer())
                    throw ValidationError(where + ": 'initial_queue' must be an integer");
                station.initial_queue = q.get<std::int64_t>();
            }
            spec.stations.push_back(std::move(station));
        }

        const int k = spec.size();
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(k, k);
        if (j.contains("routing"))
        {
            const auto &rows = j.at("routing");
            if (!rows.is_array() || static_cast<int>(rows.size()) != k)
                throw ValidationError("network: 'routing' must have one row per station");
            for (int r = 0; r < k; ++r)
            {
                const auto &row = rows.at(r);
                if (!row.is_array() || static_cast<int>(row.size()) != k)
                    throw ValidationError("network: routing row " + std::to_string(r + 1) + " must have " +
                                          std::to_string(k) + " entries");
                for (int c = 0; c < k; ++c)
                {
                    if (!row.at(c).is_number())
                        throw ValidationError("network: routing entries must be numbers");
                    p(r, c) = row.at(c).get<double>();
                }
            }
        }
        spec.routing = RoutingMatrix(std::move(p));
        return spec;
    }

    json to_json(const NetworkSpec &spec)
    {
        json stations = json::array();
        for (const auto &st : spec.stations)
        {
            json s;
            s["arrival"] = st.arrival ? to_json(*st.arrival) : json(nullptr);
            s["service"] = to_json(st.service);
            s["initial_queue"] = st.initial_queue;
            stations.push_back(std::move(s));
        }
        json routing = json::array();
        for (int r = 0; r < spec.size(); ++r)
        {
            json row = json::array();
            for (int c = 0; c < spec.size(); ++c)
                row.push_back(spec.routing(r, c));
            routing.push_back(std::move(row));
        }
        return {{"stations", std::move(stations)}, {"routing", std::move(routing)}};
    }

    NetworkSpec load_network(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::ios_base::failure("cannot open network spec '" + path.string() + "'");
        json j;
        try
        {
            in >> j;
        }
        catch (const json::parse_error &e)
        {
            throw ValidationError("network spec is not valid JSON: " + std::string(e.what()));
        }
        return network_from_json(j);
    }

    json to_json(const DriftReport &report)
    {
        json violations = json::array();
        for (int k : report.drift_violations())
            violations.push_back(k + 1);
        return {{"lambda", vector_json(report.lambda)},
                {"mu", vector_json(report.mu)},
                {"effective_arrivals", vector_json(report.effective_arrivals)},
                {"nu", vector_json(report.nu)},
                {"spectral_radius", report.spectral_radius},
                {"subcritical", report.subcritical},
                {"strong_drift", report.strong_drift},
                {"drift_violations", std::move(violations)}};
    }

    json to_json(const ValidationResult &result)
    {
        auto issues = [](const std::vector<ValidationIssue> &list) {
            json out = json::array();
            for (const auto &issue : list)
            {
                out.push_back({{"station", issue.station ? json(*issue.station + 1) : json(nullptr)},
                               {"reason", issue.reason}});
            }
            return out;
        };
        json j{{"ok", result.ok()}, {"errors", issues(result.errors)}, {"warnings", issues(result.warnings)}};
        if (result.report)
            j["drift"] = to_json(*result.report);
        return j;
    }
} // namespace gjn
