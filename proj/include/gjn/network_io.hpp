#pragma once

#include "gjn/model.hpp"

#include <json.hpp>

#include <filesystem>

namespace gjn
{
    // JSON schema:
    //   {"stations": [{"arrival": <dist>|null, "service": <dist>, "initial_queue": 0}, ...],
    //    "routing": [[p_11, ..., p_1K], ...]}
    //   <dist> = {"family": "exponential", "rate": r}
    //          | {"family": "deterministic", "value": v}
    //          | {"family": "uniform", "low": a, "high": b}
    //          | {"family": "gamma", "shape": k, "scale": s}
    //          | {"family": "lognormal", "mu": m, "sigma": s}
    //          | {"family": "pareto", "shape": a, "scale": x_m}
    // Unknown keys are rejected with ValidationError.

    DistributionSpec distribution_from_json(const nlohmann::json &j);
    nlohmann::json to_json(const DistributionSpec &dist);

    NetworkSpec network_from_json(const nlohmann::json &j);
    nlohmann::json to_json(const NetworkSpec &spec);

    NetworkSpec load_network(const std::filesystem::path &path);

    nlohmann::json to_json(const DriftReport &report);
    nlohmann::json to_json(const ValidationResult &result);
} // namespace gjn
