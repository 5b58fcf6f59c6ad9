#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gjn
{
    /// Exit codes of run().
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitFailure = 1; // any other library error
    inline constexpr int kExitValidation = 2;
    inline constexpr int kExitInvariant = 3;
    inline constexpr int kExitIo = 4;

    /// Everything needed to replay one experiment. Stations are 1-based here.
    struct ExperimentManifest
    {
        std::string command = "validate"; // validate | simulate | verify-bounds | lemma-tails | estimate-tail | sweep
        std::optional<std::string> spec_path;
        std::optional<nlohmann::json> network; // inline network, used instead of spec_path
        std::string out = "out";
        std::uint64_t seed = 1;
        std::size_t replications = 1000;
        std::optional<double> horizon;
        std::string regime = "raw";
        std::vector<double> n_grid{1.0};
        std::vector<double> u_grid{1.0, 2.0, 4.0};
        std::string bn = "pow:0.25";
        std::optional<std::vector<double>> r; // default -0.5 per station
        std::size_t event_cap = 50'000'000;
        double warmup_mult = 20.0;
        std::string warmup_rule = "drift";
        std::optional<double> warmup_horizon;
        unsigned threads = 1;
        int station = 1;
        std::optional<int> source;
        std::vector<std::string> terms{"eq37", "eq41", "eq3"};
        bool require_strong_drift = false;
    };

    /// Full JSON form, including out and threads.
    nlohmann::json to_json(const ExperimentManifest &manifest);
    /// Form echoed into outputs: out and threads are omitted so outputs do not depend on them.
    nlohmann::json provenance_json(const ExperimentManifest &manifest);
    /// Overlays the keys present in `j` onto `base`. Unknown keys are a ValidationError.
    ExperimentManifest manifest_from_json(const nlohmann::json &j, ExperimentManifest base = {});

    /// Executes the manifest, writing every output under manifest.out and an index
    /// results.json with CRC-32 checksums. Diagnostics go to `log`.
    int run(const ExperimentManifest &manifest, std::ostream &log);
} // namespace gjn
