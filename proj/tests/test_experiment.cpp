#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gjn/errors.hpp"
#include "gjn/experiment.hpp"

#include <boost/crc.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gjn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{
    fs::path scratch(const std::string &name)
    {
        const auto dir = fs::temp_directory_path() / ("gjn_test_experiment_" + name);
        fs::remove_all(dir);
        return dir;
    }

    std::string slurp(const fs::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    json mm1_json()
    {
        return json::parse(R"({"stations": [{"arrival": {"family": "exponential", "rate": 0.5},
                                             "service": {"family": "exponential", "rate": 1.0}}]})");
    }

    ExperimentManifest manifest(const std::string &command, const fs::path &out)
    {
        ExperimentManifest m;
        m.command = command;
        m.network = mm1_json();
        m.out = out.string();
        return m;
    }

    int run_quiet(const ExperimentManifest &m)
    {
        std::ostringstream log;
        return run(m, log);
    }
} // namespace

TEST_CASE("manifest JSON round trip")
{
    ExperimentManifest m;
    m.command = "sweep";
    m.seed = 99;
    m.regime = "diffusion";
    m.n_grid = {4.0, 16.0};
    m.u_grid = {0.5, 1.0};
    m.r = std::vector<double>{-1.0};
    m.warmup_horizon = 12.5;
    m.terms = {"eq3"};
    m.source = 1;
    m.threads = 4;
    const auto j = to_json(m);
    const auto back = manifest_from_json(j);
    CHECK(to_json(back) == j);

    const auto p = provenance_json(m);
    CHECK_FALSE(p.contains("out"));
    CHECK_FALSE(p.contains("threads"));
    CHECK(p.at("seed") == 99);
}

TEST_CASE("manifest overlays and rejects unknown keys")
{
    ExperimentManifest base;
    base.seed = 5;
    const auto m = manifest_from_json(json{{"replications", 50}}, base);
    CHECK(m.seed == 5);
    CHECK(m.replications == 50);
    CHECK_THROWS_AS(manifest_from_json(json{{"replicates", 50}}), ValidationError);
    CHECK_THROWS_AS(manifest_from_json(json{{"seed", "one"}}), ValidationError);
    CHECK_THROWS_AS(manifest_from_json(json{{"command", "launch"}}), ValidationError);
}

TEST_CASE("validate writes a drift report")
{
    const auto dir = scratch("validate");
    CHECK(run_quiet(manifest("validate", dir)) == kExitOk);
    const auto report = json::parse(slurp(dir / "drift_report.json"));
    CHECK(report.is_object());
    const auto results = json::parse(slurp(dir / "results.json"));
    CHECK(results.at("status") == "ok");
    CHECK(results.at("exit_code") == 0);
}

TEST_CASE("malformed routing is a validation failure")
{
    const auto dir = scratch("bad_routing");
    auto m = manifest("validate", dir);
    (*m.network)["routing"] = json::array({json::array({1.2})});
    CHECK(run_quiet(m) == kExitValidation);
    const auto results = json::parse(slurp(dir / "results.json"));
    CHECK(results.at("exit_code") == kExitValidation);
}

TEST_CASE("missing spec file is an I/O failure")
{
    auto m = manifest("validate", scratch("missing"));
    m.network.reset();
    m.spec_path = "/nonexistent/network.json";
    CHECK(run_quiet(m) == kExitIo);
}

TEST_CASE("unknown network keys are validation failures")
{
    auto m = manifest("simulate", scratch("unknown_key"));
    (*m.network)["stationz"] = 1;
    CHECK(run_quiet(m) == kExitValidation);
}

TEST_CASE("simulate output is byte-identical across directories and threads")
{
    const auto a = scratch("sim_a");
    const auto b = scratch("sim_b");
    auto ma = manifest("simulate", a);
    ma.horizon = 50.0;
    auto mb = ma;
    mb.out = b.string();
    mb.threads = 3;
    REQUIRE(run_quiet(ma) == kExitOk);
    REQUIRE(run_quiet(mb) == kExitOk);
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "results.json") == slurp(b / "results.json"));

    const auto csv = slurp(a / "trajectory.csv");
    CHECK(csv.rfind("# manifest: ", 0) == 0);

    // Checksums in the index match the files.
    const auto results = json::parse(slurp(a / "results.json"));
    for (const auto &f : results.at("files"))
    {
        const auto content = slurp(a / f.at("path").get<std::string>());
        boost::crc_32_type crc;
        crc.process_bytes(content.data(), content.size());
        char hex[9];
        std::snprintf(hex, sizeof hex, "%08x", crc.checksum());
        CHECK(f.at("crc32") == hex);
        CHECK(f.at("bytes") == content.size());
    }
}

TEST_CASE("verify-bounds, lemma-tails and estimate-tail produce their tables")
{
    const auto dir = scratch("tables");
    auto m = manifest("verify-bounds", dir / "verify");
    m.replications = 3;
    m.horizon = 200.0;
    CHECK(run_quiet(m) == kExitOk);
    CHECK(fs::exists(dir / "verify" / "majorants.csv"));
    CHECK(fs::exists(dir / "verify" / "majorant_paths.csv"));
    // Last column of every data row is max(Q - Q̂), which must not be positive.
    std::istringstream rows(slurp(dir / "verify" / "majorants.csv"));
    std::string line;
    std::getline(rows, line);
    std::getline(rows, line);
    std::size_t data_rows = 0;
    while (std::getline(rows, line))
    {
        ++data_rows;
        CHECK(std::stod(line.substr(line.rfind(',') + 1)) <= 1e-9);
    }
    CHECK(data_rows == 3);

    m = manifest("lemma-tails", dir / "lemma");
    m.u_grid = {1.0, 2.0};
    m.replications = 1000;
    CHECK(run_quiet(m) == kExitOk);
    const auto bounds = slurp(dir / "lemma" / "bounds.csv");
    CHECK(bounds.find("which,u,mc_estimate") != std::string::npos);
    CHECK(bounds.find("\neq37,") != std::string::npos);

    m = manifest("estimate-tail", dir / "tail");
    m.replications = 100;
    m.u_grid = {1.0};
    CHECK(run_quiet(m) == kExitOk);
    CHECK(slurp(dir / "tail" / "tail.csv").find("regime,n,u,k") != std::string::npos);

    m = manifest("estimate-tail", dir / "tail_bad");
    m.station = 3;
    CHECK(run_quiet(m) == kExitValidation);
}
