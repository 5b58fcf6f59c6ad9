// Command-line front end: flags build a manifest, a --config file overrides them.
#include "gjn/errors.hpp"
#include "gjn/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char **argv)
{
    using gjn::ExperimentManifest;

    CLI::App app{"Generalized Jackson network simulator and bound verification"};
    ExperimentManifest m;
    std::string command;
    std::string spec, config, bn;
    std::vector<double> n_grid, u_grid, r;
    std::vector<std::string> terms;
    double horizon = 0.0, warmup_horizon = 0.0;
    int source = 0;

    app.add_option("command", command, "validate | simulate | verify-bounds | lemma-tails | estimate-tail | sweep");
    app.add_option("--spec", spec, "network JSON file");
    app.add_option("--out", m.out, "output directory");
    app.add_option("--seed", m.seed, "master seed");
    app.add_option("--replications", m.replications, "replicates or Monte Carlo paths");
    auto *horizon_opt = app.add_option("--horizon", horizon, "simulation horizon");
    app.add_option("--regime", m.regime, "raw | ld | diffusion | moderate");
    app.add_option("--n-grid", n_grid, "scale indices, comma separated")->delimiter(',');
    app.add_option("--u-grid", u_grid, "thresholds, comma separated")->delimiter(',');
    app.add_option("--bn", bn, "b_n sequence: pow:GAMMA or logpow:GAMMA");
    app.add_option("--r", r, "drift vector for diffusion and moderate regimes")->delimiter(',');
    app.add_option("--event-cap", m.event_cap, "maximum events per simulation");
    app.add_option("--warmup-mult", m.warmup_mult, "warm-up multiplier C");
    app.add_option("--warmup-rule", m.warmup_rule, "drift | relaxation");
    auto *warmup_opt = app.add_option("--warmup-horizon", warmup_horizon, "explicit warm-up time");
    app.add_option("--threads", m.threads, "worker threads");
    app.add_option("--station", m.station, "station k (1-based)");
    auto *source_opt = app.add_option("--source", source, "source station l (1-based); default all");
    app.add_option("--terms", terms, "lemma terms: eq37,eq41,eq3")->delimiter(',');
    app.add_flag("--require-strong-drift", m.require_strong_drift, "treat nu <= 0 as a validation error");
    app.add_option("--config", config, "JSON manifest; its keys override flags");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : gjn::kExitValidation;
    }

    if (!command.empty())
        m.command = command;
    if (!spec.empty())
        m.spec_path = spec;
    if (!bn.empty())
        m.bn = bn;
    if (!n_grid.empty())
        m.n_grid = n_grid;
    if (!u_grid.empty())
        m.u_grid = u_grid;
    if (!r.empty())
        m.r = r;
    if (!terms.empty())
        m.terms = terms;
    if (horizon_opt->count() > 0)
        m.horizon = horizon;
    if (warmup_opt->count() > 0)
        m.warmup_horizon = warmup_horizon;
    if (source_opt->count() > 0)
        m.source = source;

    try
    {
        if (!config.empty())
        {
            std::ifstream in(config);
            if (!in)
            {
                std::cerr << "i/o error: cannot open " << config << '\n';
                return gjn::kExitIo;
            }
            nlohmann::json j;
            try
            {
                in >> j;
            }
            catch (const nlohmann::json::exception &e)
            {
                throw gjn::ValidationError(std::string("config: ") + e.what());
            }
            m = gjn::manifest_from_json(j, m);
        }
        else
        {
            m = gjn::manifest_from_json(nlohmann::json::object(), m);
        }
    }
    catch (const gjn::ValidationError &e)
    {
        std::cerr << nlohmann::json{{"errors", {e.what()}}}.dump() << '\n';
        return gjn::kExitValidation;
    }

    return gjn::run(m, std::cerr);
}
