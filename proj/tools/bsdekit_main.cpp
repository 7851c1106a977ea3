#include "CLI11.hpp"

#include "bsdekit/acceptance.hpp"
#include "bsdekit/common.hpp"
#include "bsdekit/config.hpp"
#include "bsdekit/parallel.hpp"
#include "bsdekit/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

namespace {

// --config accepts a file path or the name of a bundled preset.  A missing
// path falls through to the parser so its error names the path.
bsdekit::RunConfig load_config(const std::string& spec) {
    if (!spec.empty() && std::filesystem::exists(spec))
        return bsdekit::parse_config_file(spec);
    for (const std::string& name : bsdekit::bundled_names())
        if (name == spec) return bsdekit::bundled_config(spec);
    return bsdekit::parse_config_file(spec);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lattice solver for worst-case optimal liquidation"};
    app.name("bsdekit");
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_spec;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool quiet = false;
    app.add_option("--config", config_spec,
                   "config file path or bundled preset name");
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed, "Monte Carlo seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--threads", threads, "worker threads (0 = automatic)");
    app.add_flag("--quiet", quiet, "suppress progress lines");

    CLI::App* cmd_solve =
        app.add_subcommand("solve", "truncated worst-case solve at the base level");
    CLI::App* cmd_singular =
        app.add_subcommand("singular", "truncation-ladder run to the unbounded limit");
    CLI::App* cmd_liquidate = app.add_subcommand(
        "liquidate", "optimal trajectory, simulated costs, value verification");
    CLI::App* cmd_rbsde =
        app.add_subcommand("rbsde", "reflected solve with obstacle diagnostics");
    CLI::App* cmd_mollify =
        app.add_subcommand("mollify-demo", "driver regularization error table");
    CLI::App* cmd_oracle =
        app.add_subcommand("oracle", "reference value table from the independent oracles");
    CLI::App* cmd_verify =
        app.add_subcommand("verify", "run the full acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::fprintf(stderr, "%s\n", app.help().c_str());
        return 64;
    }

    if (app.get_subcommands().empty()) {
        std::fprintf(stderr, "%s\n", app.help().c_str());
        return 64;
    }

    if (threads > 0) bsdekit::set_thread_count(threads);

    try {
        if (cmd_verify->parsed()) {
            std::string dir = out_dir;
            if (dir.empty() && !config_spec.empty())
                dir = load_config(config_spec).out_dir;
            if (dir.empty()) dir = "out";
            const auto results = bsdekit::acceptance::run_all(dir);
            return bsdekit::acceptance::all_pass(results) ? 0 : 1;
        }

        if (config_spec.empty())
            throw bsdekit::ConfigError("--config is required for this command");
        bsdekit::RunConfig cfg = load_config(config_spec);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_set) cfg.seed = seed;

        if (cmd_solve->parsed()) {
            bsdekit::run_solve(cfg, quiet);
        } else if (cmd_singular->parsed()) {
            bsdekit::run_singular(cfg, quiet);
        } else if (cmd_liquidate->parsed()) {
            bsdekit::run_liquidate(cfg, quiet);
        } else if (cmd_rbsde->parsed()) {
            bsdekit::run_rbsde(cfg, quiet);
        } else if (cmd_mollify->parsed()) {
            bsdekit::run_mollify_demo(cfg, quiet);
        } else if (cmd_oracle->parsed()) {
            bsdekit::run_oracle(cfg, quiet);
        }
        return 0;
    } catch (const bsdekit::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const bsdekit::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
