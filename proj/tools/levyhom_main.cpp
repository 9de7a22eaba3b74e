// Command-line front end: stages can run individually or as a whole
// pipeline; every stage reads the same JSON config.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levyhom/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kInvariantFailure = 1, kConfigError = 2, kNoConvergence = 3 };

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool verbose = false;
};

levyhom::ExperimentConfig load_config(const CommonArgs& args) {
    levyhom::ExperimentConfig config = args.config_path.empty()
        ? levyhom::ExperimentConfig::reference()
        : levyhom::ExperimentConfig::from_file(args.config_path);
    if (args.seed_set) config.seed = args.seed;
    if (args.threads > 0) config.threads = args.threads;
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    for (const std::string& w : config.warnings)
        std::fprintf(stderr, "config warning: %s\n", w.c_str());
    return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "master seed override")
        ->each([&](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads");
    cmd->add_flag("--verbose", args.verbose, "chatty progress output");
}

int run_stages(const CommonArgs& args, const std::vector<std::string>& stages) {
    levyhom::ExperimentConfig config = load_config(args);
    if (!stages.empty()) config.stages = stages;
    levyhom::RunManifest manifest = levyhom::run(config, config.output_dir);
    for (const levyhom::StageResult& s : manifest.stages) {
        std::printf("%-16s %s  (%.2fs)%s%s\n", s.name.c_str(),
                    s.pass ? "PASS" : "FAIL", s.seconds,
                    s.note.empty() ? "" : "  ", s.note.c_str());
        if (args.verbose)
            for (const std::string& o : s.outputs)
                std::printf("    wrote %s\n", o.c_str());
    }
    std::printf("manifest: %s (config %s)\n", manifest.pass ? "PASS" : "FAIL",
                manifest.config_hash.c_str());
    if (manifest.pass) return kOk;
    for (const levyhom::StageResult& s : manifest.stages)
        if (!s.pass && s.note.find("did not") != std::string::npos)
            return kNoConvergence;
    return kInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal-operator homogenization toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::vector<std::pair<std::string, std::vector<std::string>>> stage_cmds = {
        {"kernel-check", {"kernel-check"}},
        {"env-gen", {"env-gen"}},
        {"corrector", {"corrector"}},
        {"effective", {"corrector", "effective"}},
        {"resolvent-sweep", {"resolvent-sweep"}},
        {"simulate", {"simulate"}},
    };

    std::string chosen;
    for (auto& [name, stages] : stage_cmds) {
        CLI::App* cmd = app.add_subcommand(
            name, name == "effective"
                      ? "solve the corrector and assemble the effective matrix"
                      : "run the " + name + " stage");
        add_common(cmd, args);
        cmd->callback([&chosen, name = name] { chosen = name; });
    }
    CLI::App* run_cmd = app.add_subcommand("run", "run every configured stage");
    add_common(run_cmd, args);
    run_cmd->callback([&chosen] { chosen = "run"; });

    CLI::App* val_cmd = app.add_subcommand("validate", "fast invariant suite");
    add_common(val_cmd, args);
    val_cmd->callback([&chosen] { chosen = "validate"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (chosen == "validate") {
            levyhom::ValidationOptions opts;
            if (args.threads > 0) opts.threads = args.threads;
            auto checks = levyhom::validate(opts);
            bool ok = true;
            for (const auto& c : checks) {
                std::printf("%-28s %s  (%.3g)\n", c.name.c_str(),
                            c.pass ? "PASS" : "FAIL", c.value);
                ok = ok && c.pass;
            }
            return ok ? kOk : kInvariantFailure;
        }
        if (chosen == "run") return run_stages(args, {});
        for (auto& [name, stages] : stage_cmds)
            if (name == chosen) return run_stages(args, stages);
        return kConfigError;
    } catch (const levyhom::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const levyhom::ConvergenceError& e) {
        std::fprintf(stderr, "no convergence: %s\n", e.what());
        return kNoConvergence;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInvariantFailure;
    }
}
