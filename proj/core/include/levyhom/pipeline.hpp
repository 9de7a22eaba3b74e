#pragma once

#include <string>
#include <vector>

#include "levyhom/config.hpp"

namespace levyhom {

struct StageResult {
    std::string name;
    bool ran = false;
    bool pass = false;
    double seconds = 0.0;
    std::vector<std::string> outputs;
    std::string note;
};

struct RunManifest {
    std::string config_hash;
    std::string version;
    bool pass = false;
    std::vector<StageResult> stages;

    std::string to_json() const;
};

// Executes the configured stages in dependency order under out_dir. A failed
// stage marks the manifest FAILED; independent later stages still run.
RunManifest run(const ExperimentConfig& config, const std::string& out_dir);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;  // the measured defect / statistic
    std::string detail;
};

struct ValidationOptions {
    bool corrupt_symbol_table = false;  // negative-test hook
    int threads = 1;
};

// Fast cross-module invariant suite (a couple of minutes end to end).
std::vector<ValidationCheck> validate(const ValidationOptions& opts = {});

}  // namespace levyhom
