#pragma once

#include <cstdint>
#include <string>

#include "clab/config.hpp"
#include "clab/engine.hpp"
#include "clab/linalg.hpp"

namespace clab::cli {

// Outcome of one experiment execution, with the endpoint state kept around
// for sweep summaries.
struct RunSummary {
    bool diverged = false;
    int steps_completed = 0;
    double final_loss = 0.0;
    double final_consensus = 0.0;
    engine::WorkerEnsemble final_ensemble;
};

// Runs the experiment and writes metrics.jsonl, manifest.json and (when
// enabled) landscape.csv into cfg.output_dir. Throws ValidationError on bad
// configuration; divergence is reported in the summary, not thrown.
RunSummary execute_run(const config::ExperimentConfig& cfg);

// Subcommand entry points returning process exit codes:
// 0 success, 1 validation failure, 2 divergence.
int cmd_run(const std::string& config_path);
int cmd_verify(const std::string& suite, uint64_t seed);
int cmd_topology_info(const std::string& kind, int m);
int cmd_sweep(const std::string& config_path, const std::string& axis_spec);

}  // namespace clab::cli
