#pragma once

#include <vector>

#include "clab/diagnostics.hpp"
#include "clab/engine.hpp"
#include "clab/objectives.hpp"
#include "clab/topology.hpp"

namespace clab::engine {

struct RunSettings {
    int cadence = 1;  // record every `cadence` steps; the final state is always recorded
    diag::RecordOptions record;
    bool keep_snapshots = false;  // retain the pre-step weight stack of every step
};

struct RunResult {
    std::vector<diag::DiagnosticsRecord> records;
    std::vector<std::vector<Vec>> snapshots;  // per-step stacks (+ final), when kept
    bool diverged = false;
    int steps_completed = 0;
    WorkerEnsemble final_ensemble;  // m == 1 for the single-model algorithms
};

// Runs cfg.steps optimizer steps and measures diagnostics records along the
// way. dsgd uses the gossip matrix; csgd uses only its worker count for the
// shard layout; sgd/sam/adsam require a single-worker topology. Divergence
// (non-finite iterate) stops the run early and flags the partial trajectory
// instead of throwing.
RunResult run_experiment(objectives::Problem prob, const topology::GossipMatrix& p,
                         const TrainerConfig& cfg, const RunSettings& settings);

}  // namespace clab::engine
