#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clab/engine.hpp"
#include "clab/objectives.hpp"
#include "clab/topology.hpp"

namespace clab::config {

struct ObjectiveConfig {
    std::string family = "quadratic";  // quadratic | cubic | mlp | kink | csv
    int d = 10;
    int n = 40;
    uint64_t seed = 1;
    double cubic_scale = 0.1;    // cubic family
    double quartic_coeff = 0.01;  // cubic family
    int hidden = 8;               // mlp / csv families
    std::string data = "two_moons";
    double delta = 0.01;  // kink family
    std::string csv_path;
};

struct TopologyConfig {
    std::string kind = "ring";
    int m = 8;
    bool shuffle = false;
    uint64_t shuffle_seed = 0;
    std::string file;  // custom kind
};

struct DiagnosticsConfig {
    int cadence = 1;
    int sharpness_samples = 0;
    bool hessian_alignment = true;
    bool record_xi = false;
    bool regularizers = false;
};

struct LandscapeConfig {
    bool enabled = false;
    std::string mode = "1d";  // 1d | 2d
    double extent = 1.0;
    int resolution = 25;
    uint64_t seed = 0;
};

struct ExperimentConfig {
    ObjectiveConfig objective;
    TopologyConfig topology;
    engine::TrainerConfig trainer;
    DiagnosticsConfig diagnostics;
    LandscapeConfig landscape;
    std::string output_dir = "out";
};

// Flat `section.key = value` files; '#' starts a comment; unknown keys are
// rejected by name. Throws ValidationError on any problem.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Applies one `section.key = value` assignment (sweep axes reuse the parser's
// key table, so axis typos fail the same way config typos do).
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Every key in sorted order as `key=value` lines; the digest below is FNV-1a
// over exactly this text, so identical effective configs hash identically.
std::string canonical_config_string(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);  // 16 hex digits

objectives::Problem build_objective(const ObjectiveConfig& cfg);
topology::GossipMatrix build_gossip(const TopologyConfig& cfg);

}  // namespace clab::config
