#include "clab/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "clab/diagnostics.hpp"
#include "clab/equivalence.hpp"
#include "clab/errors.hpp"
#include "clab/objectives.hpp"
#include "clab/run.hpp"
#include "clab/topology.hpp"
#include "clab/verify.hpp"
#include "json.hpp"

namespace clab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string iso_now_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// dsgd honors the configured topology; csgd only needs the worker count (its
// averaging is exact, so the graph is coerced to fully connected); the
// single-model algorithms require m = 1.
topology::GossipMatrix gossip_for(const config::ExperimentConfig& cfg) {
    switch (cfg.trainer.algorithm) {
        case engine::Algorithm::kDsgd:
            return config::build_gossip(cfg.topology);
        case engine::Algorithm::kCsgd:
            return topology::build_topology(topology::Kind::kFullyConnected, cfg.topology.m);
        default:
            break;
    }
    if (cfg.topology.m != 1)
        throw ValidationError("trainer.algorithm '" +
                              engine::algorithm_to_string(cfg.trainer.algorithm) +
                              "' runs a single worker; set topology.m = 1");
    return topology::build_topology(topology::Kind::kFullyConnected, 1);
}

engine::RunSettings settings_for(const config::ExperimentConfig& cfg) {
    engine::RunSettings s;
    s.cadence = cfg.diagnostics.cadence;
    s.record.sharpness_samples = cfg.diagnostics.sharpness_samples;
    s.record.hessian_alignment = cfg.diagnostics.hessian_alignment;
    s.record.record_xi = cfg.diagnostics.record_xi;
    s.record.regularizers = cfg.diagnostics.regularizers;
    s.record.regularizer_batch = cfg.trainer.full_batch ? 0 : cfg.trainer.local_batch;
    return s;
}

std::vector<int> all_of(const objectives::Objective& obj) {
    std::vector<int> idx(static_cast<size_t>(obj.num_samples()));
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
}

ordered_json config_as_json(const config::ExperimentConfig& cfg) {
    ordered_json out = ordered_json::object();
    std::istringstream lines(config::canonical_config_string(cfg));
    std::string line;
    while (std::getline(lines, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

int thread_cap() {
    const char* env = std::getenv("CONSENSUS_LAB_THREADS");
    if (env == nullptr) return 1;
    const long v = std::strtol(env, nullptr, 10);
    if (v < 1) return 1;
    if (v > 64) return 64;
    return static_cast<int>(v);
}

std::string sanitize_component(std::string s) {
    for (char& c : s)
        if (c == '/' || c == '\\' || c == ' ') c = '_';
    return s;
}

}  // namespace

RunSummary execute_run(const config::ExperimentConfig& cfg) {
    objectives::Problem prob = config::build_objective(cfg.objective);
    const topology::GossipMatrix gossip = gossip_for(cfg);
    const engine::RunSettings settings = settings_for(cfg);

    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    const std::string started = iso_now_utc();

    const engine::RunResult result = engine::run_experiment(prob, gossip, cfg.trainer, settings);

    {
        std::ofstream metrics(out_dir / "metrics.jsonl", std::ios::binary);
        if (!metrics) throw ValidationError("cannot write " + (out_dir / "metrics.jsonl").string());
        for (const auto& rec : result.records)
            metrics << diag::record_to_json(rec, settings.record) << '\n';
    }

    const objectives::Objective& obj = *prob.objective;
    const Vec w_a = result.final_ensemble.averaged_model();
    std::vector<std::string> files = {"metrics.jsonl", "manifest.json"};

    if (cfg.landscape.enabled) {
        const diag::SliceMode mode =
            cfg.landscape.mode == "2d" ? diag::SliceMode::k2d : diag::SliceMode::k1d;
        const diag::LandscapeGrid grid = diag::landscape_slice(
            obj, w_a, mode, cfg.landscape.extent, cfg.landscape.resolution, cfg.landscape.seed);
        std::ofstream csv(out_dir / "landscape.csv", std::ios::binary);
        if (!csv) throw ValidationError("cannot write " + (out_dir / "landscape.csv").string());
        csv << diag::landscape_to_csv(grid);
        files.push_back("landscape.csv");
    }

    RunSummary summary;
    summary.diverged = result.diverged;
    summary.steps_completed = result.steps_completed;
    summary.final_loss = objectives::batch_loss(obj, w_a, all_of(obj));
    summary.final_consensus = diag::consensus_distance(result.final_ensemble);
    summary.final_ensemble = result.final_ensemble;

    ordered_json manifest;
    manifest["tool"] = "consensus-lab";
    manifest["version"] = "0.1.0";
    manifest["config_hash"] = config::config_hash(cfg);
    manifest["config"] = config_as_json(cfg);
    manifest["seeds"] = {{"objective", cfg.objective.seed},
                         {"trainer", cfg.trainer.seed},
                         {"topology_shuffle", cfg.topology.shuffle_seed},
                         {"landscape", cfg.landscape.seed}};
    manifest["started_at"] = started;
    manifest["finished_at"] = iso_now_utc();
    manifest["steps_completed"] = result.steps_completed;
    manifest["diverged"] = result.diverged;
    manifest["records"] = static_cast<int>(result.records.size());
    manifest["files"] = files;
    std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
    if (!mf) throw ValidationError("cannot write " + (out_dir / "manifest.json").string());
    mf << manifest.dump(2) << '\n';

    return summary;
}

int cmd_run(const std::string& config_path) {
    const config::ExperimentConfig cfg = config::parse_config_file(config_path);
    const RunSummary summary = execute_run(cfg);
    std::cout << "run " << (summary.diverged ? "diverged" : "complete") << ": steps="
              << summary.steps_completed << " loss=" << format_double(summary.final_loss)
              << " consensus=" << format_double(summary.final_consensus) << " -> "
              << cfg.output_dir << "\n";
    return summary.diverged ? 2 : 0;
}

int cmd_verify(const std::string& suite, uint64_t seed) {
    const std::vector<verify::CriterionResult> results = verify::run_suite(suite, seed);
    int hard_total = 0, hard_passed = 0;
    ordered_json doc;
    doc["suite"] = suite;
    doc["seed"] = seed;
    ordered_json entries = ordered_json::array();
    for (const auto& r : results) {
        std::printf("%s %s%s (%.2fs)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.hard ? "" : " [soft]", r.seconds);
        std::fflush(stdout);
        if (r.hard) {
            ++hard_total;
            hard_passed += r.pass ? 1 : 0;
        }
        ordered_json e;
        e["name"] = r.name;
        e["hard"] = r.hard;
        e["pass"] = r.pass;
        e["seconds"] = r.seconds;
        e["details"] = r.details;
        entries.push_back(std::move(e));
    }
    const bool ok = verify::hard_pass(results);
    doc["results"] = std::move(entries);
    doc["hard_pass"] = ok;
    const std::string out_name = "verify_" + suite + ".json";
    std::ofstream out(out_name, std::ios::binary);
    out << doc.dump(2) << '\n';
    std::printf("suite %s: %d/%d hard criteria passed -> %s\n", suite.c_str(), hard_passed,
                hard_total, out_name.c_str());
    return ok ? 0 : 1;
}

int cmd_topology_info(const std::string& kind, int m) {
    const topology::GossipMatrix p =
        topology::build_topology(topology::kind_from_string(kind), m);
    const topology::SpectralReport report = topology::spectral_report(p);
    ordered_json doc;
    doc["kind"] = kind;
    doc["m"] = m;
    doc["spectral_gap"] = report.spectral_gap;
    doc["lambda"] = report.lambda;
    doc["eigenvalues"] = report.eigenvalues;
    if (m <= 16) {
        ordered_json rows = ordered_json::array();
        for (int i = 0; i < m; ++i) {
            ordered_json row = ordered_json::array();
            for (int j = 0; j < m; ++j) row.push_back(p.entries(i, j));
            rows.push_back(std::move(row));
        }
        doc["matrix"] = std::move(rows);
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_spec) {
    const size_t eq = axis_spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= axis_spec.size())
        throw ValidationError("sweep axis must look like key=v1,v2,...");
    const std::string key = axis_spec.substr(0, eq);
    std::vector<std::string> values;
    std::istringstream vals(axis_spec.substr(eq + 1));
    std::string item;
    while (std::getline(vals, item, ',')) {
        if (!item.empty()) values.push_back(item);
    }
    if (values.empty()) throw ValidationError("sweep axis has no values");

    const config::ExperimentConfig base = config::parse_config_file(config_path);
    const fs::path base_dir(base.output_dir);

    // validate every point before launching anything
    std::vector<config::ExperimentConfig> points;
    points.reserve(values.size());
    for (const std::string& v : values) {
        config::ExperimentConfig cfg = base;
        config::apply_override(cfg, key, v);
        cfg.output_dir = (base_dir / sanitize_component(key + "=" + v)).string();
        const objectives::Problem prob = config::build_objective(cfg.objective);
        const topology::GossipMatrix gossip = gossip_for(cfg);
        engine::validate_trainer_config(cfg.trainer, gossip.m, prob.objective->num_samples());
        points.push_back(std::move(cfg));
    }

    struct Row {
        std::string value;
        bool diverged = false;
        double final_loss = 0.0;
        double final_consensus = 0.0;
        double lambda_max = 0.0;
        double sharpness = 0.0;
    };
    std::vector<Row> rows(points.size());
    std::vector<std::string> errors(points.size());
    std::atomic<size_t> cursor{0};

    const auto worker = [&]() {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= points.size()) return;
            try {
                const RunSummary summary = execute_run(points[i]);
                const objectives::Problem prob = config::build_objective(points[i].objective);
                const objectives::Objective& obj = *prob.objective;
                const Vec w_a = summary.final_ensemble.averaged_model();
                Row row;
                row.value = values[i];
                row.diverged = summary.diverged;
                row.final_loss = summary.final_loss;
                row.final_consensus = summary.final_consensus;
                row.lambda_max = equiv::lambda_max_hessian(obj, w_a, all_of(obj));
                const Mat xi = diag::weight_diversity_matrix(summary.final_ensemble);
                row.sharpness =
                    diag::avg_direction_sharpness(obj, w_a, xi, 256, points[i].trainer.seed).value;
                rows[i] = std::move(row);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };

    const int threads = std::min<int>(thread_cap(), static_cast<int>(points.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            throw ValidationError("sweep point " + key + "=" + values[i] + " failed: " + errors[i]);

    fs::create_directories(base_dir);
    const fs::path summary_path = base_dir / "sweep_summary.csv";
    std::ofstream csv(summary_path, std::ios::binary);
    if (!csv) throw ValidationError("cannot write " + summary_path.string());
    csv << "axis,value,final_loss,final_consensus,lambda_max,sharpness,diverged\n";
    for (const Row& row : rows) {
        csv << key << ',' << row.value << ',' << format_double(row.final_loss) << ','
            << format_double(row.final_consensus) << ',' << format_double(row.lambda_max) << ','
            << format_double(row.sharpness) << ',' << (row.diverged ? "true" : "false") << '\n';
    }
    std::cout << "sweep complete: " << rows.size() << " runs -> " << summary_path.string()
              << "\n";
    return 0;
}

}  // namespace clab::cli
