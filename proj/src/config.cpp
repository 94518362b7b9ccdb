#include "clab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "clab/errors.hpp"

namespace clab::config {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long out = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<int>(out);
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected an integer, got '" + v + "'");
    }
}

uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        unsigned long long out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return static_cast<uint64_t>(out);
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected an unsigned integer, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ValidationError(key + ": expected true or false, got '" + v + "'");
}

int to_positive_int(const std::string& key, const std::string& v) {
    const int out = to_int(key, v);
    if (out < 1) throw ValidationError(key + " must be >= 1");
    return out;
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& raw_key,
                    const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(raw_value);

    if (key == "objective.family") {
        if (v != "quadratic" && v != "cubic" && v != "mlp" && v != "kink" && v != "csv")
            throw ValidationError("objective.family: unknown family '" + v + "'");
        cfg.objective.family = v;
    } else if (key == "objective.d") {
        cfg.objective.d = to_positive_int(key, v);
    } else if (key == "objective.n") {
        cfg.objective.n = to_positive_int(key, v);
    } else if (key == "objective.seed") {
        cfg.objective.seed = to_u64(key, v);
    } else if (key == "objective.cubic_scale") {
        cfg.objective.cubic_scale = to_double(key, v);
    } else if (key == "objective.quartic_coeff") {
        cfg.objective.quartic_coeff = to_double(key, v);
        if (cfg.objective.quartic_coeff < 0.0)
            throw ValidationError("objective.quartic_coeff must be >= 0");
    } else if (key == "objective.hidden") {
        cfg.objective.hidden = to_positive_int(key, v);
    } else if (key == "objective.data") {
        objectives::planar_kind_from_string(v);  // validates
        cfg.objective.data = v;
    } else if (key == "objective.delta") {
        cfg.objective.delta = to_double(key, v);
        if (cfg.objective.delta <= 0.0) throw ValidationError("objective.delta must be positive");
    } else if (key == "objective.csv_path") {
        cfg.objective.csv_path = v;
    } else if (key == "topology.kind") {
        topology::kind_from_string(v);  // validates
        cfg.topology.kind = v;
    } else if (key == "topology.m") {
        cfg.topology.m = to_positive_int(key, v);
    } else if (key == "topology.shuffle") {
        cfg.topology.shuffle = to_bool(key, v);
    } else if (key == "topology.shuffle_seed") {
        cfg.topology.shuffle_seed = to_u64(key, v);
    } else if (key == "topology.file") {
        cfg.topology.file = v;
    } else if (key == "trainer.algorithm") {
        cfg.trainer.algorithm = engine::algorithm_from_string(v);
    } else if (key == "trainer.eta") {
        cfg.trainer.eta = to_double(key, v);
        if (cfg.trainer.eta <= 0.0) throw ValidationError("trainer.eta must be positive");
    } else if (key == "trainer.local_batch") {
        cfg.trainer.local_batch = to_positive_int(key, v);
    } else if (key == "trainer.full_batch") {
        cfg.trainer.full_batch = to_bool(key, v);
    } else if (key == "trainer.steps") {
        cfg.trainer.steps = to_int(key, v);
        if (cfg.trainer.steps < 0) throw ValidationError("trainer.steps must be >= 0");
    } else if (key == "trainer.sampling") {
        cfg.trainer.sampling = engine::sampling_from_string(v);
    } else if (key == "trainer.sam_rho") {
        cfg.trainer.sam_rho = to_double(key, v);
        if (cfg.trainer.sam_rho < 0.0) throw ValidationError("trainer.sam_rho must be >= 0");
    } else if (key == "trainer.adsam_samples") {
        cfg.trainer.adsam_samples = to_positive_int(key, v);
    } else if (key == "trainer.seed") {
        cfg.trainer.seed = to_u64(key, v);
    } else if (key == "trainer.init_scale") {
        cfg.trainer.init_scale = to_double(key, v);
        if (cfg.trainer.init_scale < 0.0) throw ValidationError("trainer.init_scale must be >= 0");
    } else if (key == "trainer.init_diversity") {
        cfg.trainer.init_diversity = to_double(key, v);
        if (cfg.trainer.init_diversity < 0.0)
            throw ValidationError("trainer.init_diversity must be >= 0");
    } else if (key == "diagnostics.cadence") {
        cfg.diagnostics.cadence = to_positive_int(key, v);
    } else if (key == "diagnostics.sharpness_samples") {
        cfg.diagnostics.sharpness_samples = to_int(key, v);
        if (cfg.diagnostics.sharpness_samples < 0)
            throw ValidationError("diagnostics.sharpness_samples must be >= 0");
    } else if (key == "diagnostics.hessian_alignment") {
        cfg.diagnostics.hessian_alignment = to_bool(key, v);
    } else if (key == "diagnostics.record_xi") {
        cfg.diagnostics.record_xi = to_bool(key, v);
    } else if (key == "diagnostics.regularizers") {
        cfg.diagnostics.regularizers = to_bool(key, v);
    } else if (key == "landscape.enabled") {
        cfg.landscape.enabled = to_bool(key, v);
    } else if (key == "landscape.mode") {
        if (v != "1d" && v != "2d") throw ValidationError("landscape.mode must be 1d or 2d");
        cfg.landscape.mode = v;
    } else if (key == "landscape.extent") {
        cfg.landscape.extent = to_double(key, v);
        if (cfg.landscape.extent < 0.0) throw ValidationError("landscape.extent must be >= 0");
    } else if (key == "landscape.resolution") {
        cfg.landscape.resolution = to_int(key, v);
        if (cfg.landscape.resolution < 3)
            throw ValidationError("landscape.resolution must be >= 3");
    } else if (key == "landscape.seed") {
        cfg.landscape.seed = to_u64(key, v);
    } else if (key == "output.dir") {
        if (v.empty()) throw ValidationError("output.dir must not be empty");
        cfg.output_dir = v;
    } else {
        throw ValidationError("unknown config key '" + key + "'");
    }
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_no) +
                                  ": expected key = value");
        try {
            apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ValidationError& e) {
            throw ValidationError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string canonical_config_string(const ExperimentConfig& cfg) {
    std::ostringstream out;
    auto b = [](bool v) { return v ? "true" : "false"; };
    // alphabetical by key, one per line
    out << "diagnostics.cadence=" << cfg.diagnostics.cadence << '\n';
    out << "diagnostics.hessian_alignment=" << b(cfg.diagnostics.hessian_alignment) << '\n';
    out << "diagnostics.record_xi=" << b(cfg.diagnostics.record_xi) << '\n';
    out << "diagnostics.regularizers=" << b(cfg.diagnostics.regularizers) << '\n';
    out << "diagnostics.sharpness_samples=" << cfg.diagnostics.sharpness_samples << '\n';
    out << "landscape.enabled=" << b(cfg.landscape.enabled) << '\n';
    out << "landscape.extent=" << format_double(cfg.landscape.extent) << '\n';
    out << "landscape.mode=" << cfg.landscape.mode << '\n';
    out << "landscape.resolution=" << cfg.landscape.resolution << '\n';
    out << "landscape.seed=" << cfg.landscape.seed << '\n';
    out << "objective.csv_path=" << cfg.objective.csv_path << '\n';
    out << "objective.cubic_scale=" << format_double(cfg.objective.cubic_scale) << '\n';
    out << "objective.d=" << cfg.objective.d << '\n';
    out << "objective.data=" << cfg.objective.data << '\n';
    out << "objective.delta=" << format_double(cfg.objective.delta) << '\n';
    out << "objective.family=" << cfg.objective.family << '\n';
    out << "objective.hidden=" << cfg.objective.hidden << '\n';
    out << "objective.n=" << cfg.objective.n << '\n';
    out << "objective.quartic_coeff=" << format_double(cfg.objective.quartic_coeff) << '\n';
    out << "objective.seed=" << cfg.objective.seed << '\n';
    out << "output.dir=" << cfg.output_dir << '\n';
    out << "topology.file=" << cfg.topology.file << '\n';
    out << "topology.kind=" << cfg.topology.kind << '\n';
    out << "topology.m=" << cfg.topology.m << '\n';
    out << "topology.shuffle=" << b(cfg.topology.shuffle) << '\n';
    out << "topology.shuffle_seed=" << cfg.topology.shuffle_seed << '\n';
    out << "trainer.adsam_samples=" << cfg.trainer.adsam_samples << '\n';
    out << "trainer.algorithm=" << engine::algorithm_to_string(cfg.trainer.algorithm) << '\n';
    out << "trainer.eta=" << format_double(cfg.trainer.eta) << '\n';
    out << "trainer.full_batch=" << b(cfg.trainer.full_batch) << '\n';
    out << "trainer.init_diversity=" << format_double(cfg.trainer.init_diversity) << '\n';
    out << "trainer.init_scale=" << format_double(cfg.trainer.init_scale) << '\n';
    out << "trainer.local_batch=" << cfg.trainer.local_batch << '\n';
    out << "trainer.sam_rho=" << format_double(cfg.trainer.sam_rho) << '\n';
    out << "trainer.sampling="
        << (cfg.trainer.sampling == engine::Sampling::kIid ? "iid" : "epoch_partition") << '\n';
    out << "trainer.seed=" << cfg.trainer.seed << '\n';
    out << "trainer.steps=" << cfg.trainer.steps << '\n';
    return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = canonical_config_string(cfg);
    uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
    for (unsigned char c : text) {
        h ^= static_cast<uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

objectives::Problem build_objective(const ObjectiveConfig& cfg) {
    if (cfg.family == "quadratic") return objectives::make_quadratic(cfg.d, cfg.n, cfg.seed);
    if (cfg.family == "cubic")
        return objectives::make_cubic_perturbed(cfg.d, cfg.n, cfg.seed, cfg.cubic_scale,
                                                cfg.quartic_coeff);
    if (cfg.family == "mlp")
        return objectives::make_mlp(cfg.hidden, cfg.seed,
                                    objectives::planar_kind_from_string(cfg.data), cfg.n);
    if (cfg.family == "kink") return objectives::make_huber_kink(cfg.n, cfg.seed, cfg.delta);
    if (cfg.family == "csv") {
        if (cfg.csv_path.empty())
            throw ValidationError("objective.csv_path is required for the csv family");
        objectives::CsvData data = objectives::load_csv_dataset(cfg.csv_path);
        return objectives::make_mlp_from_data(cfg.hidden, std::move(data.features),
                                              std::move(data.labels));
    }
    throw ValidationError("objective.family: unknown family '" + cfg.family + "'");
}

topology::GossipMatrix build_gossip(const TopologyConfig& cfg) {
    topology::GossipMatrix p;
    if (cfg.kind == "custom") {
        if (cfg.file.empty())
            throw ValidationError("topology.file is required for the custom kind");
        p = topology::load_topology_file(cfg.file);
    } else {
        p = topology::build_topology(topology::kind_from_string(cfg.kind), cfg.m);
    }
    if (cfg.shuffle) p = topology::shuffle_workers(p, cfg.shuffle_seed);
    return p;
}

}  // namespace clab::config
