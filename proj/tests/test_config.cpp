#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <string>

#include "clab/config.hpp"
#include "clab/engine.hpp"
#include "clab/errors.hpp"
#include "doctest.h"

using namespace clab;
using namespace clab::config;

namespace {
std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}
}  // namespace

TEST_CASE("config text parses into typed fields") {
    const ExperimentConfig cfg = parse_config_text(
        "# comment\n"
        "objective.family = cubic\n"
        "objective.d = 6\n"
        "objective.cubic_scale = 0.25\n"
        "topology.kind = grid\n"
        "topology.m = 9\n"
        "trainer.algorithm = csgd\n"
        "trainer.eta = 0.2\n"
        "trainer.steps = 12\n"
        "trainer.sampling = epoch_partition\n"
        "diagnostics.cadence = 2\n"
        "landscape.enabled = true\n"
        "landscape.mode = 2d\n"
        "output.dir = /tmp/clab-test-out\n");
    CHECK(cfg.objective.family == "cubic");
    CHECK(cfg.objective.d == 6);
    CHECK(cfg.objective.cubic_scale == 0.25);
    CHECK(cfg.topology.kind == "grid");
    CHECK(cfg.topology.m == 9);
    CHECK(cfg.trainer.algorithm == engine::Algorithm::kCsgd);
    CHECK(cfg.trainer.eta == 0.2);
    CHECK(cfg.trainer.steps == 12);
    CHECK(cfg.trainer.sampling == engine::Sampling::kEpochPartition);
    CHECK(cfg.diagnostics.cadence == 2);
    CHECK(cfg.landscape.enabled);
    CHECK(cfg.landscape.mode == "2d");
    CHECK(cfg.output_dir == "/tmp/clab-test-out");
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_config_text("trainer.momentum = 0.9\n"),
                         doctest::Contains("trainer.momentum"), ValidationError);
    ExperimentConfig cfg;
    CHECK_THROWS_WITH_AS(apply_override(cfg, "objective.rank", "3"),
                         doctest::Contains("objective.rank"), ValidationError);
}

TEST_CASE("bad values name the key and the line") {
    CHECK_THROWS_WITH_AS(parse_config_text("trainer.eta = -0.5\n"),
                         doctest::Contains("trainer.eta"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config_text("objective.d = 5\ntrainer.eta = abc\n"),
                         doctest::Contains("line 2"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config_text("trainer.steps = -3\n"),
                         doctest::Contains("trainer.steps"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config_text("landscape.resolution = 2\n"),
                         doctest::Contains("landscape.resolution"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config_text("nonsense line without equals\n"),
                         doctest::Contains("line 1"), ValidationError);
}

TEST_CASE("config hash is canonical") {
    const ExperimentConfig a = parse_config_text("trainer.eta = 0.1\ntrainer.steps = 5\n");
    const ExperimentConfig b =
        parse_config_text("# reordered with noise\ntrainer.steps = 5\n\ntrainer.eta = 0.1\n");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    const ExperimentConfig c = parse_config_text("trainer.eta = 0.1\ntrainer.steps = 6\n");
    CHECK(config_hash(a) != config_hash(c));

    // the canonical text covers every key exactly once, sorted
    const std::string canon = canonical_config_string(a);
    CHECK(canon.find("trainer.eta=0.1") != std::string::npos);
    CHECK(canon.find("objective.family=quadratic") != std::string::npos);
    CHECK(canon.find("diagnostics.cadence") < canon.find("trainer.eta"));
}

TEST_CASE("config files load and missing files fail cleanly") {
    const std::string path = write_temp("clab_cfg.conf", "trainer.eta = 0.3\n");
    const ExperimentConfig cfg = parse_config_file(path);
    CHECK(cfg.trainer.eta == 0.3);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/clab.conf"), ValidationError);
}

TEST_CASE("objective construction dispatches on family") {
    ExperimentConfig cfg;
    cfg.objective.family = "quadratic";
    cfg.objective.d = 4;
    cfg.objective.n = 8;
    CHECK(build_objective(cfg.objective).objective->dim() == 4);

    cfg.objective.family = "cubic";
    CHECK(build_objective(cfg.objective).objective->dim() == 4);

    cfg.objective.family = "mlp";
    cfg.objective.hidden = 3;
    cfg.objective.n = 16;
    const auto mlp = build_objective(cfg.objective);
    CHECK(mlp.objective->dim() == 3 * 2 + 3 + 3 + 1);  // planar mlp parameter count

    cfg.objective.family = "kink";
    CHECK(build_objective(cfg.objective).objective->dim() == 1);

    cfg.objective.family = "csv";
    cfg.objective.csv_path = "";
    CHECK_THROWS_WITH_AS(build_objective(cfg.objective), doctest::Contains("csv_path"),
                         ValidationError);
    cfg.objective.csv_path = write_temp("clab_cfg_data.csv", "x1,x2,y\n0.1,0.2,1\n0.3,0.4,0\n");
    CHECK(build_objective(cfg.objective).dataset.n == 2);

    cfg.objective.family = "polynomial";
    CHECK_THROWS_WITH_AS(build_objective(cfg.objective), doctest::Contains("family"),
                         ValidationError);
}

TEST_CASE("gossip construction honors shuffle and custom files") {
    ExperimentConfig cfg;
    cfg.topology.kind = "ring";
    cfg.topology.m = 6;
    const auto plain = build_gossip(cfg.topology);
    CHECK(plain.m == 6);

    cfg.topology.shuffle = true;
    cfg.topology.shuffle_seed = 5;
    const auto shuffled = build_gossip(cfg.topology);
    bool moved = false;
    for (int i = 0; i < 6 && !moved; ++i)
        for (int j = 0; j < 6 && !moved; ++j)
            if (plain.entries(i, j) != shuffled.entries(i, j)) moved = true;
    CHECK(moved);

    cfg.topology.kind = "custom";
    cfg.topology.file = "";
    CHECK_THROWS_WITH_AS(build_gossip(cfg.topology), doctest::Contains("topology.file"),
                         ValidationError);
}

TEST_CASE("sampling strings accept both spellings") {
    CHECK(parse_config_text("trainer.sampling = iid\n").trainer.sampling ==
          engine::Sampling::kIid);
    CHECK(parse_config_text("trainer.sampling = epoch_partition\n").trainer.sampling ==
          engine::Sampling::kEpochPartition);
    CHECK_THROWS_AS(parse_config_text("trainer.sampling = bootstrap\n"), ValidationError);
}
