#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "clab/engine.hpp"
#include "clab/errors.hpp"
#include "clab/objectives.hpp"
#include "clab/rng.hpp"
#include "clab/run.hpp"
#include "clab/topology.hpp"
#include "doctest.h"

using namespace clab;
using namespace clab::engine;
using objectives::Batch;
using objectives::Problem;

namespace {

// single-sample scalar quadratic: loss = 0.5*h*w^2 + b*w
Problem scalar_quadratic(double h, double b) {
    Mat hm(1, 1);
    hm(0, 0) = h;
    Problem prob;
    prob.objective = std::make_shared<objectives::QuadraticObjective>(
        std::vector<Mat>{hm}, std::vector<Vec>{Vec{b}});
    prob.dataset.n = 1;
    prob.dataset.shards = {{0}};
    return prob;
}

}  // namespace

TEST_CASE("sgd on a scalar quadratic follows the hand-computed iterate") {
    const Problem prob = scalar_quadratic(2.0, 0.0);
    TrainerConfig cfg;
    cfg.eta = 0.25;
    cfg.full_batch = true;
    const auto out = sgd_step(Vec{1.0}, *prob.objective, prob.dataset, cfg, 0);
    CHECK(out.weight[0] == doctest::Approx(0.5).epsilon(1e-15));
    // contraction factor (1 - eta*h) = 0.5 per step
    Vec w = {1.0};
    for (int t = 0; t < 6; ++t) w = sgd_step(w, *prob.objective, prob.dataset, cfg, t).weight;
    CHECK(w[0] == doctest::Approx(std::pow(0.5, 6)).epsilon(1e-12));
}

TEST_CASE("sam on a scalar quadratic matches the two-point hand computation") {
    // grad(1) = 2, probe = 1 + 0.1*2/2 = 1.1, grad(1.1) = 2.2, step to 0.78
    const Problem prob = scalar_quadratic(2.0, 0.0);
    TrainerConfig cfg;
    cfg.eta = 0.1;
    cfg.sam_rho = 0.1;
    cfg.full_batch = true;
    const auto out = sam_step(Vec{1.0}, *prob.objective, prob.dataset, cfg, 0);
    CHECK(out.weight[0] == doctest::Approx(0.78).epsilon(1e-14));
}

TEST_CASE("zero-radius variants collapse onto plain sgd exactly") {
    const Problem prob = objectives::make_quadratic(4, 8, 3);
    objectives::Dataset ds = prob.dataset;
    ds.shard_uniform(1);
    TrainerConfig cfg;
    cfg.eta = 0.05;
    cfg.local_batch = 2;
    cfg.seed = 5;
    Vec w = make_ensemble(1, 4, 5, 0.7, 0.0).weights[0];

    Vec w_sgd = w, w_sam = w, w_adsam = w;
    TrainerConfig cfg_sam = cfg;
    cfg_sam.sam_rho = 0.0;
    TrainerConfig cfg_adsam = cfg;
    cfg_adsam.adsam_samples = 4;
    const Mat zero_sigma(4, 4);
    for (int t = 0; t < 5; ++t) {
        w_sgd = sgd_step(w_sgd, *prob.objective, ds, cfg, t).weight;
        w_sam = sam_step(w_sam, *prob.objective, ds, cfg_sam, t).weight;
        w_adsam = adsam_step(w_adsam, zero_sigma, *prob.objective, ds, cfg_adsam, t).weight;
    }
    for (size_t i = 0; i < 4; ++i) {
        CHECK(w_sam[i] == w_sgd[i]);
        CHECK(w_adsam[i] == w_sgd[i]);
    }
}

TEST_CASE("csgd with one worker is sgd") {
    const Problem prob = objectives::make_quadratic(3, 9, 4);
    objectives::Dataset ds = prob.dataset;
    ds.shard_uniform(1);
    TrainerConfig cfg;
    cfg.eta = 0.1;
    cfg.local_batch = 3;
    cfg.seed = 8;
    Vec a = {0.4, -0.2, 0.9}, b = a;
    for (int t = 0; t < 4; ++t) {
        a = csgd_step(a, 1, *prob.objective, ds, cfg, t).weight;
        b = sgd_step(b, *prob.objective, ds, cfg, t).weight;
    }
    for (size_t i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("full-batch dsgd on a complete graph tracks csgd exactly") {
    const Problem prob = objectives::make_quadratic(4, 12, 6);
    objectives::Dataset ds = prob.dataset;
    const int m = 4;
    ds.shard_uniform(m);
    const topology::GossipMatrix fc = topology::build_topology(topology::Kind::kFullyConnected, m);
    TrainerConfig cfg;
    cfg.eta = 0.08;
    cfg.full_batch = true;
    cfg.seed = 2;

    WorkerEnsemble ens;
    ens.m = m;
    ens.d = 4;
    const Vec w0 = make_ensemble(1, 4, 2, 0.6, 0.0).weights[0];
    ens.weights.assign(m, w0);
    Vec w = w0;
    for (int t = 0; t < 10; ++t) {
        ens.weights = dsgd_step(ens, fc, *prob.objective, ds, cfg, t).weights;
        w = csgd_step(w, m, *prob.objective, ds, cfg, t).weight;
    }
    for (int j = 0; j < m; ++j)
        for (size_t i = 0; i < 4; ++i)
            CHECK(ens.weights[static_cast<size_t>(j)][i] == doctest::Approx(w[i]).epsilon(1e-13));
}

TEST_CASE("dsgd differentiates at the pre-mix iterate") {
    // two workers, one shared sample with loss 0.5*w^2; weights 3 and 1.
    // gossip mean is 2; gradients must be taken at 3 and 1, giving
    // 2 - eta*3 and 2 - eta*1, not 2 - eta*2 twice.
    const Problem prob = scalar_quadratic(1.0, 0.0);
    objectives::Dataset ds = prob.dataset;
    ds.shards = {{0}, {0}};
    const topology::GossipMatrix fc = topology::build_topology(topology::Kind::kFullyConnected, 2);
    TrainerConfig cfg;
    cfg.eta = 0.1;
    cfg.full_batch = true;
    WorkerEnsemble ens;
    ens.m = 2;
    ens.d = 1;
    ens.weights = {Vec{3.0}, Vec{1.0}};
    const auto out = dsgd_step(ens, fc, *prob.objective, ds, cfg, 0);
    CHECK(out.weights[0][0] == doctest::Approx(2.0 - 0.1 * 3.0).epsilon(1e-15));
    CHECK(out.weights[1][0] == doctest::Approx(2.0 - 0.1 * 1.0).epsilon(1e-15));
}

TEST_CASE("iid batches are deterministic and stay inside the worker shard") {
    Problem prob = objectives::make_quadratic(2, 12, 5);
    prob.dataset.shard_uniform(3);
    TrainerConfig cfg;
    cfg.local_batch = 4;
    cfg.seed = 9;
    for (int worker = 0; worker < 3; ++worker) {
        const std::set<int> shard(prob.dataset.shards[static_cast<size_t>(worker)].begin(),
                                  prob.dataset.shards[static_cast<size_t>(worker)].end());
        const auto b1 = draw_batch(prob.dataset, cfg, worker, 7);
        const auto b2 = draw_batch(prob.dataset, cfg, worker, 7);
        CHECK(b1 == b2);
        CHECK(b1.size() == 4);
        for (int z : b1) CHECK(shard.count(z) == 1);
        CHECK(draw_batch(prob.dataset, cfg, worker, 8) != b1);
    }
}

TEST_CASE("epoch partition sampling covers each shard exactly once per epoch") {
    Problem prob = objectives::make_quadratic(2, 16, 6);
    prob.dataset.shard_uniform(2);  // shards of 8
    TrainerConfig cfg;
    cfg.local_batch = 2;
    cfg.sampling = Sampling::kEpochPartition;
    cfg.seed = 4;
    const int steps_per_epoch = 4;
    for (int worker = 0; worker < 2; ++worker) {
        for (int epoch = 0; epoch < 2; ++epoch) {
            std::multiset<int> seen;
            for (int s = 0; s < steps_per_epoch; ++s) {
                const auto b =
                    draw_batch(prob.dataset, cfg, worker, epoch * steps_per_epoch + s);
                seen.insert(b.begin(), b.end());
            }
            const auto& shard = prob.dataset.shards[static_cast<size_t>(worker)];
            CHECK(seen.size() == shard.size());
            for (int z : shard) CHECK(seen.count(z) == 1);
        }
    }
    // batch size must divide the shard
    TrainerConfig bad = cfg;
    bad.local_batch = 3;
    CHECK_THROWS_AS(draw_batch(prob.dataset, bad, 0, 0), ValidationError);
}

TEST_CASE("trainer config validation names the offending field") {
    TrainerConfig cfg;
    cfg.eta = 0.0;
    CHECK_THROWS_WITH_AS(validate_trainer_config(cfg, 4, 16), doctest::Contains("eta"),
                         ValidationError);
    cfg.eta = 0.1;
    cfg.local_batch = 0;
    CHECK_THROWS_WITH_AS(validate_trainer_config(cfg, 4, 16), doctest::Contains("local_batch"),
                         ValidationError);
    cfg.local_batch = 8;
    cfg.sampling = Sampling::kEpochPartition;
    CHECK_THROWS_AS(validate_trainer_config(cfg, 4, 16), ValidationError);
}

TEST_CASE("ensembles honor scale and diversity parameters") {
    const WorkerEnsemble tight = make_ensemble(4, 3, 7, 0.5, 0.0);
    for (int j = 1; j < 4; ++j)
        for (size_t i = 0; i < 3; ++i)
            CHECK(tight.weights[static_cast<size_t>(j)][i] == tight.weights[0][i]);
    const WorkerEnsemble spread = make_ensemble(4, 3, 7, 0.5, 0.3);
    bool any_differ = false;
    for (size_t i = 0; i < 3; ++i)
        if (spread.weights[0][i] != spread.weights[1][i]) any_differ = true;
    CHECK(any_differ);
    // same base draw: averaging many offsets stays near the tight point
    CHECK(spread.weights[0][0] != tight.weights[0][0]);
    CHECK_THROWS_AS(make_ensemble(0, 3, 7, 0.5, 0.0), ValidationError);
}

TEST_CASE("gaussian factor reconstructs the covariance") {
    DetRng rng(31, Stream::kInit);
    Mat a(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = rng.normal();
    const Mat sigma = matmul(a, transpose(a));
    const GaussianFactor f = gaussian_factor(sigma);
    // basis * diag(sqrt_eigs^2) * basis^T == sigma
    Mat recon(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k)
                acc += f.basis(i, k) * f.sqrt_eigs[static_cast<size_t>(k)] *
                       f.sqrt_eigs[static_cast<size_t>(k)] * f.basis(j, k);
            recon(i, j) = acc;
        }
    CHECK(frobenius_norm(recon - sigma) < 1e-9);

    Mat indef(2, 2);
    indef(0, 0) = 1.0;
    indef(1, 1) = -1.0;
    CHECK_THROWS_AS(gaussian_factor(indef), ValidationError);
}

TEST_CASE("run_experiment records on cadence and always captures the endpoint") {
    Problem prob = objectives::make_quadratic(3, 12, 8);
    const topology::GossipMatrix ring = topology::build_topology(topology::Kind::kRing, 4);
    TrainerConfig cfg;
    cfg.algorithm = Algorithm::kDsgd;
    cfg.eta = 0.05;
    cfg.local_batch = 2;
    cfg.steps = 7;
    cfg.seed = 3;
    cfg.init_diversity = 0.2;
    RunSettings settings;
    settings.cadence = 3;
    settings.record.sharpness_samples = 0;
    const RunResult res = engine::run_experiment(prob, ring, cfg, settings);
    REQUIRE(res.records.size() == 4);  // steps 0, 3, 6 and the endpoint 7
    CHECK(res.records[0].step == 0);
    CHECK(res.records[1].step == 3);
    CHECK(res.records[2].step == 6);
    CHECK(res.records[3].step == 7);
    CHECK(res.steps_completed == 7);
    CHECK(!res.diverged);
    CHECK(res.final_ensemble.m == 4);

    // steps=0 still produces exactly one record
    TrainerConfig cfg0 = cfg;
    cfg0.steps = 0;
    const RunResult res0 = engine::run_experiment(prob, ring, cfg0, settings);
    CHECK(res0.records.size() == 1);
    CHECK(res0.records[0].step == 0);
}

TEST_CASE("run_experiment flags divergence instead of throwing") {
    Problem prob = objectives::make_quadratic(3, 12, 8);
    const topology::GossipMatrix fc = topology::build_topology(topology::Kind::kFullyConnected, 1);
    TrainerConfig cfg;
    cfg.algorithm = Algorithm::kSgd;
    cfg.eta = 1e6;  // way beyond 2/L
    cfg.local_batch = 2;
    cfg.steps = 400;
    cfg.seed = 3;
    RunSettings settings;
    settings.cadence = 100;
    settings.record.sharpness_samples = 0;
    const RunResult res = engine::run_experiment(prob, fc, cfg, settings);
    CHECK(res.diverged);
    CHECK(res.steps_completed < 400);
    for (const double v : res.final_ensemble.weights[0]) CHECK(std::isfinite(v));
}

TEST_CASE("single-model algorithms reject multi-worker topologies") {
    Problem prob = objectives::make_quadratic(3, 12, 8);
    const topology::GossipMatrix ring = topology::build_topology(topology::Kind::kRing, 4);
    TrainerConfig cfg;
    cfg.algorithm = Algorithm::kSgd;
    cfg.eta = 0.05;
    cfg.local_batch = 2;
    cfg.steps = 3;
    RunSettings settings;
    CHECK_THROWS_AS(engine::run_experiment(prob, ring, cfg, settings), ValidationError);
}

TEST_CASE("algorithm and sampling names round-trip") {
    for (Algorithm a : {Algorithm::kDsgd, Algorithm::kCsgd, Algorithm::kSgd, Algorithm::kSam,
                        Algorithm::kAdsam})
        CHECK(algorithm_from_string(algorithm_to_string(a)) == a);
    CHECK_THROWS_AS(algorithm_from_string("adamw"), ValidationError);
    CHECK_THROWS_AS(sampling_from_string("bootstrap"), ValidationError);
}
