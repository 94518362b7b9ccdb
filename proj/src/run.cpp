#include "clab/run.hpp"

#include <chrono>
#include <utility>

#include "clab/errors.hpp"

namespace clab::engine {

namespace {

WorkerEnsemble single_view(const Vec& w) {
    WorkerEnsemble ens;
    ens.m = 1;
    ens.d = static_cast<int>(w.size());
    ens.weights = {w};
    return ens;
}

}  // namespace

RunResult run_experiment(objectives::Problem prob, const topology::GossipMatrix& p,
                         const TrainerConfig& cfg, const RunSettings& settings) {
    const objectives::Objective& obj = *prob.objective;
    const int m = p.m;
    const bool multi = cfg.algorithm == Algorithm::kDsgd;
    const bool sharded = cfg.algorithm == Algorithm::kDsgd || cfg.algorithm == Algorithm::kCsgd;
    if (!sharded && m != 1)
        throw ValidationError("run_experiment: " + algorithm_to_string(cfg.algorithm) +
                              " is single-worker; use a topology with m == 1");
    if (settings.cadence < 1) throw ValidationError("run_experiment: cadence must be >= 1");
    validate_trainer_config(cfg, m, obj.num_samples());
    if (static_cast<int>(prob.dataset.shards.size()) != m) prob.dataset.shard_uniform(m);

    // adsam trains against an isotropic covariance at the vanilla-SAM radius.
    Mat sigma;
    if (cfg.algorithm == Algorithm::kAdsam) {
        sigma = Mat(obj.dim(), obj.dim());
        for (int i = 0; i < obj.dim(); ++i) sigma(i, i) = cfg.sam_rho * cfg.sam_rho;
    }

    WorkerEnsemble ens;
    Vec w;
    if (multi) {
        ens = make_ensemble(m, obj.dim(), cfg.seed, cfg.init_scale, cfg.init_diversity);
    } else {
        ens = make_ensemble(1, obj.dim(), cfg.seed, cfg.init_scale, 0.0);
        w = ens.weights[0];
    }

    RunResult result;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    auto current_view = [&]() -> WorkerEnsemble { return multi ? ens : single_view(w); };
    auto record_state = [&](int step) {
        diag::DiagnosticsRecord rec =
            diag::measure_record(obj, current_view(), step, settings.record, cfg.eta, cfg.seed);
        rec.wall_clock_seconds = elapsed();
        result.records.push_back(std::move(rec));
    };

    for (int t = 0; t < cfg.steps; ++t) {
        if (t % settings.cadence == 0) record_state(t);
        if (settings.keep_snapshots) result.snapshots.push_back(current_view().weights);
        try {
            switch (cfg.algorithm) {
                case Algorithm::kDsgd: {
                    StepOutcome out = dsgd_step(ens, p, obj, prob.dataset, cfg, t);
                    ens.weights = std::move(out.weights);
                    break;
                }
                case Algorithm::kCsgd:
                    w = csgd_step(w, m, obj, prob.dataset, cfg, t).weight;
                    break;
                case Algorithm::kSgd:
                    w = sgd_step(w, obj, prob.dataset, cfg, t).weight;
                    break;
                case Algorithm::kSam:
                    w = sam_step(w, obj, prob.dataset, cfg, t).weight;
                    break;
                case Algorithm::kAdsam:
                    w = adsam_step(w, sigma, obj, prob.dataset, cfg, t).weight;
                    break;
            }
        } catch (const DivergenceError&) {
            result.diverged = true;
            result.steps_completed = t;
            result.final_ensemble = current_view();
            return result;
        }
    }

    record_state(cfg.steps);
    if (settings.keep_snapshots) result.snapshots.push_back(current_view().weights);
    result.steps_completed = cfg.steps;
    result.final_ensemble = current_view();
    return result;
}

}  // namespace clab::engine
