#include "clab/engine.hpp"

#include <algorithm>
#include <cmath>

#include "clab/errors.hpp"
#include "clab/rng.hpp"

namespace clab::engine {

namespace {

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void require_finite(const Vec& v, const char* what) {
    if (!all_finite(v)) throw DivergenceError(std::string("non-finite ") + what);
}

}  // namespace

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "dsgd") return Algorithm::kDsgd;
    if (name == "csgd") return Algorithm::kCsgd;
    if (name == "sgd") return Algorithm::kSgd;
    if (name == "sam") return Algorithm::kSam;
    if (name == "adsam") return Algorithm::kAdsam;
    throw ValidationError("unknown algorithm: " + name);
}

std::string algorithm_to_string(Algorithm a) {
    switch (a) {
        case Algorithm::kDsgd: return "dsgd";
        case Algorithm::kCsgd: return "csgd";
        case Algorithm::kSgd: return "sgd";
        case Algorithm::kSam: return "sam";
        case Algorithm::kAdsam: return "adsam";
    }
    return "dsgd";
}

Sampling sampling_from_string(const std::string& name) {
    if (name == "iid") return Sampling::kIid;
    if (name == "epoch_partition") return Sampling::kEpochPartition;
    throw ValidationError("unknown sampling mode: " + name);
}

void validate_trainer_config(const TrainerConfig& cfg, int m, int n) {
    if (!(cfg.eta > 0.0)) throw ValidationError("trainer.eta must be > 0");
    if (cfg.local_batch < 1) throw ValidationError("trainer.local_batch must be >= 1");
    if (cfg.steps < 0) throw ValidationError("trainer.steps must be >= 0");
    if (cfg.sam_rho < 0.0) throw ValidationError("trainer.sam_rho must be >= 0");
    if (cfg.adsam_samples < 1) throw ValidationError("trainer.adsam_samples must be >= 1");
    if (cfg.init_scale < 0.0) throw ValidationError("trainer.init_scale must be >= 0");
    if (cfg.init_diversity < 0.0) throw ValidationError("trainer.init_diversity must be >= 0");
    if (cfg.sampling == Sampling::kEpochPartition && !cfg.full_batch) {
        if (static_cast<int64_t>(m) * cfg.local_batch > n)
            throw ValidationError("epoch_partition sampling needs m * local_batch <= N");
    }
}

Vec WorkerEnsemble::averaged_model() const {
    Vec avg(static_cast<size_t>(d), 0.0);
    for (const Vec& w : weights) axpy(1.0, w, avg);
    const double inv = 1.0 / static_cast<double>(m);
    for (double& v : avg) v *= inv;
    return avg;
}

WorkerEnsemble make_ensemble(int m, int d, uint64_t seed, double init_scale,
                             double init_diversity) {
    if (m < 1 || d < 1) throw ValidationError("ensemble needs m >= 1 and d >= 1");
    WorkerEnsemble ens;
    ens.m = m;
    ens.d = d;
    Vec base(static_cast<size_t>(d));
    DetRng init_rng(seed, Stream::kInit);
    for (double& v : base) v = init_scale * init_rng.normal();
    for (int j = 0; j < m; ++j) {
        Vec w = base;
        if (init_diversity > 0.0) {
            DetRng off_rng(seed, Stream::kWorkerOffset, static_cast<uint64_t>(j));
            for (double& v : w) v += init_diversity * off_rng.normal();
        }
        ens.weights.push_back(std::move(w));
    }
    return ens;
}

std::vector<int> draw_batch(const objectives::Dataset& ds, const TrainerConfig& cfg,
                            int worker, int step) {
    if (cfg.full_batch) return ds.all_indices();
    if (worker < 0 || worker >= static_cast<int>(ds.shards.size()))
        throw ValidationError("draw_batch: dataset is not sharded for this worker count");
    const std::vector<int>& shard = ds.shards[static_cast<size_t>(worker)];
    if (shard.empty()) throw ValidationError("draw_batch: empty shard");

    std::vector<int> batch;
    batch.reserve(static_cast<size_t>(cfg.local_batch));
    if (cfg.sampling == Sampling::kIid) {
        DetRng rng(cfg.seed, Stream::kBatch, static_cast<uint64_t>(worker),
                   static_cast<uint64_t>(step));
        for (int i = 0; i < cfg.local_batch; ++i)
            batch.push_back(shard[static_cast<size_t>(rng.uniform_int(static_cast<int>(shard.size())))]);
        return batch;
    }

    const int shard_size = static_cast<int>(shard.size());
    if (shard_size % cfg.local_batch != 0)
        throw ValidationError("epoch_partition sampling needs local_batch to divide the shard size " +
                              std::to_string(shard_size));
    const int steps_per_epoch = shard_size / cfg.local_batch;
    const int epoch = step / steps_per_epoch;
    const int offset = (step % steps_per_epoch) * cfg.local_batch;
    std::vector<int> perm = shard;
    DetRng rng(cfg.seed, Stream::kEpochPerm, static_cast<uint64_t>(worker),
               static_cast<uint64_t>(epoch));
    rng.shuffle(perm);
    for (int i = 0; i < cfg.local_batch; ++i)
        batch.push_back(perm[static_cast<size_t>(offset + i)]);
    return batch;
}

StepOutcome dsgd_step(const WorkerEnsemble& ens, const topology::GossipMatrix& p,
                      const objectives::Objective& obj, const objectives::Dataset& ds,
                      const TrainerConfig& cfg, int step) {
    if (p.m != ens.m) throw ValidationError("dsgd_step: topology size does not match ensemble");
    StepOutcome out;
    std::vector<Vec> grads;
    grads.reserve(static_cast<size_t>(ens.m));
    for (int j = 0; j < ens.m; ++j) {
        objectives::Batch b{j, draw_batch(ds, cfg, j, step)};
        Vec g = objectives::batch_gradient(obj, ens.weights[static_cast<size_t>(j)], b.indices);
        require_finite(g, "gradient");
        grads.push_back(std::move(g));
        out.batches.push_back(std::move(b));
    }
    out.weights = topology::gossip_mix(p, ens.weights);
    for (int j = 0; j < ens.m; ++j) {
        axpy(-cfg.eta, grads[static_cast<size_t>(j)], out.weights[static_cast<size_t>(j)]);
        require_finite(out.weights[static_cast<size_t>(j)], "weight vector");
    }
    return out;
}

ModelStepOutcome csgd_step(const Vec& w, int m, const objectives::Objective& obj,
                           const objectives::Dataset& ds, const TrainerConfig& cfg, int step) {
    if (m < 1) throw ValidationError("csgd_step: m must be >= 1");
    ModelStepOutcome out;
    Vec mean_grad(w.size(), 0.0);
    for (int j = 0; j < m; ++j) {
        objectives::Batch b{j, draw_batch(ds, cfg, j, step)};
        Vec g = objectives::batch_gradient(obj, w, b.indices);
        require_finite(g, "gradient");
        axpy(1.0, g, mean_grad);
        out.batches.push_back(std::move(b));
    }
    const double inv = 1.0 / static_cast<double>(m);
    out.weight = w;
    for (size_t i = 0; i < w.size(); ++i) out.weight[i] -= cfg.eta * inv * mean_grad[i];
    require_finite(out.weight, "weight vector");
    return out;
}

ModelStepOutcome sgd_step(const Vec& w, const objectives::Objective& obj,
                          const objectives::Dataset& ds, const TrainerConfig& cfg, int step) {
    return csgd_step(w, 1, obj, ds, cfg, step);
}

ModelStepOutcome sam_step(const Vec& w, const objectives::Objective& obj,
                          const objectives::Dataset& ds, const TrainerConfig& cfg, int step) {
    ModelStepOutcome out;
    objectives::Batch b{0, draw_batch(ds, cfg, 0, step)};
    Vec g = objectives::batch_gradient(obj, w, b.indices);
    require_finite(g, "gradient");
    double gn = norm2(g);
    Vec probe = w;
    if (gn >= 1e-12) axpy(cfg.sam_rho / gn, g, probe);
    Vec g2 = objectives::batch_gradient(obj, probe, b.indices);
    require_finite(g2, "gradient");
    out.weight = w;
    axpy(-cfg.eta, g2, out.weight);
    require_finite(out.weight, "weight vector");
    out.batches.push_back(std::move(b));
    return out;
}

Vec GaussianFactor::apply(const Vec& xi) const {
    const int d = basis.rows;
    Vec out(static_cast<size_t>(d), 0.0);
    for (int k = 0; k < d; ++k) {
        const double s = sqrt_eigs[static_cast<size_t>(k)] * xi[static_cast<size_t>(k)];
        if (s == 0.0) continue;
        for (int r = 0; r < d; ++r) out[static_cast<size_t>(r)] += basis(r, k) * s;
    }
    return out;
}

GaussianFactor gaussian_factor(const Mat& sigma) {
    if (!sigma.square()) throw ValidationError("covariance matrix must be square");
    EigenSym eig = jacobi_eigensymmetric(sigma, true);
    GaussianFactor f;
    f.basis = eig.vectors;
    f.sqrt_eigs.resize(eig.eigenvalues.size());
    for (size_t k = 0; k < eig.eigenvalues.size(); ++k) {
        double lam = eig.eigenvalues[k];
        if (lam < -1e-6)
            throw ValidationError("covariance matrix is not PSD (eigenvalue " +
                                  format_double(lam) + ")");
        f.sqrt_eigs[k] = lam > 0.0 ? std::sqrt(lam) : 0.0;
    }
    return f;
}

ModelStepOutcome adsam_step(const Vec& w, const Mat& sigma, const objectives::Objective& obj,
                            const objectives::Dataset& ds, const TrainerConfig& cfg, int step) {
    GaussianFactor factor = gaussian_factor(sigma);
    ModelStepOutcome out;
    objectives::Batch b{0, draw_batch(ds, cfg, 0, step)};

    const int k_total = cfg.adsam_samples;
    DetRng rng(cfg.seed, Stream::kNoise, static_cast<uint64_t>(step));
    Vec mean_grad(w.size(), 0.0);
    Vec xi(w.size());
    int drawn = 0;
    while (drawn < k_total) {
        for (double& v : xi) v = rng.normal();
        for (int sign = 0; sign < 2 && drawn < k_total; ++sign, ++drawn) {
            Vec probe = w;
            Vec eps = factor.apply(xi);
            axpy(sign == 0 ? 1.0 : -1.0, eps, probe);
            Vec g = objectives::batch_gradient(obj, probe, b.indices);
            require_finite(g, "gradient");
            axpy(1.0, g, mean_grad);
        }
    }
    const double inv = 1.0 / static_cast<double>(k_total);
    out.weight = w;
    for (size_t i = 0; i < w.size(); ++i) out.weight[i] -= cfg.eta * inv * mean_grad[i];
    require_finite(out.weight, "weight vector");
    out.batches.push_back(std::move(b));
    return out;
}

}  // namespace clab::engine
