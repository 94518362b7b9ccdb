#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clab/linalg.hpp"
#include "clab/objectives.hpp"
#include "clab/topology.hpp"

namespace clab::engine {

enum class Algorithm { kDsgd, kCsgd, kSgd, kSam, kAdsam };
enum class Sampling { kIid, kEpochPartition };

Algorithm algorithm_from_string(const std::string& name);
std::string algorithm_to_string(Algorithm a);
Sampling sampling_from_string(const std::string& name);

struct TrainerConfig {
    Algorithm algorithm = Algorithm::kDsgd;
    double eta = 0.05;
    int local_batch = 1;
    bool full_batch = false;  // every worker evaluates the entire dataset
    int steps = 0;
    Sampling sampling = Sampling::kIid;
    double sam_rho = 0.05;   // vanilla SAM radius; also the isotropic adsam scale
    int adsam_samples = 2;
    uint64_t seed = 0;
    double init_scale = 0.5;
    double init_diversity = 0.0;  // per-worker Gaussian offset, dsgd only
};

// Throws ValidationError naming the offending field.
void validate_trainer_config(const TrainerConfig& cfg, int m, int n);

struct WorkerEnsemble {
    int m = 0;
    int d = 0;
    std::vector<Vec> weights;

    Vec averaged_model() const;  // exact arithmetic mean, fixed worker order
};

// Common init drawn from the (seed, init) stream, plus per-worker Gaussian
// offsets of scale init_diversity from each worker's own stream.
WorkerEnsemble make_ensemble(int m, int d, uint64_t seed, double init_scale,
                             double init_diversity);

// Batch for (worker, step) under the config's sampling mode. iid draws
// local_batch indices with replacement from the worker's shard;
// epoch_partition walks a per-epoch shard permutation in consecutive blocks;
// full_batch mode returns every dataset index regardless of worker.
std::vector<int> draw_batch(const objectives::Dataset& ds, const TrainerConfig& cfg,
                            int worker, int step);

struct StepOutcome {
    std::vector<Vec> weights;  // post-step ensemble (size m)
    std::vector<objectives::Batch> batches;
};

struct ModelStepOutcome {
    Vec weight;
    std::vector<objectives::Batch> batches;
};

// One synchronous round: every worker's gradient is evaluated at its pre-mix
// iterate, then w_j <- sum_k P(j,k) w_k - eta * grad_j. Throws
// DivergenceError on any non-finite gradient or weight.
StepOutcome dsgd_step(const WorkerEnsemble& ens, const topology::GossipMatrix& p,
                      const objectives::Objective& obj, const objectives::Dataset& ds,
                      const TrainerConfig& cfg, int step);

// w <- w - eta * (1/m) sum_j grad over worker j's batch, all gradients at the
// shared model. Batch draws replay the same per-(worker, step) streams as
// dsgd_step so paired runs share their data randomness.
ModelStepOutcome csgd_step(const Vec& w, int m, const objectives::Objective& obj,
                           const objectives::Dataset& ds, const TrainerConfig& cfg, int step);

ModelStepOutcome sgd_step(const Vec& w, const objectives::Objective& obj,
                          const objectives::Dataset& ds, const TrainerConfig& cfg, int step);

// eps* = rho * g / ||g|| (zero when ||g|| < 1e-12), then a descent step with
// the gradient re-evaluated at w + eps* on the same batch.
ModelStepOutcome sam_step(const Vec& w, const objectives::Objective& obj,
                          const objectives::Dataset& ds, const TrainerConfig& cfg, int step);

// Monte-Carlo average-direction step: eps_k = U sqrt(Lambda) xi_k from the
// eigendecomposition of sigma, antithetic pairs when K is even, and the mean
// perturbed gradient over the step's batch. Eigenvalues in [-1e-10, 0) are
// clamped to zero; below -1e-6 the matrix is rejected as not PSD.
ModelStepOutcome adsam_step(const Vec& w, const Mat& sigma, const objectives::Objective& obj,
                            const objectives::Dataset& ds, const TrainerConfig& cfg, int step);

// Factor of a PSD matrix for Gaussian sampling: eps = U sqrt(Lambda) xi.
// Eigenvalues in [-1e-10, 0) are clamped to zero; below -1e-6 the matrix is
// rejected as not PSD. Shared by adsam_step and the smoothing estimators.
struct GaussianFactor {
    Mat basis;      // U, columns are eigenvectors
    Vec sqrt_eigs;  // sqrt of clamped eigenvalues, descending

    Vec apply(const Vec& xi) const;  // U sqrt(Lambda) xi
};

GaussianFactor gaussian_factor(const Mat& sigma);

}  // namespace clab::engine
