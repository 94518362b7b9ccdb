#pragma once

#include <cstdint>
#include <vector>

#include "clab/diagnostics.hpp"
#include "clab/engine.hpp"
#include "clab/linalg.hpp"
#include "clab/objectives.hpp"
#include "clab/topology.hpp"

namespace clab::equiv {

// --- expected one-step directions ---------------------------------------------

struct McDirection {
    Vec direction;       // componentwise mean
    Vec stderr_c;        // componentwise standard error of the mean
    int repetitions = 0;  // trials (batch redraws) or antithetic pairs
};

// Expected D-SGD update direction (w_a(t) - E[w_a(t+1)]) / eta from a fixed
// ensemble, averaging over `trials` independent batch redraws. trials >= 2;
// full-batch mode is deterministic and collapses to a single trial with zero
// standard errors.
McDirection expected_dsgd_direction(const objectives::Objective& obj,
                                    const engine::WorkerEnsemble& ens,
                                    const topology::GossipMatrix& p,
                                    const objectives::Dataset& ds,
                                    const engine::TrainerConfig& cfg, int trials);

// Average-direction SAM gradient at w_a: E_{eps~N(0,Sigma)}[grad L(w_a + eps)]
// over the full dataset with k antithetic draws (k even, >= 2).
McDirection adsam_direction(const objectives::Objective& obj, const Vec& w_a, const Mat& sigma,
                            int k, uint64_t seed);

// --- residual scaling ---------------------------------------------------------

struct ScalingPoint {
    double scale = 0.0;
    double residual = 0.0;  // || dsgd direction - adsam direction ||
    double mc_floor = 0.0;  // || componentwise stderr of the adsam estimate ||
    bool excluded = false;  // residual indistinguishable from Monte Carlo noise
};

struct ScalingFit {
    std::vector<ScalingPoint> points;
    LineFit fit;  // log residual vs log scale over the retained points
    int points_used = 0;
};

// Shrinks the ensemble towards its mean by each scale c (w_a + c (w_j - w_a)),
// compares the deterministic full-batch D-SGD direction against the
// average-direction SAM estimate at the matching covariance c^2 Xi, and fits
// the power law of the residual. Points with residual below 10x the Monte
// Carlo floor are excluded from the fit.
ScalingFit residual_scaling_fit(const objectives::Objective& obj,
                                const engine::WorkerEnsemble& base,
                                const topology::GossipMatrix& p, const objectives::Dataset& ds,
                                const engine::TrainerConfig& cfg,
                                const std::vector<double>& scales, int trials, int k,
                                uint64_t seed);

// --- sampling identity ----------------------------------------------------------

struct VarianceIdentity {
    double lhs = 0.0;  // exhaustive average over all partitions into batches
    double rhs = 0.0;  // closed form (N-B)/((N-1)B) * (1/N) sum ||V_j - mean||^2
    double rel_error = 0.0;
    long partitions = 0;
};

// Exhaustively enumerates every partition of the N vectors into batches of
// size b (requires N <= 10 and b | N) and checks the without-replacement
// variance identity.
VarianceIdentity minibatch_variance_identity_check(const std::vector<Vec>& grads, int b);

// --- endpoint sharpness --------------------------------------------------------

// Largest eigenvalue of the batch Hessian by shifted power iteration with a
// deterministic start vector.
double lambda_max_hessian(const objectives::Objective& obj, const Vec& w,
                          const std::vector<int>& batch);

struct SharpnessComparison {
    double lambda_max_a = 0.0;
    double lambda_max_b = 0.0;
    diag::SharpnessEstimate sharpness_a;
    diag::SharpnessEstimate sharpness_b;
    diag::LandscapeGrid slice_a;
    diag::LandscapeGrid slice_b;
};

// Compares two trained endpoints of the same objective: spectral sharpness,
// average-direction sharpness under a shared isotropic probe (identical draw
// sequences for both endpoints), and matched 1d landscape slices.
SharpnessComparison sharpness_preference_comparison(const objectives::Objective& obj,
                                                    const Vec& endpoint_a, const Vec& endpoint_b,
                                                    double probe_sigma, int k, double extent,
                                                    int resolution, uint64_t seed);

}  // namespace clab::equiv
