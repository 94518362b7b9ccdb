#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clab/engine.hpp"
#include "clab/linalg.hpp"
#include "clab/objectives.hpp"
#include "clab/topology.hpp"

namespace clab::diag {

// --- ensemble dispersion -----------------------------------------------------

// Xi = (1/m) sum_j (w_j - w_a)(w_j - w_a)^T, exactly symmetric by
// construction. Materialization requires d <= 200; use consensus_distance
// for the trace-only path.
Mat weight_diversity_matrix(const engine::WorkerEnsemble& ens);

// Tr(Xi) = (1/m) sum_j ||w_j - w_a||^2 without materializing the matrix.
double consensus_distance(const engine::WorkerEnsemble& ens);

// (1/m) sum_j (grad_{mu_j}(w_j) - grad_{mu_j}(w_a)): the extra update
// direction decentralization injects, one batch per worker.
Vec gradient_diversity(const objectives::Objective& obj, const engine::WorkerEnsemble& ens,
                       const std::vector<objectives::Batch>& batches);

// --- sharpness functionals ----------------------------------------------------

struct SharpnessEstimate {
    double value = 0.0;
    double stderr_value = 0.0;
};

// Monte-Carlo estimate of E_{eps~N(0,Xi)}[L(w+eps) - L(w)] over the full
// dataset with antithetic pairs (K/2 of them; K >= 2).
SharpnessEstimate avg_direction_sharpness(const objectives::Objective& obj, const Vec& w,
                                          const Mat& xi, int k, uint64_t seed,
                                          uint64_t draw_tag = 0);

// Tr(H(w) * Xi) by direct contraction of the batch Hessian against Xi.
double hessian_consensus_alignment(const objectives::Objective& obj, const Vec& w,
                                   const Mat& xi, const std::vector<int>& batch);

// --- implicit regularizers ------------------------------------------------------

struct RegularizerReport {
    double kappa = 0.0;               // (eta/B)(N-B)/(N-1), 0 when B == N
    double base_loss = 0.0;           // L over the full dataset
    double grad_norm_term = 0.0;      // (eta/4) ||grad L||^2
    double tr_h_xi = 0.0;             // Tr(H Xi)
    double tr_h2_xi = 0.0;            // (eta/4) Tr(H^2 Xi)
    double grad_variance_term = 0.0;  // kappa * (1/N) sum_j ||grad_j - grad||^2
    double hess_variance_term = 0.0;  // kappa * (1/N) sum_j Tr((H_j - H)^2 Xi)
    double total = 0.0;
};

RegularizerReport implicit_regularizer_sgd(const objectives::Objective& obj, const Vec& w,
                                           double eta, int b);

RegularizerReport implicit_regularizer_dsgd(const objectives::Objective& obj, const Vec& w,
                                            const Mat& xi, double eta, int b);

// --- smoothed-loss bound ---------------------------------------------------------

struct ProbeRegion {
    Vec center;
    double radius = 1.0;
};

struct SmoothingReport {
    double alpha = 0.0;       // max ||grad L|| over probes
    double beta = 0.0;        // max pairwise gradient Lipschitz ratio
    double sigma_min = 0.0;   // smallest eigenvalue of Xi
    double theoretical_bound = 0.0;  // min(sqrt(2) alpha / sigma_min, beta)
    double empirical_smoothed_lipschitz = 0.0;
};

// alpha and beta come from n_probes points in the region (pairs are short
// random offsets so local slopes are actually witnessed); the smoothed
// gradient uses K antithetic draws shared across all probe points (common
// random numbers), so pairwise differences are nearly noise-free.
SmoothingReport smoothing_report(const objectives::Objective& obj, const Mat& xi,
                                 const ProbeRegion& region, int n_probes, int k,
                                 uint64_t seed);

// --- consensus descent condition ----------------------------------------------

struct DescentStepReport {
    int step = 0;
    double eta_star = 0.0;  // learning-rate threshold for this step
    bool eta_within = false;
    double tr_xi_before = 0.0;
    double tr_xi_after = 0.0;
    bool descended = false;
};

// Evaluates the per-step learning-rate threshold
//   eta*(t) = Tr(Xi(t)) (1-lambda) / (sqrt(6) sqrt(lambda))
//             * [ (1/m) sum ||grad L(w_j)||^2
//               + (1-lambda) (1/m) sum E||grad_batch(w_j) - grad L(w_j)||^2 ]^{-1/2}
// over a recorded trajectory of weight stacks and reports, per step, whether
// eta <= eta*(t) and whether Tr(Xi) actually decreased.
std::vector<DescentStepReport> descent_condition_check(
    const std::vector<std::vector<Vec>>& history, const objectives::Objective& obj,
    const objectives::Dataset& ds, const topology::GossipMatrix& p,
    const engine::TrainerConfig& cfg);

// --- landscape slices -------------------------------------------------------------

enum class SliceMode { k1d, k2d };

struct LandscapeGrid {
    SliceMode mode = SliceMode::k1d;
    double extent = 0.0;
    std::vector<double> axis;        // grid coordinates along each direction
    std::vector<Vec> directions;     // 1 or 2 filter-normalized directions
    std::vector<double> values;      // 1d: axis.size(); 2d: row-major axis^2
};

// Full-batch loss on a regular grid along random orthonormal directions,
// filter-normalized per the objective's parameter groups (plain unit
// directions when the objective declares none). extent 0 degenerates to the
// single center value.
LandscapeGrid landscape_slice(const objectives::Objective& obj, const Vec& w_center,
                              SliceMode mode, double extent, int resolution, uint64_t seed);

// Same evaluation with caller-supplied directions (used by tests and sweeps).
LandscapeGrid landscape_slice_along(const objectives::Objective& obj, const Vec& w_center,
                                    const std::vector<Vec>& directions, double extent,
                                    int resolution);

// CSV rows "x,loss" or "x,y,loss" matching the grid layout.
std::string landscape_to_csv(const LandscapeGrid& grid);

// Filter-normalize a direction in place against the reference point.
void filter_normalize(const objectives::Objective& obj, const Vec& w_center, Vec& direction);

// --- per-step records ---------------------------------------------------------------

struct RecordOptions {
    int sharpness_samples = 128;    // 0 disables the sharpness fields
    bool hessian_alignment = true;  // Tr(H Xi) per record (needs d <= 200)
    bool record_xi = false;         // embed the dense Xi matrix
    bool regularizers = false;      // Theorem-4 term breakdown per record
    int regularizer_batch = 0;      // B for the breakdown; 0 means N
};

struct DiagnosticsRecord {
    int step = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double consensus_distance = 0.0;
    std::optional<SharpnessEstimate> sharpness;
    std::optional<double> tr_h_xi;
    std::optional<Mat> xi;
    std::optional<RegularizerReport> regularizers;
    double wall_clock_seconds = 0.0;  // in-memory only; never serialized
};

// Measure one record from an immutable snapshot. The sharpness draw stream
// is keyed by (seed, step) so records are reproducible at any cadence.
DiagnosticsRecord measure_record(const objectives::Objective& obj,
                                 const engine::WorkerEnsemble& ens, int step,
                                 const RecordOptions& opts, double eta, uint64_t seed);

// One JSON object per record with a fixed key order and key set (determined
// by opts alone), so a metrics file is byte-stable across reruns.
std::string record_to_json(const DiagnosticsRecord& rec, const RecordOptions& opts);

}  // namespace clab::diag
