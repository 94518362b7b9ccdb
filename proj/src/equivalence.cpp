#include "clab/equivalence.hpp"

#include <algorithm>
#include <cmath>

#include "clab/errors.hpp"
#include "clab/rng.hpp"

namespace clab::equiv {

using objectives::batch_gradient;
using objectives::batch_hessian;
using objectives::Objective;

namespace {

std::vector<int> all_of(const Objective& obj) {
    std::vector<int> idx(static_cast<size_t>(obj.num_samples()));
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
}

// componentwise mean and stderr across repetition vectors
McDirection reduce_repetitions(const std::vector<Vec>& reps) {
    McDirection out;
    out.repetitions = static_cast<int>(reps.size());
    const size_t d = reps.front().size();
    out.direction.assign(d, 0.0);
    out.stderr_c.assign(d, 0.0);
    for (const Vec& r : reps) axpy(1.0, r, out.direction);
    const double inv = 1.0 / static_cast<double>(reps.size());
    for (double& v : out.direction) v *= inv;
    if (reps.size() < 2) return out;
    for (const Vec& r : reps)
        for (size_t i = 0; i < d; ++i) {
            const double dlt = r[i] - out.direction[i];
            out.stderr_c[i] += dlt * dlt;
        }
    const double n = static_cast<double>(reps.size());
    for (double& v : out.stderr_c) v = std::sqrt(v / (n * (n - 1.0)));
    return out;
}

std::vector<int> trial_batch(const objectives::Dataset& ds, const engine::TrainerConfig& cfg,
                             int worker, int trial) {
    const std::vector<int>& shard = ds.shards[static_cast<size_t>(worker)];
    DetRng rng(cfg.seed, Stream::kTrialBatch, static_cast<uint64_t>(worker),
               static_cast<uint64_t>(trial));
    std::vector<int> batch(static_cast<size_t>(cfg.local_batch));
    if (cfg.sampling == engine::Sampling::kIid) {
        for (int i = 0; i < cfg.local_batch; ++i)
            batch[static_cast<size_t>(i)] = shard[static_cast<size_t>(rng.uniform_int(
                static_cast<int>(shard.size())))];
    } else {
        // one random batch of a without-replacement epoch pass
        if (cfg.local_batch > static_cast<int>(shard.size()))
            throw ValidationError("expected_dsgd_direction: batch larger than shard");
        std::vector<int> pool = shard;
        for (int i = 0; i < cfg.local_batch; ++i) {
            const int pick = i + rng.uniform_int(static_cast<int>(pool.size()) - i);
            std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick)]);
            batch[static_cast<size_t>(i)] = pool[static_cast<size_t>(i)];
        }
        std::sort(batch.begin(), batch.end());
    }
    return batch;
}

}  // namespace

McDirection expected_dsgd_direction(const Objective& obj, const engine::WorkerEnsemble& ens,
                                    const topology::GossipMatrix& p,
                                    const objectives::Dataset& ds,
                                    const engine::TrainerConfig& cfg, int trials) {
    if (trials < 2) throw ValidationError("expected_dsgd_direction: trials must be >= 2");
    if (p.m != ens.m) throw ValidationError("expected_dsgd_direction: topology/ensemble mismatch");
    if (cfg.eta <= 0.0) throw ValidationError("expected_dsgd_direction: eta must be positive");
    if (!cfg.full_batch && static_cast<int>(ds.shards.size()) != ens.m)
        throw ValidationError("expected_dsgd_direction: dataset must be sharded per worker");

    const Vec w_a = ens.averaged_model();
    const std::vector<Vec> mixed = topology::gossip_mix(p, ens.weights);
    const std::vector<int> all = all_of(obj);
    const int eff_trials = cfg.full_batch ? 1 : trials;
    const double inv_m = 1.0 / static_cast<double>(ens.m);

    std::vector<Vec> reps;
    reps.reserve(static_cast<size_t>(eff_trials));
    for (int r = 0; r < eff_trials; ++r) {
        Vec next_mean(w_a.size(), 0.0);
        for (int j = 0; j < ens.m; ++j) {
            const std::vector<int> batch = cfg.full_batch ? all : trial_batch(ds, cfg, j, r);
            const Vec g = batch_gradient(obj, ens.weights[static_cast<size_t>(j)], batch);
            for (size_t i = 0; i < next_mean.size(); ++i)
                next_mean[i] += mixed[static_cast<size_t>(j)][i] - cfg.eta * g[i];
        }
        Vec dir(w_a.size());
        for (size_t i = 0; i < dir.size(); ++i)
            dir[i] = (w_a[i] - inv_m * next_mean[i]) / cfg.eta;
        reps.push_back(std::move(dir));
    }
    return reduce_repetitions(reps);
}

McDirection adsam_direction(const Objective& obj, const Vec& w_a, const Mat& sigma, int k,
                            uint64_t seed) {
    if (k < 2 || k % 2 != 0)
        throw ValidationError("adsam_direction: draw count must be even and >= 2");
    if (static_cast<int>(w_a.size()) != obj.dim())
        throw ValidationError("adsam_direction: weight dimension mismatch");
    const engine::GaussianFactor factor = engine::gaussian_factor(sigma);
    const std::vector<int> all = all_of(obj);
    const int d = obj.dim();
    const int pairs = k / 2;

    DetRng rng(seed, Stream::kNoise);
    Vec draw(static_cast<size_t>(d));
    Vec probe(static_cast<size_t>(d));
    std::vector<Vec> reps;
    reps.reserve(static_cast<size_t>(pairs));
    for (int p = 0; p < pairs; ++p) {
        for (int i = 0; i < d; ++i) draw[static_cast<size_t>(i)] = rng.normal();
        const Vec eps = factor.apply(draw);
        for (int i = 0; i < d; ++i) probe[static_cast<size_t>(i)] = w_a[static_cast<size_t>(i)] + eps[static_cast<size_t>(i)];
        Vec pair_mean = batch_gradient(obj, probe, all);
        for (int i = 0; i < d; ++i) probe[static_cast<size_t>(i)] = w_a[static_cast<size_t>(i)] - eps[static_cast<size_t>(i)];
        const Vec g_down = batch_gradient(obj, probe, all);
        for (size_t i = 0; i < pair_mean.size(); ++i) pair_mean[i] = 0.5 * (pair_mean[i] + g_down[i]);
        reps.push_back(std::move(pair_mean));
    }
    return reduce_repetitions(reps);
}

ScalingFit residual_scaling_fit(const Objective& obj, const engine::WorkerEnsemble& base,
                                const topology::GossipMatrix& p, const objectives::Dataset& ds,
                                const engine::TrainerConfig& cfg,
                                const std::vector<double>& scales, int trials, int k,
                                uint64_t seed) {
    if (scales.size() < 4)
        throw ValidationError("residual_scaling_fit: need at least 4 displacement scales");
    for (double c : scales)
        if (!(c > 0.0) || c > 1.0)
            throw ValidationError("residual_scaling_fit: scales must lie in (0, 1]");
    if (!cfg.full_batch)
        throw ValidationError("residual_scaling_fit: requires full-batch gradients");
    (void)trials;  // reserved for stochastic variants; full batch is deterministic

    const Vec w_a = base.averaged_model();
    ScalingFit out;
    out.points.reserve(scales.size());
    std::vector<double> log_c, log_r;
    for (double c : scales) {
        engine::WorkerEnsemble shrunk = base;
        for (int j = 0; j < base.m; ++j)
            for (size_t i = 0; i < w_a.size(); ++i)
                shrunk.weights[static_cast<size_t>(j)][i] =
                    w_a[i] + c * (base.weights[static_cast<size_t>(j)][i] - w_a[i]);

        const McDirection dsgd = expected_dsgd_direction(obj, shrunk, p, ds, cfg, 2);
        const Mat xi = diag::weight_diversity_matrix(shrunk);
        const McDirection adsam = adsam_direction(obj, w_a, xi, k, seed);

        ScalingPoint pt;
        pt.scale = c;
        pt.residual = norm2(dsgd.direction - adsam.direction);
        pt.mc_floor = norm2(adsam.stderr_c);
        pt.excluded = pt.residual < 10.0 * pt.mc_floor;
        if (!pt.excluded && pt.residual > 0.0) {
            log_c.push_back(std::log(c));
            log_r.push_back(std::log(pt.residual));
        }
        out.points.push_back(pt);
    }
    if (log_c.size() < 2)
        throw ValidationError(
            "residual_scaling_fit: fewer than 2 scales resolve above the Monte Carlo floor");
    out.fit = fit_line(log_c, log_r);
    out.points_used = static_cast<int>(log_c.size());
    return out;
}

namespace {

// Enumerates every partition of `remaining` into unordered batches of size b,
// anchoring each batch on its lowest element so no partition repeats.
// Accumulates sum over partitions of sum over batches of ||sum of centered
// members||^2.
void enumerate_partitions(const std::vector<int>& remaining, int b,
                          const std::vector<Vec>& centered, double acc, double& total,
                          long& count) {
    if (remaining.empty()) {
        total += acc;
        ++count;
        return;
    }
    const int anchor = remaining[0];
    const int pool = static_cast<int>(remaining.size()) - 1;  // candidates after the anchor
    std::vector<int> comb(static_cast<size_t>(b - 1));        // positions 1..pool in `remaining`

    auto emit = [&]() {
        Vec sum = centered[static_cast<size_t>(anchor)];
        std::vector<bool> taken(remaining.size(), false);
        taken[0] = true;
        for (int pos : comb) {
            axpy(1.0, centered[static_cast<size_t>(remaining[static_cast<size_t>(pos)])], sum);
            taken[static_cast<size_t>(pos)] = true;
        }
        std::vector<int> next;
        next.reserve(remaining.size() - static_cast<size_t>(b));
        for (size_t i = 0; i < remaining.size(); ++i)
            if (!taken[i]) next.push_back(remaining[i]);
        enumerate_partitions(next, b, centered, acc + dot(sum, sum), total, count);
    };

    if (b == 1) {
        emit();
        return;
    }
    auto choose = [&](auto&& self, int start, int depth) -> void {
        if (depth == b - 1) {
            emit();
            return;
        }
        const int last_start = pool - (b - 2 - depth);  // leave room for the rest
        for (int pos = start; pos <= last_start; ++pos) {
            comb[static_cast<size_t>(depth)] = pos;
            self(self, pos + 1, depth + 1);
        }
    };
    choose(choose, 1, 0);
}

}  // namespace

VarianceIdentity minibatch_variance_identity_check(const std::vector<Vec>& grads, int b) {
    const int n = static_cast<int>(grads.size());
    if (n < 1 || n > 10)
        throw ValidationError("minibatch_variance_identity_check: need 1 <= N <= 10 vectors");
    if (b < 1 || n % b != 0)
        throw ValidationError("minibatch_variance_identity_check: batch size must divide N");
    const size_t d = grads.front().size();
    for (const Vec& g : grads)
        if (g.size() != d)
            throw ValidationError("minibatch_variance_identity_check: mixed dimensions");

    Vec mean(d, 0.0);
    for (const Vec& g : grads) axpy(1.0, g, mean);
    for (double& v : mean) v *= 1.0 / static_cast<double>(n);
    std::vector<Vec> centered(grads.size());
    for (size_t j = 0; j < grads.size(); ++j) centered[j] = grads[j] - mean;

    const int m = n / b;
    VarianceIdentity out;
    std::vector<int> remaining(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) remaining[static_cast<size_t>(i)] = i;
    double total = 0.0;
    long count = 0;
    enumerate_partitions(remaining, b, centered, 0.0, total, count);
    out.partitions = count;
    out.lhs = total / (static_cast<double>(count) * static_cast<double>(m) *
                       static_cast<double>(b) * static_cast<double>(b));

    double var = 0.0;
    for (const Vec& c : centered) var += dot(c, c);
    var /= static_cast<double>(n);
    out.rhs = (n == 1 || b == n)
                  ? 0.0
                  : var * static_cast<double>(n - b) /
                        (static_cast<double>(n - 1) * static_cast<double>(b));
    const double denom = std::max({std::fabs(out.lhs), std::fabs(out.rhs), 1e-30});
    out.rel_error = std::fabs(out.lhs - out.rhs) / denom;
    return out;
}

double lambda_max_hessian(const Objective& obj, const Vec& w, const std::vector<int>& batch) {
    const Mat h = batch_hessian(obj, w, batch);
    const int d = h.rows;
    if (d == 1) return h(0, 0);
    // shift by the Frobenius norm so the most positive eigenvalue dominates
    const double shift = frobenius_norm(h) + 1e-12;
    Vec v(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) v[static_cast<size_t>(i)] = 1.0 + 1e-3 * static_cast<double>(i);
    double nrm = norm2(v);
    for (double& x : v) x /= nrm;
    double prev = 0.0;
    for (int it = 0; it < 1000; ++it) {
        Vec hv = matvec(h, v);
        axpy(shift, v, hv);
        nrm = norm2(hv);
        if (nrm == 0.0) return -shift;  // v is in the kernel of the shifted matrix
        for (double& x : hv) x /= nrm;
        const double est = nrm - shift;
        v = std::move(hv);
        if (it > 0 && std::fabs(est - prev) <= 1e-12 * std::max(1.0, std::fabs(est))) {
            prev = est;
            break;
        }
        prev = est;
    }
    // Rayleigh quotient refinement on the converged vector
    const Vec hv = matvec(h, v);
    return dot(v, hv) / dot(v, v);
}

SharpnessComparison sharpness_preference_comparison(const Objective& obj, const Vec& endpoint_a,
                                                    const Vec& endpoint_b, double probe_sigma,
                                                    int k, double extent, int resolution,
                                                    uint64_t seed) {
    if (probe_sigma <= 0.0)
        throw ValidationError("sharpness_preference_comparison: probe sigma must be positive");
    const int d = obj.dim();
    Mat xi(d, d);
    for (int i = 0; i < d; ++i) xi(i, i) = probe_sigma * probe_sigma;

    const std::vector<int> all = all_of(obj);
    SharpnessComparison out;
    out.lambda_max_a = lambda_max_hessian(obj, endpoint_a, all);
    out.lambda_max_b = lambda_max_hessian(obj, endpoint_b, all);
    out.sharpness_a = diag::avg_direction_sharpness(obj, endpoint_a, xi, k, seed, 0);
    out.sharpness_b = diag::avg_direction_sharpness(obj, endpoint_b, xi, k, seed, 0);
    out.slice_a = diag::landscape_slice(obj, endpoint_a, diag::SliceMode::k1d, extent, resolution, seed);
    out.slice_b = diag::landscape_slice(obj, endpoint_b, diag::SliceMode::k1d, extent, resolution, seed);
    return out;
}

}  // namespace clab::equiv
