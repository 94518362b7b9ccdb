#include "clab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/rng.hpp"
#include "json.hpp"

namespace clab::diag {

using objectives::batch_gradient;
using objectives::batch_hessian;
using objectives::batch_loss;
using objectives::Objective;

namespace {

std::vector<int> all_of(const Objective& obj) {
    std::vector<int> idx(static_cast<size_t>(obj.num_samples()));
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
}

Vec stack_mean(const std::vector<Vec>& stack) {
    const size_t d = stack.front().size();
    Vec mean(d, 0.0);
    for (const Vec& w : stack) axpy(1.0, w, mean);
    const double inv = 1.0 / static_cast<double>(stack.size());
    for (double& v : mean) v *= inv;
    return mean;
}

double stack_trace_xi(const std::vector<Vec>& stack) {
    const Vec mean = stack_mean(stack);
    double acc = 0.0;
    for (const Vec& w : stack) {
        double sq = 0.0;
        for (size_t i = 0; i < w.size(); ++i) {
            const double dlt = w[i] - mean[i];
            sq += dlt * dlt;
        }
        acc += sq;
    }
    return acc / static_cast<double>(stack.size());
}

// mean and standard error of the mean over a sample vector
void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
    const double n = static_cast<double>(xs.size());
    mean = 0.0;
    for (double v : xs) mean += v;
    mean /= n;
    if (xs.size() < 2) {
        se = 0.0;
        return;
    }
    double ss = 0.0;
    for (double v : xs) {
        const double dlt = v - mean;
        ss += dlt * dlt;
    }
    se = std::sqrt(ss / (n * (n - 1.0)));
}

}  // namespace

Mat weight_diversity_matrix(const engine::WorkerEnsemble& ens) {
    if (ens.m <= 0) throw ValidationError("weight_diversity_matrix: empty ensemble");
    if (ens.d > objectives::kDenseDimLimit)
        throw ValidationError("weight_diversity_matrix: dimension " + std::to_string(ens.d) +
                              " exceeds dense limit " +
                              std::to_string(objectives::kDenseDimLimit));
    const Vec mean = ens.averaged_model();
    const int d = ens.d;
    Mat xi(d, d);
    Vec delta(static_cast<size_t>(d));
    for (const Vec& w : ens.weights) {
        for (int i = 0; i < d; ++i) delta[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] - mean[static_cast<size_t>(i)];
        for (int i = 0; i < d; ++i) {
            const double di = delta[static_cast<size_t>(i)];
            for (int j = i; j < d; ++j) xi(i, j) += di * delta[static_cast<size_t>(j)];
        }
    }
    const double inv = 1.0 / static_cast<double>(ens.m);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            xi(i, j) *= inv;
            xi(j, i) = xi(i, j);
        }
    return xi;
}

double consensus_distance(const engine::WorkerEnsemble& ens) {
    if (ens.m <= 0) throw ValidationError("consensus_distance: empty ensemble");
    return stack_trace_xi(ens.weights);
}

Vec gradient_diversity(const Objective& obj, const engine::WorkerEnsemble& ens,
                       const std::vector<objectives::Batch>& batches) {
    if (static_cast<int>(batches.size()) != ens.m)
        throw ValidationError("gradient_diversity: need one batch per worker");
    const Vec w_a = ens.averaged_model();
    Vec acc(static_cast<size_t>(ens.d), 0.0);
    for (int j = 0; j < ens.m; ++j) {
        const Vec g_here = batch_gradient(obj, ens.weights[static_cast<size_t>(j)],
                                          batches[static_cast<size_t>(j)].indices);
        const Vec g_avg = batch_gradient(obj, w_a, batches[static_cast<size_t>(j)].indices);
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += g_here[i] - g_avg[i];
    }
    const double inv = 1.0 / static_cast<double>(ens.m);
    for (double& v : acc) v *= inv;
    return acc;
}

SharpnessEstimate avg_direction_sharpness(const Objective& obj, const Vec& w, const Mat& xi,
                                          int k, uint64_t seed, uint64_t draw_tag) {
    if (k < 2) throw ValidationError("avg_direction_sharpness: need at least 2 draws");
    const engine::GaussianFactor factor = engine::gaussian_factor(xi);
    const std::vector<int> all = all_of(obj);
    const double base = batch_loss(obj, w, all);
    const int d = obj.dim();
    const int pairs = k / 2;

    DetRng rng(seed, Stream::kSharpness, draw_tag);
    Vec draw(static_cast<size_t>(d));
    Vec probe(static_cast<size_t>(d));
    std::vector<double> pair_values(static_cast<size_t>(pairs));
    for (int p = 0; p < pairs; ++p) {
        for (int i = 0; i < d; ++i) draw[static_cast<size_t>(i)] = rng.normal();
        const Vec eps = factor.apply(draw);
        for (int i = 0; i < d; ++i) probe[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] + eps[static_cast<size_t>(i)];
        const double up = batch_loss(obj, probe, all);
        for (int i = 0; i < d; ++i) probe[static_cast<size_t>(i)] = w[static_cast<size_t>(i)] - eps[static_cast<size_t>(i)];
        const double down = batch_loss(obj, probe, all);
        pair_values[static_cast<size_t>(p)] = 0.5 * (up + down) - base;
    }
    SharpnessEstimate est;
    mean_and_stderr(pair_values, est.value, est.stderr_value);
    return est;
}

double hessian_consensus_alignment(const Objective& obj, const Vec& w, const Mat& xi,
                                   const std::vector<int>& batch) {
    const Mat h = batch_hessian(obj, w, batch);
    if (h.rows != xi.rows || h.cols != xi.cols)
        throw ValidationError("hessian_consensus_alignment: dimension mismatch");
    return elementwise_contract(h, xi);
}

namespace {

double kappa_factor(double eta, int b, int n) {
    if (b < 1 || b > n)
        throw ValidationError("implicit regularizer: batch size must be in [1, N]");
    if (n <= 1 || b == n) return 0.0;
    return (eta / static_cast<double>(b)) * (static_cast<double>(n - b) / static_cast<double>(n - 1));
}

}  // namespace

RegularizerReport implicit_regularizer_sgd(const Objective& obj, const Vec& w, double eta,
                                           int b) {
    const int n = obj.num_samples();
    const std::vector<int> all = all_of(obj);
    RegularizerReport rep;
    rep.kappa = kappa_factor(eta, b, n);
    rep.base_loss = batch_loss(obj, w, all);
    const Vec g = batch_gradient(obj, w, all);
    rep.grad_norm_term = 0.25 * eta * dot(g, g);

    double var = 0.0;
    Vec gz(w.size());
    for (int z = 0; z < n; ++z) {
        obj.sample_grad(w, z, gz);
        double sq = 0.0;
        for (size_t i = 0; i < gz.size(); ++i) {
            const double dlt = gz[i] - g[i];
            sq += dlt * dlt;
        }
        var += sq;
    }
    rep.grad_variance_term = rep.kappa * std::max(0.0, var / static_cast<double>(n));
    rep.total = rep.base_loss + rep.grad_norm_term + rep.grad_variance_term;
    return rep;
}

RegularizerReport implicit_regularizer_dsgd(const Objective& obj, const Vec& w, const Mat& xi,
                                            double eta, int b) {
    RegularizerReport rep = implicit_regularizer_sgd(obj, w, eta, b);
    const int n = obj.num_samples();
    const std::vector<int> all = all_of(obj);
    const Mat h = batch_hessian(obj, w, all);
    if (h.rows != xi.rows)
        throw ValidationError("implicit_regularizer_dsgd: Xi dimension mismatch");
    rep.tr_h_xi = elementwise_contract(h, xi);
    rep.tr_h2_xi = 0.25 * eta * trace_product(matmul(h, h), xi);

    double hvar = 0.0;
    for (int z = 0; z < n; ++z) {
        const Mat hz = batch_hessian(obj, w, {z});
        const Mat diff = hz - h;
        hvar += std::max(0.0, trace_product(matmul(diff, diff), xi));
    }
    rep.hess_variance_term = rep.kappa * (hvar / static_cast<double>(n));
    rep.total = rep.base_loss + rep.grad_norm_term + rep.tr_h_xi + rep.tr_h2_xi +
                rep.grad_variance_term + rep.hess_variance_term;
    return rep;
}

SmoothingReport smoothing_report(const Objective& obj, const Mat& xi, const ProbeRegion& region,
                                 int n_probes, int k, uint64_t seed) {
    const int d = obj.dim();
    if (static_cast<int>(region.center.size()) != d)
        throw ValidationError("smoothing_report: probe center has wrong dimension");
    if (region.radius <= 0.0) throw ValidationError("smoothing_report: radius must be positive");
    if (n_probes < 2) throw ValidationError("smoothing_report: need at least 2 probes");
    if (k < 2) throw ValidationError("smoothing_report: need at least 2 draws");

    const EigenSym eig = jacobi_eigensymmetric(xi, false);
    const engine::GaussianFactor factor = engine::gaussian_factor(xi);
    const std::vector<int> all = all_of(obj);
    const int n = obj.num_samples();

    SmoothingReport rep;
    rep.sigma_min = eig.eigenvalues.back();

    // Probe points and their short-offset partners.
    const double step = 1e-3 * region.radius;
    std::vector<Vec> probes(static_cast<size_t>(n_probes));
    std::vector<Vec> partners(static_cast<size_t>(n_probes));
    for (int i = 0; i < n_probes; ++i) {
        DetRng rng(seed, Stream::kProbe, static_cast<uint64_t>(i));
        Vec p(static_cast<size_t>(d));
        for (int c = 0; c < d; ++c)
            p[static_cast<size_t>(c)] = region.center[static_cast<size_t>(c)] +
                                        region.radius * (2.0 * rng.uniform() - 1.0);
        Vec dir(static_cast<size_t>(d));
        double nrm = 0.0;
        do {
            for (int c = 0; c < d; ++c) dir[static_cast<size_t>(c)] = rng.normal();
            nrm = norm2(dir);
        } while (nrm < 1e-12);
        Vec q = p;
        axpy(step / nrm, dir, q);
        probes[static_cast<size_t>(i)] = std::move(p);
        partners[static_cast<size_t>(i)] = std::move(q);
    }

    rep.alpha = 0.0;
    rep.beta = 0.0;
    for (int i = 0; i < n_probes; ++i) {
        const Vec gp = batch_gradient(obj, probes[static_cast<size_t>(i)], all);
        const Vec gq = batch_gradient(obj, partners[static_cast<size_t>(i)], all);
        rep.alpha = std::max(rep.alpha, norm2(gp));
        rep.beta = std::max(rep.beta, norm2(gp - gq) / step);
    }

    const double cov_branch = rep.sigma_min > 0.0
                                  ? std::sqrt(2.0) * rep.alpha / rep.sigma_min
                                  : std::numeric_limits<double>::infinity();
    rep.theoretical_bound = std::min(cov_branch, rep.beta);

    // Smoothed gradient with one shared antithetic draw sequence: every probe
    // point replays the identical noise, so pair differences cancel the Monte
    // Carlo error instead of adding it.
    const int pairs = k / 2;
    const double scale = 1.0 / (2.0 * static_cast<double>(pairs) * static_cast<double>(n));
    Vec draw(static_cast<size_t>(d));
    Vec point(static_cast<size_t>(d));
    Vec g(static_cast<size_t>(d));
    auto smoothed_grad = [&](const Vec& x, Vec& out) {
        out.assign(static_cast<size_t>(d), 0.0);
        DetRng rng(seed, Stream::kSmoothing);
        for (int p = 0; p < pairs; ++p) {
            for (int c = 0; c < d; ++c) draw[static_cast<size_t>(c)] = rng.normal();
            const Vec eps = factor.apply(draw);
            for (int c = 0; c < d; ++c) point[static_cast<size_t>(c)] = x[static_cast<size_t>(c)] + eps[static_cast<size_t>(c)];
            for (int z = 0; z < n; ++z) {
                obj.sample_grad(point, z, g);
                for (int c = 0; c < d; ++c) out[static_cast<size_t>(c)] += g[static_cast<size_t>(c)];
            }
            for (int c = 0; c < d; ++c) point[static_cast<size_t>(c)] = x[static_cast<size_t>(c)] - eps[static_cast<size_t>(c)];
            for (int z = 0; z < n; ++z) {
                obj.sample_grad(point, z, g);
                for (int c = 0; c < d; ++c) out[static_cast<size_t>(c)] += g[static_cast<size_t>(c)];
            }
        }
        for (double& v : out) v *= scale;
    };

    Vec sp(static_cast<size_t>(d));
    Vec sq(static_cast<size_t>(d));
    rep.empirical_smoothed_lipschitz = 0.0;
    for (int i = 0; i < n_probes; ++i) {
        smoothed_grad(probes[static_cast<size_t>(i)], sp);
        smoothed_grad(partners[static_cast<size_t>(i)], sq);
        rep.empirical_smoothed_lipschitz =
            std::max(rep.empirical_smoothed_lipschitz, norm2(sp - sq) / step);
    }
    return rep;
}

std::vector<DescentStepReport> descent_condition_check(const std::vector<std::vector<Vec>>& history,
                                                       const Objective& obj,
                                                       const objectives::Dataset& ds,
                                                       const topology::GossipMatrix& p,
                                                       const engine::TrainerConfig& cfg) {
    if (history.size() < 2)
        throw ValidationError("descent_condition_check: need at least two snapshots");
    const int m = p.m;
    for (const auto& stack : history)
        if (static_cast<int>(stack.size()) != m)
            throw ValidationError("descent_condition_check: snapshot size != topology size");
    if (static_cast<int>(ds.shards.size()) != m)
        throw ValidationError("descent_condition_check: dataset must be sharded for m workers");

    const double lambda = topology::spectral_report(p).lambda;
    const std::vector<int> all = ds.all_indices();
    const int b = cfg.local_batch;

    std::vector<DescentStepReport> out;
    out.reserve(history.size() - 1);
    Vec gz(static_cast<size_t>(obj.dim()));
    for (size_t t = 0; t + 1 < history.size(); ++t) {
        const std::vector<Vec>& stack = history[t];
        DescentStepReport rep;
        rep.step = static_cast<int>(t);
        rep.tr_xi_before = stack_trace_xi(stack);
        rep.tr_xi_after = stack_trace_xi(history[t + 1]);
        rep.descended = rep.tr_xi_after <= rep.tr_xi_before;

        double mean_grad_sq = 0.0;
        double mean_noise_var = 0.0;
        for (int j = 0; j < m; ++j) {
            const Vec& wj = stack[static_cast<size_t>(j)];
            const Vec g_full = batch_gradient(obj, wj, all);
            mean_grad_sq += dot(g_full, g_full);
            if (cfg.full_batch) continue;

            const std::vector<int>& shard = ds.shards[static_cast<size_t>(j)];
            const int s = static_cast<int>(shard.size());
            const Vec g_shard = batch_gradient(obj, wj, shard);
            double sigma_sq = 0.0;
            for (int z : shard) {
                obj.sample_grad(wj, z, gz);
                double sq = 0.0;
                for (size_t i = 0; i < gz.size(); ++i) {
                    const double dlt = gz[i] - g_shard[i];
                    sq += dlt * dlt;
                }
                sigma_sq += sq;
            }
            sigma_sq /= static_cast<double>(s);
            const Vec bias_vec = g_shard - g_full;
            const double bias = dot(bias_vec, bias_vec);
            double var = 0.0;
            if (cfg.sampling == engine::Sampling::kIid) {
                var = sigma_sq / static_cast<double>(b) + bias;
            } else {
                // sampling without replacement within the shard
                var = (s > 1 && b < s)
                          ? sigma_sq * static_cast<double>(s - b) /
                                (static_cast<double>(b) * static_cast<double>(s - 1))
                          : 0.0;
                var += bias;
            }
            mean_noise_var += var;
        }
        mean_grad_sq /= static_cast<double>(m);
        mean_noise_var /= static_cast<double>(m);

        const double bracket = mean_grad_sq + (1.0 - lambda) * mean_noise_var;
        if (lambda <= 0.0 || bracket <= 0.0) {
            rep.eta_star = std::numeric_limits<double>::infinity();
        } else {
            rep.eta_star = rep.tr_xi_before * (1.0 - lambda) /
                           (std::sqrt(6.0) * std::sqrt(lambda) * std::sqrt(bracket));
        }
        rep.eta_within = cfg.eta <= rep.eta_star;
        out.push_back(rep);
    }
    return out;
}

void filter_normalize(const Objective& obj, const Vec& w_center, Vec& direction) {
    if (direction.size() != w_center.size())
        throw ValidationError("filter_normalize: dimension mismatch");
    const auto groups = obj.filter_groups();
    if (groups.empty()) {
        const double nrm = norm2(direction);
        if (nrm > 1e-12)
            for (double& v : direction) v /= nrm;
        return;
    }
    for (const auto& group : groups) {
        double wn = 0.0, dn = 0.0;
        for (int idx : group) {
            wn += w_center[static_cast<size_t>(idx)] * w_center[static_cast<size_t>(idx)];
            dn += direction[static_cast<size_t>(idx)] * direction[static_cast<size_t>(idx)];
        }
        wn = std::sqrt(wn);
        dn = std::sqrt(dn);
        if (dn < 1e-12) continue;
        const double scale = (wn > 1e-12 ? wn : 1.0) / dn;
        for (int idx : group) direction[static_cast<size_t>(idx)] *= scale;
    }
}

LandscapeGrid landscape_slice_along(const Objective& obj, const Vec& w_center,
                                    const std::vector<Vec>& directions, double extent,
                                    int resolution) {
    if (directions.empty() || directions.size() > 2)
        throw ValidationError("landscape_slice: need 1 or 2 directions");
    for (const Vec& dir : directions)
        if (dir.size() != w_center.size())
            throw ValidationError("landscape_slice: direction dimension mismatch");
    if (extent < 0.0) throw ValidationError("landscape_slice: extent must be >= 0");
    if (extent > 0.0 && resolution < 3)
        throw ValidationError("landscape_slice: resolution must be >= 3");

    LandscapeGrid grid;
    grid.mode = directions.size() == 2 ? SliceMode::k2d : SliceMode::k1d;
    grid.extent = extent;
    grid.directions = directions;
    const std::vector<int> all = all_of(obj);

    if (extent == 0.0) {
        grid.axis = {0.0};
        grid.values = {batch_loss(obj, w_center, all)};
        return grid;
    }

    grid.axis.resize(static_cast<size_t>(resolution));
    for (int i = 0; i < resolution; ++i)
        grid.axis[static_cast<size_t>(i)] =
            extent * (2.0 * static_cast<double>(i) / static_cast<double>(resolution - 1) - 1.0);

    Vec point(w_center.size());
    if (grid.mode == SliceMode::k1d) {
        grid.values.resize(static_cast<size_t>(resolution));
        for (int i = 0; i < resolution; ++i) {
            point = w_center;
            axpy(grid.axis[static_cast<size_t>(i)], directions[0], point);
            grid.values[static_cast<size_t>(i)] = batch_loss(obj, point, all);
        }
    } else {
        grid.values.resize(static_cast<size_t>(resolution) * static_cast<size_t>(resolution));
        for (int ix = 0; ix < resolution; ++ix)
            for (int iy = 0; iy < resolution; ++iy) {
                point = w_center;
                axpy(grid.axis[static_cast<size_t>(ix)], directions[0], point);
                axpy(grid.axis[static_cast<size_t>(iy)], directions[1], point);
                grid.values[static_cast<size_t>(ix) * resolution + iy] =
                    batch_loss(obj, point, all);
            }
    }
    return grid;
}

LandscapeGrid landscape_slice(const Objective& obj, const Vec& w_center, SliceMode mode,
                              double extent, int resolution, uint64_t seed) {
    const int d = obj.dim();
    const int ndirs = mode == SliceMode::k2d ? 2 : 1;
    DetRng rng(seed, Stream::kSliceDir);
    std::vector<Vec> dirs;
    dirs.reserve(static_cast<size_t>(ndirs));
    while (static_cast<int>(dirs.size()) < ndirs) {
        Vec dir(static_cast<size_t>(d));
        for (int c = 0; c < d; ++c) dir[static_cast<size_t>(c)] = rng.normal();
        for (const Vec& prev : dirs) {
            const double denom = dot(prev, prev);
            if (denom > 0.0) axpy(-dot(dir, prev) / denom, prev, dir);
        }
        if (norm2(dir) < 1e-12) continue;  // colinear draw, try again
        filter_normalize(obj, w_center, dir);
        dirs.push_back(std::move(dir));
    }
    return landscape_slice_along(obj, w_center, dirs, extent, resolution);
}

std::string landscape_to_csv(const LandscapeGrid& grid) {
    std::ostringstream out;
    if (grid.mode == SliceMode::k1d) {
        out << "x,loss\n";
        for (size_t i = 0; i < grid.axis.size(); ++i)
            out << format_double(grid.axis[i]) << ',' << format_double(grid.values[i]) << '\n';
    } else {
        out << "x,y,loss\n";
        const size_t res = grid.axis.size();
        for (size_t ix = 0; ix < res; ++ix)
            for (size_t iy = 0; iy < res; ++iy)
                out << format_double(grid.axis[ix]) << ',' << format_double(grid.axis[iy]) << ','
                    << format_double(grid.values[ix * res + iy]) << '\n';
    }
    return out.str();
}

DiagnosticsRecord measure_record(const Objective& obj, const engine::WorkerEnsemble& ens,
                                 int step, const RecordOptions& opts, double eta,
                                 uint64_t seed) {
    DiagnosticsRecord rec;
    rec.step = step;
    const Vec w_a = ens.averaged_model();
    const std::vector<int> all = all_of(obj);
    rec.loss = batch_loss(obj, w_a, all);
    rec.grad_norm = norm2(batch_gradient(obj, w_a, all));
    rec.consensus_distance = consensus_distance(ens);

    const bool need_xi = (opts.sharpness_samples > 0 || opts.hessian_alignment ||
                          opts.record_xi || opts.regularizers) &&
                         ens.d <= objectives::kDenseDimLimit;
    if (!need_xi) return rec;

    const Mat xi = weight_diversity_matrix(ens);
    if (opts.sharpness_samples > 0)
        rec.sharpness = avg_direction_sharpness(obj, w_a, xi, opts.sharpness_samples, seed,
                                                static_cast<uint64_t>(step));
    if (opts.hessian_alignment) rec.tr_h_xi = hessian_consensus_alignment(obj, w_a, xi, all);
    if (opts.record_xi) rec.xi = xi;
    if (opts.regularizers) {
        const int b = opts.regularizer_batch > 0 ? opts.regularizer_batch : obj.num_samples();
        rec.regularizers = implicit_regularizer_dsgd(obj, w_a, xi, eta, b);
    }
    return rec;
}

std::string record_to_json(const DiagnosticsRecord& rec, const RecordOptions& opts) {
    nlohmann::ordered_json j;
    j["step"] = rec.step;
    j["loss"] = rec.loss;
    j["grad_norm"] = rec.grad_norm;
    j["consensus_distance"] = rec.consensus_distance;
    if (opts.sharpness_samples > 0) {
        if (rec.sharpness) {
            j["sharpness"] = rec.sharpness->value;
            j["sharpness_stderr"] = rec.sharpness->stderr_value;
        } else {
            j["sharpness"] = nullptr;
            j["sharpness_stderr"] = nullptr;
        }
    }
    if (opts.hessian_alignment) {
        if (rec.tr_h_xi)
            j["tr_h_xi"] = *rec.tr_h_xi;
        else
            j["tr_h_xi"] = nullptr;
    }
    if (opts.record_xi) {
        if (rec.xi) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (int r = 0; r < rec.xi->rows; ++r) {
                nlohmann::ordered_json row = nlohmann::ordered_json::array();
                for (int c = 0; c < rec.xi->cols; ++c) row.push_back((*rec.xi)(r, c));
                rows.push_back(std::move(row));
            }
            j["xi"] = std::move(rows);
        } else {
            j["xi"] = nullptr;
        }
    }
    if (opts.regularizers) {
        if (rec.regularizers) {
            const RegularizerReport& r = *rec.regularizers;
            nlohmann::ordered_json reg;
            reg["kappa"] = r.kappa;
            reg["base_loss"] = r.base_loss;
            reg["grad_norm_term"] = r.grad_norm_term;
            reg["tr_h_xi"] = r.tr_h_xi;
            reg["tr_h2_xi"] = r.tr_h2_xi;
            reg["grad_variance_term"] = r.grad_variance_term;
            reg["hess_variance_term"] = r.hess_variance_term;
            reg["total"] = r.total;
            j["regularizers"] = std::move(reg);
        } else {
            j["regularizers"] = nullptr;
        }
    }
    return j.dump();
}

}  // namespace clab::diag
