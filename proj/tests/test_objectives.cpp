#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "clab/errors.hpp"
#include "clab/objectives.hpp"
#include "clab/rng.hpp"
#include "doctest.h"

using namespace clab;
using namespace clab::objectives;

namespace {

std::vector<int> all_of(const Objective& obj) {
    std::vector<int> idx(static_cast<size_t>(obj.num_samples()));
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return idx;
}

// central-difference check of batch_gradient against batch_loss
double max_grad_rel_error(const Objective& obj, const Vec& w) {
    const std::vector<int> all = all_of(obj);
    const Vec g = batch_gradient(obj, w, all);
    const double h = 1e-6;
    double worst = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        Vec wp = w, wm = w;
        wp[i] += h;
        wm[i] -= h;
        const double fd = (batch_loss(obj, wp, all) - batch_loss(obj, wm, all)) / (2.0 * h);
        const double denom = std::max({std::fabs(g[i]), std::fabs(fd), 1e-8});
        worst = std::max(worst, std::fabs(fd - g[i]) / denom);
    }
    return worst;
}

std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}

}  // namespace

TEST_CASE("gradients match finite differences on every family") {
    DetRng rng(17, Stream::kInit);

    const Problem quad = make_quadratic(6, 12, 2);
    Vec w(6);
    for (double& v : w) v = rng.normal();
    CHECK(max_grad_rel_error(*quad.objective, w) < 1e-5);

    const Problem cubic = make_cubic_perturbed(5, 10, 3, 0.4, 0.05);
    Vec w2(5);
    for (double& v : w2) v = 0.7 * rng.normal();
    CHECK(max_grad_rel_error(*cubic.objective, w2) < 1e-5);

    const Problem mlp = make_mlp(4, 5, PlanarDataKind::kTwoMoons, 32);
    Vec w3(static_cast<size_t>(mlp.objective->dim()));
    for (double& v : w3) v = 0.5 * rng.normal();
    CHECK(max_grad_rel_error(*mlp.objective, w3) < 1e-5);

    const Problem kink = make_huber_kink(8, 4, 0.01);
    // stay away from the kink centers so the finite difference is clean
    CHECK(max_grad_rel_error(*kink.objective, Vec{17.3}) < 1e-5);
}

TEST_CASE("analytic hessians match finite differences of the gradient") {
    const Problem quad = make_quadratic(4, 8, 6);
    const Problem cubic = make_cubic_perturbed(4, 8, 7, 0.3, 0.02);
    DetRng rng(19, Stream::kInit);
    for (const Problem* prob : {&quad, &cubic}) {
        const Objective& obj = *prob->objective;
        REQUIRE(obj.has_analytic_hessian());
        const std::vector<int> all = all_of(obj);
        Vec w(4);
        for (double& v : w) v = 0.6 * rng.normal();
        const Mat h = batch_hessian(obj, w, all);
        CHECK(max_asymmetry(h) < 1e-12);
        const double step = 1e-5;
        for (size_t i = 0; i < w.size(); ++i) {
            Vec wp = w, wm = w;
            wp[i] += step;
            wm[i] -= step;
            const Vec gp = batch_gradient(obj, wp, all);
            const Vec gm = batch_gradient(obj, wm, all);
            for (size_t r = 0; r < w.size(); ++r) {
                const double fd = (gp[r] - gm[r]) / (2.0 * step);
                CHECK(h(static_cast<int>(r), static_cast<int>(i)) ==
                      doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("batch operations average the per-sample quantities") {
    const Problem prob = make_quadratic(3, 6, 8);
    const Objective& obj = *prob.objective;
    const Vec w = {0.3, -0.2, 0.5};
    const std::vector<int> batch = {1, 4, 5};
    double loss = 0.0;
    Vec grad(3, 0.0), g(3);
    for (int z : batch) {
        loss += obj.sample_loss(w, z);
        obj.sample_grad(w, z, g);
        axpy(1.0, g, grad);
    }
    loss /= 3.0;
    for (double& v : grad) v /= 3.0;
    CHECK(batch_loss(obj, w, batch) == doctest::Approx(loss).epsilon(1e-14));
    const Vec bg = batch_gradient(obj, w, batch);
    for (size_t i = 0; i < 3; ++i) CHECK(bg[i] == doctest::Approx(grad[i]).epsilon(1e-14));
    CHECK_THROWS_AS(batch_loss(obj, w, std::vector<int>{}), ValidationError);
    CHECK_THROWS_AS(batch_loss(obj, w, std::vector<int>{6}), ValidationError);
}

TEST_CASE("third-order contraction on a pure cubic is constant in w") {
    // loss c*w^3 has third derivative 6c everywhere, so T contracted with a
    // 1x1 weight-diversity matrix [x] equals 6*c*x
    CubicPerturbedObjective obj({Mat(1, 1)}, {Vec{0.0}}, {Vec{1.0}}, 1.0, 0.0);
    Mat xi(1, 1);
    xi(0, 0) = 2.0;
    const std::vector<int> all = {0};
    const Vec t1 = third_order_contract(obj, Vec{0.3}, all, xi);
    const Vec t2 = third_order_contract(obj, Vec{-1.1}, all, xi);
    CHECK(t1[0] == doctest::Approx(12.0).epsilon(1e-7));
    CHECK(t2[0] == doctest::Approx(12.0).epsilon(1e-7));
}

TEST_CASE("planar data generation is deterministic") {
    const Problem a = make_mlp(4, 7, PlanarDataKind::kTwoMoons, 64);
    const Problem b = make_mlp(4, 7, PlanarDataKind::kTwoMoons, 64);
    REQUIRE(a.dataset.n == b.dataset.n);
    for (int i = 0; i < a.dataset.n; ++i) {
        CHECK(a.dataset.labels[static_cast<size_t>(i)] ==
              b.dataset.labels[static_cast<size_t>(i)]);
        for (size_t c = 0; c < 2; ++c)
            CHECK(a.dataset.features[static_cast<size_t>(i)][c] ==
                  b.dataset.features[static_cast<size_t>(i)][c]);
    }
    const Problem blobs = make_mlp(4, 7, PlanarDataKind::kBlobs, 64);
    CHECK(blobs.dataset.n == 64);
}

TEST_CASE("shard_uniform partitions the dataset") {
    Problem prob = make_quadratic(2, 10, 9);
    prob.dataset.shard_uniform(4);
    REQUIRE(prob.dataset.shards.size() == 4);
    std::set<int> seen;
    size_t total = 0;
    for (const auto& shard : prob.dataset.shards) {
        CHECK(shard.size() >= 2);
        CHECK(shard.size() <= 3);
        total += shard.size();
        for (int z : shard) CHECK(seen.insert(z).second);
    }
    CHECK(total == 10);
    CHECK_THROWS_AS(prob.dataset.shard_uniform(11), ValidationError);
}

TEST_CASE("mlp filter groups partition the parameter vector") {
    const Problem prob = make_mlp(4, 3, PlanarDataKind::kTwoMoons, 16);
    const auto groups = prob.objective->filter_groups();
    REQUIRE(!groups.empty());
    std::set<int> seen;
    size_t total = 0;
    for (const auto& g : groups) {
        CHECK(!g.empty());
        total += g.size();
        for (int i : g) CHECK(seen.insert(i).second);
    }
    CHECK(total == static_cast<size_t>(prob.objective->dim()));
    // analytic families have no filter structure
    CHECK(make_quadratic(3, 6, 1).objective->filter_groups().empty());
}

TEST_CASE("huberized kink objective is flat-bounded") {
    const Problem prob = make_huber_kink(6, 11, 0.01);
    const Objective& obj = *prob.objective;
    const std::vector<int> all = all_of(obj);
    // slope of a mean of unit-slope kinks can never exceed 1
    DetRng rng(23, Stream::kProbe);
    for (int t = 0; t < 50; ++t) {
        const Vec w = {4.0 * (rng.uniform() - 0.5)};
        const Vec g = batch_gradient(obj, w, all);
        CHECK(std::fabs(g[0]) <= 1.0 + 1e-12);
    }
    CHECK_THROWS_AS(make_huber_kink(6, 11, 0.0), ValidationError);
}

TEST_CASE("csv loader reports malformed rows by line number") {
    const std::string good =
        write_temp("clab_data_good.csv", "x1,x2,label\n0.5,1.0,1\n-0.25,0,0\n");
    const CsvData data = load_csv_dataset(good);
    REQUIRE(data.features.size() == 2);
    CHECK(data.features[0][0] == 0.5);
    CHECK(data.features[1][1] == 0.0);
    CHECK(data.labels[0] == 1);
    CHECK(data.labels[1] == 0);

    const std::string ragged =
        write_temp("clab_data_ragged.csv", "x1,x2,label\n0.5,1.0,1\n0.5,1\n");
    CHECK_THROWS_WITH_AS(load_csv_dataset(ragged), doctest::Contains("line 3"),
                         ValidationError);

    const std::string bad_feature =
        write_temp("clab_data_feat.csv", "x1,x2,label\n0.5,abc,1\n");
    CHECK_THROWS_WITH_AS(load_csv_dataset(bad_feature), doctest::Contains("non-numeric"),
                         ValidationError);

    const std::string bad_label =
        write_temp("clab_data_label.csv", "x1,x2,label\n0.5,1.0,yes\n");
    CHECK_THROWS_WITH_AS(load_csv_dataset(bad_label), doctest::Contains("non-integer"),
                         ValidationError);

    const std::string empty = write_temp("clab_data_empty.csv", "");
    CHECK_THROWS_AS(load_csv_dataset(empty), ValidationError);
    CHECK_THROWS_AS(load_csv_dataset("/nonexistent/data.csv"), ValidationError);

    // a model built from loaded data trains on the same gradient path
    const Problem prob = make_mlp_from_data(3, data.features, data.labels);
    CHECK(prob.dataset.n == 2);
    CHECK(prob.objective->num_samples() == 2);
}
