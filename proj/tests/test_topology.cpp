#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "clab/engine.hpp"
#include "clab/errors.hpp"
#include "clab/topology.hpp"
#include "doctest.h"

using namespace clab;
using namespace clab::topology;

namespace {
std::string write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << text;
    return path.string();
}
}  // namespace

TEST_CASE("gossip invariants hold for every built-in family") {
    check_gossip_invariants(build_topology(Kind::kRing, 3));
    check_gossip_invariants(build_topology(Kind::kRing, 8));
    check_gossip_invariants(build_topology(Kind::kGrid, 9));
    check_gossip_invariants(build_topology(Kind::kGrid, 16));
    check_gossip_invariants(build_topology(Kind::kExponential, 8));
    check_gossip_invariants(build_topology(Kind::kFullyConnected, 5));
    check_gossip_invariants(build_topology(Kind::kStar, 6));
    check_gossip_invariants(build_topology(Kind::kFullyConnected, 1));
}

TEST_CASE("spectral gap oracles") {
    const auto ring4 = spectral_report(build_topology(Kind::kRing, 4));
    CHECK(ring4.spectral_gap == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

    const auto fc4 = spectral_report(build_topology(Kind::kFullyConnected, 4));
    CHECK(std::fabs(fc4.spectral_gap - 1.0) <= 1e-14);

    const double pi = std::acos(-1.0);
    const auto ring16 = spectral_report(build_topology(Kind::kRing, 16));
    const double expected16 = 1.0 - (1.0 + 2.0 * std::cos(pi / 8.0)) / 3.0;
    CHECK(ring16.spectral_gap == doctest::Approx(expected16).epsilon(1e-8));

    // larger rings mix more slowly
    const auto ring8 = spectral_report(build_topology(Kind::kRing, 8));
    CHECK(ring8.spectral_gap < ring4.spectral_gap);
    CHECK(ring16.spectral_gap < ring8.spectral_gap);
}

TEST_CASE("worker relabeling leaves the spectrum unchanged") {
    const GossipMatrix ring = build_topology(Kind::kRing, 8);
    const GossipMatrix shuffled = shuffle_workers(ring, 99);
    CHECK(shuffled.edges.size() == ring.edges.size());
    const auto a = spectral_report(ring);
    const auto b = spectral_report(shuffled);
    REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
    for (size_t i = 0; i < a.eigenvalues.size(); ++i)
        CHECK(a.eigenvalues[i] == doctest::Approx(b.eigenvalues[i]).epsilon(1e-11));
    // but the matrix itself moved
    bool any_moved = false;
    for (int i = 0; i < 8 && !any_moved; ++i)
        for (int j = 0; j < 8 && !any_moved; ++j)
            if (ring.entries(i, j) != shuffled.entries(i, j)) any_moved = true;
    CHECK(any_moved);
}

TEST_CASE("invalid topology parameters are rejected") {
    CHECK_THROWS_AS(build_topology(Kind::kGrid, 5), ValidationError);
    CHECK_THROWS_AS(build_topology(Kind::kRing, 0), ValidationError);
    CHECK_THROWS_AS(kind_from_string("torus"), ValidationError);
}

TEST_CASE("gossip mixing preserves the ensemble mean") {
    const GossipMatrix ring = build_topology(Kind::kRing, 6);
    engine::WorkerEnsemble ens = engine::make_ensemble(6, 4, 21, 1.0, 1.0);
    Vec before = ens.averaged_model();
    ens.weights = gossip_mix(ring, ens.weights);
    Vec after = ens.averaged_model();
    for (size_t i = 0; i < before.size(); ++i)
        CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-13));
}

TEST_CASE("pure gossip contracts consensus distance at the spectral rate") {
    const GossipMatrix ring = build_topology(Kind::kRing, 8);
    const double lambda = spectral_report(ring).lambda;
    engine::WorkerEnsemble ens = engine::make_ensemble(8, 5, 33, 0.5, 1.0);

    auto tr_xi = [](const engine::WorkerEnsemble& e) {
        const Vec avg = e.averaged_model();
        double acc = 0.0;
        for (const Vec& w : e.weights)
            for (size_t i = 0; i < avg.size(); ++i) {
                const double dlt = w[i] - avg[i];
                acc += dlt * dlt;
            }
        return acc / static_cast<double>(e.m);
    };

    double prev = tr_xi(ens);
    for (int t = 0; t < 10; ++t) {
        ens.weights = gossip_mix(ring, ens.weights);
        const double cur = tr_xi(ens);
        CHECK(cur <= lambda * lambda * prev * (1.0 + 1e-12));
        prev = cur;
    }
    CHECK(prev < 1e-2 * tr_xi(engine::make_ensemble(8, 5, 33, 0.5, 1.0)));
}

TEST_CASE("custom topology files load and validate") {
    const std::string good = write_temp("clab_topo_good.txt", "3\n0 1\n1 2\n2 0\n");
    const GossipMatrix p = load_topology_file(good);
    CHECK(p.m == 3);
    CHECK(p.edges.size() == 3);
    check_gossip_invariants(p);

    const std::string dup = write_temp("clab_topo_dup.txt", "3\n0 1\n1 0\n");
    CHECK_THROWS_WITH_AS(load_topology_file(dup),
                         doctest::Contains("line 3"), ValidationError);

    const std::string self_loop = write_temp("clab_topo_self.txt", "3\n1 1\n");
    CHECK_THROWS_WITH_AS(load_topology_file(self_loop),
                         doctest::Contains("self-loop"), ValidationError);

    const std::string range = write_temp("clab_topo_range.txt", "3\n0 3\n");
    CHECK_THROWS_WITH_AS(load_topology_file(range),
                         doctest::Contains("out of range"), ValidationError);

    CHECK_THROWS_AS(load_topology_file("/nonexistent/topology.txt"), ValidationError);
}

TEST_CASE("star hub mixes in one hop from every leaf") {
    const GossipMatrix star = build_topology(Kind::kStar, 5);
    // every leaf has exactly one edge, to worker 0
    int hub_edges = 0;
    for (const auto& [j, k] : star.edges) {
        CHECK(j == 0);
        ++hub_edges;
    }
    CHECK(hub_edges == 4);
    const auto rep = spectral_report(star);
    CHECK(rep.spectral_gap > 0.0);
    CHECK(rep.spectral_gap <= 1.0);
}
