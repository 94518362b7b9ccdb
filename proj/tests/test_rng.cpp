#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "clab/rng.hpp"
#include "doctest.h"

using namespace clab;

TEST_CASE("identical keys replay identical sequences") {
    DetRng a(42, Stream::kBatch, 3, 7);
    DetRng b(42, Stream::kBatch, 3, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    DetRng c(42, Stream::kBatch, 3, 7);
    DetRng d(42, Stream::kBatch, 3, 7);
    for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("streams and tags decorrelate") {
    DetRng a(42, Stream::kBatch, 0, 0);
    DetRng b(42, Stream::kNoise, 0, 0);
    DetRng c(42, Stream::kBatch, 1, 0);
    DetRng d(43, Stream::kBatch, 0, 0);
    int eq_ab = 0, eq_ac = 0, eq_ad = 0;
    for (int i = 0; i < 64; ++i) {
        const uint64_t va = a.next_u64();
        if (va == b.next_u64()) ++eq_ab;
        if (va == c.next_u64()) ++eq_ac;
        if (va == d.next_u64()) ++eq_ad;
    }
    CHECK(eq_ab == 0);
    CHECK(eq_ac == 0);
    CHECK(eq_ad == 0);
}

TEST_CASE("uniform stays in [0,1) and uniform_open in (0,1]") {
    DetRng rng(7, Stream::kInit);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double v = rng.uniform_open();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("uniform_int covers every bucket roughly evenly") {
    DetRng rng(11, Stream::kBatch);
    const int n = 6;
    std::vector<int> counts(n, 0);
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) {
        const int v = rng.uniform_int(n);
        REQUIRE(v >= 0);
        REQUIRE(v < n);
        ++counts[static_cast<size_t>(v)];
    }
    for (int c : counts) {
        CHECK(c > draws / n - 600);
        CHECK(c < draws / n + 600);
    }
}

TEST_CASE("normal moments are near standard") {
    DetRng rng(13, Stream::kNoise);
    const int k = 200000;
    double mean = 0.0, sq = 0.0;
    for (int i = 0; i < k; ++i) {
        const double v = rng.normal();
        mean += v;
        sq += v * v;
    }
    mean /= k;
    sq /= k;
    CHECK(std::fabs(mean) < 0.01);
    CHECK(std::fabs(sq - 1.0) < 0.02);
}

TEST_CASE("shuffle yields a deterministic permutation") {
    std::vector<int> v1 = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> v2 = v1;
    DetRng a(3, Stream::kShuffle);
    DetRng b(3, Stream::kShuffle);
    a.shuffle(v1);
    b.shuffle(v2);
    CHECK(v1 == v2);
    CHECK(std::set<int>(v1.begin(), v1.end()).size() == 10);
    std::vector<int> v3 = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    DetRng c(4, Stream::kShuffle);
    c.shuffle(v3);
    CHECK(v3 != v1);  // different seed, different order
}
