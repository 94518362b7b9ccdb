#include "clab/rng.hpp"

#include <cmath>

namespace clab {

namespace {
constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

uint64_t mix64(uint64_t x) {
    x += kGamma;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

DetRng::DetRng(uint64_t seed, Stream stream, uint64_t a, uint64_t b) {
    uint64_t k = mix64(seed);
    k = mix64(k ^ static_cast<uint64_t>(stream));
    k = mix64(k ^ a);
    key_ = mix64(k ^ b);
}

uint64_t DetRng::next_u64() { return mix64(key_ + (++counter_) * kGamma); }

double DetRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double DetRng::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double DetRng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = uniform_open();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

int DetRng::uniform_int(int n) {
    // Rejection sampling over the top bits keeps the draw unbiased.
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % un);
}

}  // namespace clab
