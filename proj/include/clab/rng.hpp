#pragma once

#include <cstddef>
#include <cstdint>

namespace clab {

// Stream identifiers. Every random draw in the project comes from a stream
// keyed by (seed, stream id, a, b); the draw index is the counter. Replaying
// a key replays the exact draw sequence, which is what makes paired
// comparisons share their randomness and reruns byte-identical.
enum class Stream : uint64_t {
    kInit = 1,
    kWorkerOffset = 2,
    kBatch = 3,
    kEpochPerm = 4,
    kNoise = 5,
    kShuffle = 6,
    kData = 7,
    kProbe = 8,
    kSliceDir = 9,
    kTrialBatch = 10,
    kObjective = 11,
    kSharpness = 12,
    kSmoothing = 13,
};

uint64_t mix64(uint64_t x);  // splitmix64 finalizer

// Counter-based deterministic generator: out_i = mix64(key + i*GAMMA).
// Stateless across construction, cheap to fork, no hidden global state.
class DetRng {
  public:
    DetRng(uint64_t seed, Stream stream, uint64_t a = 0, uint64_t b = 0);

    uint64_t next_u64();
    double uniform();             // [0, 1)
    double uniform_open();        // (0, 1]
    double normal();              // standard normal, Box-Muller with cache
    int uniform_int(int n);       // [0, n), unbiased

    template <typename T>
    void shuffle(T& seq) {        // Fisher-Yates
        for (int i = static_cast<int>(seq.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            auto tmp = seq[static_cast<size_t>(i)];
            seq[static_cast<size_t>(i)] = seq[static_cast<size_t>(j)];
            seq[static_cast<size_t>(j)] = tmp;
        }
    }

  private:
    uint64_t key_;
    uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace clab
