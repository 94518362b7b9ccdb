#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clab/linalg.hpp"

namespace clab::topology {

enum class Kind { kRing, kGrid, kExponential, kFullyConnected, kStar, kCustom };

Kind kind_from_string(const std::string& name);
std::string kind_to_string(Kind kind);

// Symmetric doubly stochastic mixing matrix over an undirected communication
// graph. Off-diagonal entries are nonzero exactly on the edge set.
struct GossipMatrix {
    int m = 0;
    Kind kind = Kind::kCustom;
    Mat entries;
    std::vector<std::pair<int, int>> edges;  // (j, k) with j < k, sorted
};

// Build one of the named graphs. ring needs m >= 3, star m >= 2, grid a
// perfect square m >= 4, exponential m >= 2, fully_connected m >= 1.
// Edge weights are Metropolis-Hastings 1/(1 + max(deg_j, deg_k)), which on
// regular graphs reduces to the uniform closed-neighborhood rule (ring 1/3,
// fully connected 1/m); the diagonal absorbs the remainder.
GossipMatrix build_topology(Kind kind, int m);

// Custom graph from a text file: first line is m, each following nonempty
// line one undirected 0-indexed edge "j k". Self-loops, out-of-range ids,
// and duplicate edges (either orientation) are rejected.
GossipMatrix load_topology_file(const std::string& path);

GossipMatrix shuffle_workers(const GossipMatrix& p, uint64_t seed);

struct SpectralReport {
    Vec eigenvalues;      // descending
    double lambda = 0.0;  // max(|lambda_2|, |lambda_m|); 0 when m == 1
    double spectral_gap = 1.0;
};

SpectralReport spectral_report(const GossipMatrix& p);

// One synchronous gossip round: out[j] = sum_k P(j,k) * stack[k],
// accumulated in ascending k so the result is bitwise reproducible.
std::vector<Vec> gossip_mix(const GossipMatrix& p, const std::vector<Vec>& stack);

// Throws ValidationError if any structural invariant is violated
// (symmetry, stochasticity, nonnegativity, sparsity pattern).
void check_gossip_invariants(const GossipMatrix& p, double tol = 1e-12);

}  // namespace clab::topology
