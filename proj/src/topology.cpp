#include "clab/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "clab/errors.hpp"
#include "clab/rng.hpp"

namespace clab::topology {

namespace {

std::vector<std::pair<int, int>> normalize_edges(const std::set<std::pair<int, int>>& raw) {
    std::vector<std::pair<int, int>> out(raw.begin(), raw.end());
    std::sort(out.begin(), out.end());
    return out;
}

GossipMatrix from_edges(Kind kind, int m, const std::set<std::pair<int, int>>& raw) {
    GossipMatrix g;
    g.m = m;
    g.kind = kind;
    g.edges = normalize_edges(raw);
    g.entries = Mat(m, m);

    std::vector<int> degree(static_cast<size_t>(m), 0);
    for (const auto& [j, k] : g.edges) {
        ++degree[static_cast<size_t>(j)];
        ++degree[static_cast<size_t>(k)];
    }
    for (const auto& [j, k] : g.edges) {
        double w = 1.0 / (1.0 + std::max(degree[static_cast<size_t>(j)], degree[static_cast<size_t>(k)]));
        g.entries(j, k) = w;
        g.entries(k, j) = w;
    }
    for (int j = 0; j < m; ++j) {
        double off = 0.0;
        for (int k = 0; k < m; ++k)
            if (k != j) off += g.entries(j, k);
        g.entries(j, j) = 1.0 - off;
    }
    check_gossip_invariants(g);
    return g;
}

void add_edge(std::set<std::pair<int, int>>& edges, int j, int k) {
    if (j == k) return;
    edges.insert({std::min(j, k), std::max(j, k)});
}

}  // namespace

Kind kind_from_string(const std::string& name) {
    if (name == "ring") return Kind::kRing;
    if (name == "grid") return Kind::kGrid;
    if (name == "exponential") return Kind::kExponential;
    if (name == "fully_connected") return Kind::kFullyConnected;
    if (name == "star") return Kind::kStar;
    if (name == "custom") return Kind::kCustom;
    throw ValidationError("unknown topology kind: " + name);
}

std::string kind_to_string(Kind kind) {
    switch (kind) {
        case Kind::kRing: return "ring";
        case Kind::kGrid: return "grid";
        case Kind::kExponential: return "exponential";
        case Kind::kFullyConnected: return "fully_connected";
        case Kind::kStar: return "star";
        case Kind::kCustom: return "custom";
    }
    return "custom";
}

GossipMatrix build_topology(Kind kind, int m) {
    if (m < 1) throw ValidationError("topology requires m >= 1");
    std::set<std::pair<int, int>> edges;
    switch (kind) {
        case Kind::kRing: {
            if (m < 3) throw ValidationError("ring topology requires m >= 3");
            for (int j = 0; j < m; ++j) {
                add_edge(edges, j, (j + 1) % m);
                add_edge(edges, j, (j - 1 + m) % m);
            }
            break;
        }
        case Kind::kGrid: {
            int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
            if (side < 2 || side * side != m)
                throw ValidationError("grid topology requires m to be a perfect square >= 4");
            auto id = [side](int r, int c) {
                return ((r % side + side) % side) * side + ((c % side + side) % side);
            };
            for (int r = 0; r < side; ++r)
                for (int c = 0; c < side; ++c) {
                    add_edge(edges, id(r, c), id(r + 1, c));
                    add_edge(edges, id(r, c), id(r - 1, c));
                    add_edge(edges, id(r, c), id(r, c + 1));
                    add_edge(edges, id(r, c), id(r, c - 1));
                }
            break;
        }
        case Kind::kExponential: {
            if (m < 2) throw ValidationError("exponential topology requires m >= 2");
            for (int j = 0; j < m; ++j)
                for (int hop = 1; hop < m; hop *= 2) {
                    add_edge(edges, j, (j + hop) % m);
                    add_edge(edges, j, (j - hop + m) % m);
                }
            break;
        }
        case Kind::kFullyConnected: {
            for (int j = 0; j < m; ++j)
                for (int k = j + 1; k < m; ++k) add_edge(edges, j, k);
            break;
        }
        case Kind::kStar: {
            if (m < 2) throw ValidationError("star topology requires m >= 2");
            for (int k = 1; k < m; ++k) add_edge(edges, 0, k);
            break;
        }
        case Kind::kCustom:
            throw ValidationError("custom topology requires a topology file");
    }
    return from_edges(kind, m, edges);
}

GossipMatrix load_topology_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open topology file: " + path);

    std::string line;
    int m = -1;
    std::set<std::pair<int, int>> edges;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        if (m < 0) {
            if (!(ss >> m) || m < 1)
                throw ValidationError("topology file: first line must be worker count m >= 1");
            std::string rest;
            if (ss >> rest) throw ValidationError("topology file: first line must contain only m");
            continue;
        }
        int j, k;
        if (!(ss >> j)) {
            std::string probe;
            std::istringstream blank(line);
            if (blank >> probe)
                throw ValidationError("topology file line " + std::to_string(lineno) + ": expected 'j k'");
            continue;  // blank line
        }
        std::string rest;
        if (!(ss >> k) || (ss >> rest))
            throw ValidationError("topology file line " + std::to_string(lineno) + ": expected 'j k'");
        if (j < 0 || k < 0 || j >= m || k >= m)
            throw ValidationError("topology file line " + std::to_string(lineno) + ": worker id out of range");
        if (j == k)
            throw ValidationError("topology file line " + std::to_string(lineno) + ": self-loops are not allowed");
        auto edge = std::make_pair(std::min(j, k), std::max(j, k));
        if (!edges.insert(edge).second)
            throw ValidationError("topology file line " + std::to_string(lineno) + ": duplicate edge");
    }
    if (m < 0) throw ValidationError("topology file is empty: " + path);
    return from_edges(Kind::kCustom, m, edges);
}

GossipMatrix shuffle_workers(const GossipMatrix& p, uint64_t seed) {
    std::vector<int> perm(static_cast<size_t>(p.m));
    for (int i = 0; i < p.m; ++i) perm[static_cast<size_t>(i)] = i;
    DetRng rng(seed, Stream::kShuffle);
    rng.shuffle(perm);

    GossipMatrix out;
    out.m = p.m;
    out.kind = p.kind;
    out.entries = Mat(p.m, p.m);
    for (int j = 0; j < p.m; ++j)
        for (int k = 0; k < p.m; ++k)
            out.entries(perm[static_cast<size_t>(j)], perm[static_cast<size_t>(k)]) = p.entries(j, k);
    std::set<std::pair<int, int>> edges;
    for (const auto& [j, k] : p.edges)
        add_edge(edges, perm[static_cast<size_t>(j)], perm[static_cast<size_t>(k)]);
    out.edges = normalize_edges(edges);
    check_gossip_invariants(out);
    return out;
}

SpectralReport spectral_report(const GossipMatrix& p) {
    SpectralReport r;
    EigenSym eig = jacobi_eigensymmetric(p.entries, false);
    r.eigenvalues = eig.eigenvalues;
    if (p.m <= 1) {
        r.lambda = 0.0;
    } else {
        double lam = 0.0;
        for (size_t i = 1; i < r.eigenvalues.size(); ++i)
            lam = std::max(lam, std::fabs(r.eigenvalues[i]));
        r.lambda = lam;
    }
    r.spectral_gap = 1.0 - r.lambda;
    return r;
}

std::vector<Vec> gossip_mix(const GossipMatrix& p, const std::vector<Vec>& stack) {
    if (static_cast<int>(stack.size()) != p.m)
        throw ValidationError("gossip_mix: stack row count does not match matrix size");
    const size_t d = stack.empty() ? 0 : stack[0].size();
    std::vector<Vec> out(stack.size(), Vec(d, 0.0));
    for (int j = 0; j < p.m; ++j) {
        Vec& row = out[static_cast<size_t>(j)];
        for (int k = 0; k < p.m; ++k) {
            const double w = p.entries(j, k);
            if (w == 0.0) continue;
            const Vec& src = stack[static_cast<size_t>(k)];
            for (size_t i = 0; i < d; ++i) row[i] += w * src[i];
        }
    }
    return out;
}

void check_gossip_invariants(const GossipMatrix& p, double tol) {
    if (p.entries.rows != p.m || p.entries.cols != p.m)
        throw ValidationError("gossip matrix: entry block has wrong shape");
    std::set<std::pair<int, int>> edge_set(p.edges.begin(), p.edges.end());
    for (int j = 0; j < p.m; ++j) {
        double row = 0.0;
        for (int k = 0; k < p.m; ++k) {
            double v = p.entries(j, k);
            if (v < 0.0) throw ValidationError("gossip matrix: negative entry");
            if (std::fabs(v - p.entries(k, j)) > tol)
                throw ValidationError("gossip matrix: asymmetric entry");
            if (j != k) {
                bool on_edge = edge_set.count({std::min(j, k), std::max(j, k)}) > 0;
                if (on_edge && v == 0.0)
                    throw ValidationError("gossip matrix: zero weight on a declared edge");
                if (!on_edge && v != 0.0)
                    throw ValidationError("gossip matrix: nonzero weight off the edge set");
            }
            row += v;
        }
        if (std::fabs(row - 1.0) > tol)
            throw ValidationError("gossip matrix: row does not sum to one");
    }
}

}  // namespace clab::topology
