#pragma once

#include <homolab.hpp>

#include <random>
#include <set>
#include <vector>

namespace homolab::testing {

/// Random simple graph on n nodes with edge probability q and c classes.
/// Some nodes may end up isolated.
inline Graph random_graph(std::size_t n, std::size_t c, double q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<ClassId> label(0, static_cast<ClassId>(c - 1));
    std::bernoulli_distribution coin(q);
    std::normal_distribution<double> noise;
    std::vector<ClassId> labels(n);
    for (auto& y : labels) y = label(rng);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (coin(rng)) edges.push_back({u, v});
        }
    }
    std::vector<double> features(n * c);
    for (auto& x : features) x = noise(rng);
    return Graph(n, c, std::move(labels), c, std::move(features), std::move(edges));
}

/// Graph with one-hot features of the labels.
inline Graph labeled_graph(std::size_t n, std::size_t c, std::vector<ClassId> labels,
                           std::vector<Edge> edges) {
    std::vector<double> f(n * c, 0.0);
    for (std::size_t v = 0; v < n; ++v) f[v * c + labels[v]] = 1.0;
    return Graph(n, c, std::move(labels), c, std::move(f), std::move(edges));
}

/// Same-label edge fraction counted straight from the edge list.
inline double brute_global_homophily(const Graph& g) {
    std::size_t same = 0;
    for (const auto& e : g.edges()) same += g.label(e.u) == g.label(e.v);
    return static_cast<double>(same) / static_cast<double>(g.edges().size());
}

/// Degree-weighted mean of local homophily, with each node's ratio counted
/// from the edge list rather than the adjacency.
inline double brute_weighted_local(const Graph& g) {
    std::vector<std::size_t> deg(g.node_count(), 0), same(g.node_count(), 0);
    for (const auto& e : g.edges()) {
        ++deg[e.u];
        ++deg[e.v];
        if (g.label(e.u) == g.label(e.v)) {
            ++same[e.u];
            ++same[e.v];
        }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t v = 0; v < g.node_count(); ++v) {
        if (deg[v] == 0) continue;
        const double h = static_cast<double>(same[v]) / static_cast<double>(deg[v]);
        num += static_cast<double>(deg[v]) * h;
        den += static_cast<double>(deg[v]);
    }
    return num / den;
}

inline bool is_connected(const Graph& g) {
    std::vector<char> seen(g.node_count(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        for (NodeId w : g.neighbors(v)) {
            if (!seen[w]) {
                seen[w] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached == g.node_count();
}

inline bool is_simple(const Graph& g) {
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& e : g.edges()) {
        if (e.u == e.v) return false;
        if (!seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second) return false;
    }
    return true;
}

/// Degree-weighted mean local homophily over non-isolated nodes.
inline double weighted_local_homophily(const Graph& g) {
    double num = 0.0, den = 0.0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const auto d = static_cast<double>(g.degree(v));
        if (d == 0) continue;
        num += d * local_homophily(g, v);
        den += d;
    }
    return num / den;
}

} // namespace homolab::testing
