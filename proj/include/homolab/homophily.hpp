#pragma once

#include <homolab/errors.hpp>
#include <homolab/graph.hpp>

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace homolab {

/// Fraction of edges whose endpoints share a label. Each undirected edge counts once.
inline double global_homophily(const Graph& g) {
    if (g.edge_count() == 0) throw DegenerateError("no edges");
    std::size_t same = 0;
    for (const auto& e : g.edges()) {
        if (g.label(e.u) == g.label(e.v)) ++same;
    }
    return static_cast<double>(same) / static_cast<double>(g.edge_count());
}

/// Number of incident edges of `node` that reach a same-label neighbor.
inline std::size_t same_label_degree(const Graph& g, NodeId node) {
    std::size_t same = 0;
    const ClassId y = g.label(node);
    for (NodeId nb : g.neighbors(node)) {
        if (g.label(nb) == y) ++same;
    }
    return same;
}

/// Fraction of a node's incident edges that join it to a same-label neighbor.
inline double local_homophily(const Graph& g, NodeId node) {
    detail::require(node < g.node_count(), "node " + std::to_string(node) + " out of range");
    const std::size_t deg = g.degree(node);
    if (deg == 0) {
        throw DegenerateError("undefined local homophily: node " + std::to_string(node) +
                              " is isolated");
    }
    return static_cast<double>(same_label_degree(g, node)) / static_cast<double>(deg);
}

/// Local homophily for every node; std::nullopt for isolated nodes.
inline std::vector<std::optional<double>> local_homophily_all(const Graph& g) {
    std::vector<std::optional<double>> out(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const std::size_t deg = g.degree(v);
        if (deg > 0) {
            out[v] = static_cast<double>(same_label_degree(g, v)) / static_cast<double>(deg);
        }
    }
    return out;
}

/// Row-normalized class-to-class incidence matrix.
struct CompatibilityMatrix {
    Eigen::MatrixXd values;
    /// populated[c] is false when class c has no incident edges; its row is all zero.
    std::vector<bool> populated;
};

/// Entry (a, b) is the share of edge endpoints in class a whose other endpoint is in
/// class b, counting each undirected edge once per direction.
inline CompatibilityMatrix compatibility_matrix(const Graph& g) {
    if (g.edge_count() == 0) throw DegenerateError("no edges");
    const auto c = static_cast<Eigen::Index>(g.class_count());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(c, c);
    for (const auto& e : g.edges()) {
        const auto a = static_cast<Eigen::Index>(g.label(e.u));
        const auto b = static_cast<Eigen::Index>(g.label(e.v));
        counts(a, b) += 1.0;
        counts(b, a) += 1.0;
    }
    CompatibilityMatrix out{Eigen::MatrixXd::Zero(c, c), std::vector<bool>(g.class_count(), false)};
    for (Eigen::Index r = 0; r < c; ++r) {
        const double total = counts.row(r).sum();
        if (total > 0.0) {
            out.values.row(r) = counts.row(r) / total;
            out.populated[static_cast<std::size_t>(r)] = true;
        }
    }
    return out;
}

struct HomophilySummary {
    double global_ratio{};
    std::vector<std::optional<double>> per_node_ratio;
    CompatibilityMatrix compatibility;
};

inline HomophilySummary summarize_homophily(const Graph& g) {
    return {global_homophily(g), local_homophily_all(g), compatibility_matrix(g)};
}

} // namespace homolab
