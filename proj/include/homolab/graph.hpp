#pragma once

#include <homolab/errors.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace homolab {

using NodeId = std::uint32_t;
using ClassId = std::uint32_t;

/// Undirected edge, always stored with u < v.
struct Edge {
    NodeId u{};
    NodeId v{};

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(NodeId a, NodeId b) noexcept {
    return a < b ? Edge{a, b} : Edge{b, a};
}

/// Simple undirected labelled graph with dense per-node features.
///
/// Immutable once built. Edges are kept in canonical form (smaller endpoint
/// first, sorted lexicographically) and a CSR adjacency is derived on
/// construction. Construction rejects self-loops, duplicate pairs,
/// out-of-range endpoints and labels, and ragged feature rows.
class Graph {
public:
    Graph() = default;

    Graph(std::size_t node_count, std::size_t class_count, std::vector<ClassId> labels,
          std::size_t feature_dim, std::vector<double> features, std::vector<Edge> edges)
        : node_count_(node_count),
          class_count_(class_count),
          feature_dim_(feature_dim),
          labels_(std::move(labels)),
          features_(std::move(features)),
          edges_(std::move(edges)) {
        validate_and_index();
    }

    /// Convenience constructor taking one feature vector per node.
    static Graph from_rows(std::size_t node_count, std::size_t class_count,
                           std::vector<ClassId> labels,
                           const std::vector<std::vector<double>>& feature_rows,
                           std::vector<Edge> edges) {
        detail::require(feature_rows.size() == node_count,
                        "features length " + std::to_string(feature_rows.size()) +
                            " != node count " + std::to_string(node_count));
        const std::size_t dim = feature_rows.empty() ? 0 : feature_rows.front().size();
        std::vector<double> flat;
        flat.reserve(node_count * dim);
        for (std::size_t i = 0; i < feature_rows.size(); ++i) {
            detail::require(feature_rows[i].size() == dim,
                            "feature row " + std::to_string(i) + " has dimension " +
                                std::to_string(feature_rows[i].size()) + ", expected " +
                                std::to_string(dim));
            flat.insert(flat.end(), feature_rows[i].begin(), feature_rows[i].end());
        }
        return Graph(node_count, class_count, std::move(labels), dim, std::move(flat),
                     std::move(edges));
    }

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t class_count() const noexcept { return class_count_; }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    ClassId label(NodeId v) const { return labels_[v]; }
    std::span<const ClassId> labels() const noexcept { return labels_; }

    std::span<const double> features(NodeId v) const {
        return {features_.data() + static_cast<std::size_t>(v) * feature_dim_, feature_dim_};
    }
    std::span<const double> feature_data() const noexcept { return features_; }

    std::span<const Edge> edges() const noexcept { return edges_; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }

    /// Number of incident edges; 0 for isolated nodes.
    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

    bool has_edge(NodeId a, NodeId b) const {
        const auto nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

private:
    void validate_and_index() {
        detail::require(node_count_ >= 1, "graph needs at least one node");
        detail::require(class_count_ >= 1, "class count must be >= 1");
        detail::require(labels_.size() == node_count_,
                        "labels length " + std::to_string(labels_.size()) + " != node count " +
                            std::to_string(node_count_));
        detail::require(features_.size() == node_count_ * feature_dim_,
                        "features size does not match node count x feature dimension");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            detail::require(labels_[i] < class_count_,
                            "label " + std::to_string(labels_[i]) + " of node " +
                                std::to_string(i) + " is >= class count " +
                                std::to_string(class_count_));
        }

        for (auto& e : edges_) {
            detail::require(e.u < node_count_ && e.v < node_count_,
                            "edge [" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                "] has an endpoint >= node count " + std::to_string(node_count_));
            detail::require(e.u != e.v, "self-loop on node " + std::to_string(e.u));
            e = make_edge(e.u, e.v);
        }
        std::sort(edges_.begin(), edges_.end());
        const auto dup = std::adjacent_find(edges_.begin(), edges_.end());
        detail::require(dup == edges_.end(),
                        dup == edges_.end() ? std::string{}
                                            : "duplicate edge [" + std::to_string(dup->u) + "," +
                                                  std::to_string(dup->v) + "]");

        offsets_.assign(node_count_ + 1, 0);
        for (const auto& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < node_count_; ++i) offsets_[i + 1] += offsets_[i];
        adjacency_.resize(offsets_.back());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (const auto& e : edges_) {
            adjacency_[cursor[e.u]++] = e.v;
            adjacency_[cursor[e.v]++] = e.u;
        }
        // Rows come out sorted: every (a, x) with a < x precedes every (x, b).
    }

    std::size_t node_count_{0};
    std::size_t class_count_{0};
    std::size_t feature_dim_{0};
    std::vector<ClassId> labels_;
    std::vector<double> features_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> adjacency_;
};

/// Free-function form used throughout the metrics code.
inline std::size_t degree(const Graph& g, NodeId v) { return g.degree(v); }

} // namespace homolab
