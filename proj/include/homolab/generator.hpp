#pragma once

#include <homolab/detail/fenwick.hpp>
#include <homolab/errors.hpp>
#include <homolab/graph.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace homolab {

using Rng = std::mt19937_64;

/// How the off-diagonal mass of the attachment compatibility matrix is laid out.
enum class CompatibilityConvention {
    /// Diagonal h, off-diagonal (1-h)/(c-1): each row is a probability distribution,
    /// so a same-class attachment happens with probability ~h on balanced classes.
    RowStochastic,
    /// Diagonal h, off-diagonal (1-h)/c, exactly as build_compatibility() returns it.
    Literal,
};

/// Mean of the per-class feature Gaussian.
enum class FeatureMean {
    /// Entry j has mean epsilon * [j == label].
    OneHot,
    /// Every entry has mean epsilon * label.
    LabelScaled,
};

struct GeneratorConfig {
    std::size_t n{5000};
    std::size_t m{20};
    std::vector<double> class_probs{0.5, 0.5};
    double h{0.5};
    double rho{0.0};
    double epsilon{0.5};
    int delta{5};
    std::uint64_t seed{0};
    CompatibilityConvention compatibility{CompatibilityConvention::RowStochastic};
    FeatureMean feature_mean{FeatureMean::OneHot};

    std::size_t class_count() const noexcept { return class_probs.size(); }

    void validate() const {
        detail::require(m >= 1, "m: must be >= 1");
        detail::require(n >= m, "n: must be >= m");
        detail::require(n >= 2, "n: must be >= 2 (a single node cannot carry an edge)");
        detail::require(n <= std::numeric_limits<NodeId>::max(), "n: too large");
        detail::require(class_probs.size() >= 2, "class_probs: need at least 2 classes");
        double sum = 0.0;
        for (double p : class_probs) {
            detail::require(p >= 0.0 && p <= 1.0, "class_probs: entries must lie in [0,1]");
            sum += p;
        }
        detail::require(std::abs(sum - 1.0) <= 1e-12, "class_probs: must sum to 1");
        detail::require(h >= 0.0 && h <= 1.0, "h: must lie in [0,1]");
        detail::require(rho >= 0.0 && rho <= 1.0, "rho: must lie in [0,1]");
        detail::require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon: must lie in [0,1]");
        detail::require(delta >= 0, "delta: must be >= 0");
    }
};

/// Compatibility matrix with diagonal h and off-diagonal (1-h)/c.
inline Eigen::MatrixXd build_compatibility(double h, std::size_t c) {
    detail::require(c >= 2, "compatibility matrix needs at least 2 classes");
    detail::require(h >= 0.0 && h <= 1.0, "h: must lie in [0,1]");
    const auto k = static_cast<Eigen::Index>(c);
    Eigen::MatrixXd out = Eigen::MatrixXd::Constant(k, k, (1.0 - h) / static_cast<double>(c));
    out.diagonal().setConstant(h);
    return out;
}

/// Compatibility matrix with diagonal h and off-diagonal (1-h)/(c-1).
inline Eigen::MatrixXd build_row_stochastic_compatibility(double h, std::size_t c) {
    detail::require(c >= 2, "compatibility matrix needs at least 2 classes");
    detail::require(h >= 0.0 && h <= 1.0, "h: must lie in [0,1]");
    const auto k = static_cast<Eigen::Index>(c);
    Eigen::MatrixXd out =
        Eigen::MatrixXd::Constant(k, k, (1.0 - h) / static_cast<double>(c - 1));
    out.diagonal().setConstant(h);
    return out;
}

inline Eigen::MatrixXd attachment_compatibility(const GeneratorConfig& cfg) {
    return cfg.compatibility == CompatibilityConvention::Literal
               ? build_compatibility(cfg.h, cfg.class_count())
               : build_row_stochastic_compatibility(cfg.h, cfg.class_count());
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Gaussian node features of dimension c with unit variance per entry.
inline std::vector<double> sample_features(ClassId label, double epsilon, std::size_t c, Rng& rng,
                                           FeatureMean mean = FeatureMean::OneHot) {
    detail::require(epsilon >= 0.0 && epsilon <= 1.0, "epsilon: must lie in [0,1]");
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> x(c);
    for (std::size_t j = 0; j < c; ++j) {
        const double mu = mean == FeatureMean::OneHot
                              ? (j == label ? epsilon : 0.0)
                              : epsilon * static_cast<double>(label);
        x[j] = mu + noise(rng);
    }
    return x;
}

/// Number of same-class slots for k attachments at sampled local homophily h'.
/// Rounds half to even.
struct SlotSplit {
    std::size_t same{};
    std::size_t different{};
};

inline SlotSplit split_slots(std::size_t k, double h_prime) {
    const auto same = static_cast<std::size_t>(std::nearbyint(static_cast<double>(k) * h_prime));
    return {same, k - same};
}

/// One directed attachment made during growth: `source` arrived and linked to `target`.
struct Attachment {
    NodeId source{};
    NodeId target{};
    bool tracked{};  // counted toward the target's drift
};

/// Mutable graph under construction plus the drift counters of the growth process.
class GrowthState {
public:
    GrowthState(std::size_t class_count, std::size_t capacity)
        : capacity_(capacity),
          class_weights_(class_count, detail::FenwickTree(capacity)),
          members_(class_count),
          excluded_in_class_(class_count, 0) {
        labels_.reserve(capacity);
        degree_.reserve(capacity);
        drift_.reserve(capacity);
        adjacency_.reserve(capacity);
        masked_.reserve(capacity);
    }

    std::size_t node_count() const noexcept { return labels_.size(); }
    std::size_t class_count() const noexcept { return members_.size(); }
    ClassId label(NodeId v) const { return labels_[v]; }
    std::size_t degree(NodeId v) const { return degree_[v]; }
    int drift(NodeId v) const { return drift_[v]; }
    std::span<const int> drifts() const noexcept { return drift_; }
    std::span<const NodeId> members(ClassId c) const { return members_[c]; }
    std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
    std::span<const Attachment> attachments() const noexcept { return attachments_; }

    bool adjacent(NodeId a, NodeId b) const {
        const auto& row = adjacency_[a];
        return std::find(row.begin(), row.end(), b) != row.end();
    }

    NodeId add_node(ClassId label) {
        detail::require(node_count() < capacity_, "growth state is full");
        detail::require(label < class_count(), "label out of range");
        const auto v = static_cast<NodeId>(labels_.size());
        labels_.push_back(label);
        degree_.push_back(0);
        drift_.push_back(0);
        adjacency_.emplace_back();
        masked_.push_back(0);
        members_[label].push_back(v);
        return v;
    }

    /// Adds edge (source, target). When `track_drift` is set the target's drift
    /// moves +1 for a same-label source and -1 otherwise.
    void connect(NodeId source, NodeId target, bool track_drift) {
        detail::require(source != target, "self-loop");
        detail::require(!adjacent(source, target), "duplicate edge");
        adjacency_[source].push_back(target);
        adjacency_[target].push_back(source);
        bump_degree(source);
        bump_degree(target);
        if (track_drift) drift_[target] += labels_[source] == labels_[target] ? 1 : -1;
        attachments_.push_back({source, target, track_drift});
    }

    void reset_drift(NodeId v) { drift_[v] = 0; }

    // Sampling support. A masked node has zero weight and is skipped by every draw.
    // Masks are temporary: callers unmask everything they masked before returning.

    const detail::FenwickTree& class_weights(ClassId c) const { return class_weights_[c]; }
    bool masked(NodeId v) const { return masked_[v] != 0; }
    std::size_t unmasked_in_class(ClassId c) const {
        return members_[c].size() - excluded_in_class_[c];
    }

    void mask(NodeId v) {
        if (masked_[v]) return;
        masked_[v] = 1;
        ++excluded_in_class_[labels_[v]];
        class_weights_[labels_[v]].set(v, 0);
    }

    void unmask(NodeId v) {
        if (!masked_[v]) return;
        masked_[v] = 0;
        --excluded_in_class_[labels_[v]];
        class_weights_[labels_[v]].set(v, static_cast<std::int64_t>(degree_[v]));
    }

private:
    void bump_degree(NodeId v) {
        ++degree_[v];
        if (!masked_[v]) class_weights_[labels_[v]].add(v, 1);
    }

    std::size_t capacity_;
    std::vector<ClassId> labels_;
    std::vector<std::size_t> degree_;
    std::vector<int> drift_;
    std::vector<std::vector<NodeId>> adjacency_;
    std::vector<char> masked_;
    std::vector<detail::FenwickTree> class_weights_;
    std::vector<std::vector<NodeId>> members_;
    std::vector<std::size_t> excluded_in_class_;
    std::vector<Attachment> attachments_;
};

struct AttachmentParams {
    double rho{0.0};
    Eigen::MatrixXd compatibility;
    int delta{5};
};

struct NeighborDraw {
    std::vector<NodeId> targets;
    bool uniform_branch{false};
    double h_prime{0.0};
    std::size_t same_slots{0};
    /// Times a class bucket ran dry and the draw filled from elsewhere.
    std::size_t fallbacks{0};
};

namespace detail {

// Masks every node it touches and unmasks them on destruction.
class MaskGuard {
public:
    explicit MaskGuard(GrowthState& state) : state_(state) {}
    MaskGuard(const MaskGuard&) = delete;
    MaskGuard& operator=(const MaskGuard&) = delete;
    ~MaskGuard() {
        for (NodeId v : touched_) state_.unmask(v);
    }

    void mask(NodeId v) {
        if (state_.masked(v)) return;
        state_.mask(v);
        touched_.push_back(v);
    }

    void unmask(NodeId v) { state_.unmask(v); }

private:
    GrowthState& state_;
    std::vector<NodeId> touched_;
};

// Draws up to `count` unmasked nodes, one at a time without replacement, with
// probability proportional to class_mult[label] * degree. If every eligible
// node has zero weight the draw is uniform over eligible nodes. Chosen nodes
// are masked and appended to `out`. Returns the number drawn.
inline std::size_t draw_degree_weighted(GrowthState& state, std::span<const double> class_mult,
                                        std::size_t count, MaskGuard& guard, Rng& rng,
                                        std::vector<NodeId>& out) {
    const std::size_t c = state.class_count();
    std::vector<double> mass(c);
    std::size_t drawn = 0;
    while (drawn < count) {
        double total = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            mass[k] = class_mult[k] > 0.0
                          ? class_mult[k] * static_cast<double>(state.class_weights(
                                                static_cast<ClassId>(k)).total())
                          : 0.0;
            total += mass[k];
        }

        NodeId pick{};
        if (total > 0.0) {
            double r = uniform01(rng) * total;
            std::size_t cls = 0;
            for (; cls + 1 < c; ++cls) {
                if (r < mass[cls]) break;
                r -= mass[cls];
            }
            while (mass[cls] <= 0.0) --cls;  // r landed on the edge of rounding
            const auto& tree = state.class_weights(static_cast<ClassId>(cls));
            std::uniform_int_distribution<std::int64_t> slot(0, tree.total() - 1);
            pick = static_cast<NodeId>(tree.find(slot(rng)));
        } else {
            std::vector<NodeId> eligible;
            for (std::size_t k = 0; k < c; ++k) {
                if (class_mult[k] <= 0.0) continue;
                for (NodeId v : state.members(static_cast<ClassId>(k))) {
                    if (!state.masked(v)) eligible.push_back(v);
                }
            }
            if (eligible.empty()) break;
            std::uniform_int_distribution<std::size_t> idx(0, eligible.size() - 1);
            pick = eligible[idx(rng)];
        }
        guard.mask(pick);
        out.push_back(pick);
        ++drawn;
    }
    return drawn;
}

// Moves up to `count` uniformly chosen entries of `pool` into `out`.
inline std::size_t take_uniform(std::vector<NodeId>& pool, std::size_t count, MaskGuard& guard,
                                Rng& rng, std::vector<NodeId>& out) {
    const std::size_t take = std::min(count, pool.size());
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> idx(i, pool.size() - 1);
        std::swap(pool[i], pool[idx(rng)]);
        guard.mask(pool[i]);
        out.push_back(pool[i]);
    }
    return take;
}

} // namespace detail

/// Chooses `k` distinct existing nodes for an arriving node of label `arriving`.
///
/// With probability rho the arriving node gets a random local homophily h' ~ U(0,1):
/// round(k h') same-label targets are taken first from same-label nodes that drifted
/// heterophilous (drift < -delta), then degree-weighted from the rest of the class;
/// the remaining slots go first to other-label nodes that drifted homophilous
/// (drift > delta), then degree-weighted from the other classes. Otherwise the k
/// targets are drawn sequentially without replacement with probability
/// proportional to compatibility(arriving, label) * degree.
///
/// When a bucket cannot supply its share the rest is filled from the other bucket
/// and counted in NeighborDraw::fallbacks.
inline NeighborDraw get_neighbors(GrowthState& state, ClassId arriving, std::size_t k,
                                  const AttachmentParams& params, Rng& rng) {
    detail::require(state.node_count() >= k, "get_neighbors: fewer existing nodes than k");
    detail::require(arriving < state.class_count(), "get_neighbors: label out of range");
    const std::size_t c = state.class_count();
    NeighborDraw draw;
    draw.targets.reserve(k);
    detail::MaskGuard guard(state);
    std::vector<double> everyone(c, 1.0);

    if (uniform01(rng) < params.rho) {
        draw.uniform_branch = true;
        draw.h_prime = uniform01(rng);
        draw.same_slots = split_slots(k, draw.h_prime).same;

        std::vector<NodeId> het_pool;
        for (NodeId v : state.members(arriving)) {
            if (state.drift(v) < -params.delta) het_pool.push_back(v);
        }
        std::vector<NodeId> hom_pool;
        for (ClassId cls = 0; cls < c; ++cls) {
            if (cls == arriving) continue;
            for (NodeId v : state.members(cls)) {
                if (state.drift(v) > params.delta) hom_pool.push_back(v);
            }
        }

        std::vector<double> same_only(c, 0.0);
        same_only[arriving] = 1.0;
        std::vector<double> others(c, 1.0);
        others[arriving] = 0.0;

        // Same-label slots.
        std::size_t got = detail::take_uniform(het_pool, draw.same_slots, guard, rng, draw.targets);
        if (got < draw.same_slots) {
            for (NodeId v : het_pool) guard.mask(v);
            got += detail::draw_degree_weighted(state, same_only, draw.same_slots - got, guard,
                                                rng, draw.targets);
            for (NodeId v : het_pool) {
                if (std::find(draw.targets.begin(), draw.targets.end(), v) == draw.targets.end())
                    guard.unmask(v);
            }
            if (got < draw.same_slots) ++draw.fallbacks;
        }

        // Other-label slots; absorbs any same-label shortfall.
        const std::size_t want = k - draw.targets.size();
        std::size_t got_diff = detail::take_uniform(hom_pool, want, guard, rng, draw.targets);
        if (got_diff < want) {
            for (NodeId v : hom_pool) guard.mask(v);
            got_diff += detail::draw_degree_weighted(state, others, want - got_diff, guard, rng,
                                                     draw.targets);
            for (NodeId v : hom_pool) {
                if (std::find(draw.targets.begin(), draw.targets.end(), v) == draw.targets.end())
                    guard.unmask(v);
            }
        }
        if (draw.targets.size() < k) {
            ++draw.fallbacks;
            detail::draw_degree_weighted(state, everyone, k - draw.targets.size(), guard, rng,
                                         draw.targets);
        }
    } else {
        std::vector<double> row(c);
        for (std::size_t j = 0; j < c; ++j) {
            row[j] = params.compatibility(static_cast<Eigen::Index>(arriving),
                                          static_cast<Eigen::Index>(j));
        }
        detail::draw_degree_weighted(state, row, k, guard, rng, draw.targets);
        if (draw.targets.size() < k) {
            ++draw.fallbacks;
            detail::draw_degree_weighted(state, everyone, k - draw.targets.size(), guard, rng,
                                         draw.targets);
        }
    }
    return draw;
}

/// Everything recorded while growing one graph.
struct GenerationTrace {
    Graph graph;
    std::vector<int> drift;
    std::vector<Attachment> attachments;  // insertion order
    std::size_t seed_nodes{0};
    std::size_t uniform_branch_draws{0};
    std::size_t fallbacks{0};
};

/// Expected edge count of a generated graph.
inline std::size_t expected_edge_count(std::size_t n, std::size_t m) {
    if (m <= 2) return 1 + (n - 2) * m;
    return m + (n - m) * m;
}

namespace detail {

class Grower {
public:
    explicit Grower(const GeneratorConfig& cfg)
        : cfg_(cfg),
          rng_(cfg.seed),
          state_(cfg.class_count(), cfg.n),
          params_{cfg.rho, attachment_compatibility(cfg), cfg.delta},
          label_dist_(cfg.class_probs.begin(), cfg.class_probs.end()) {
        features_.reserve(cfg.n * cfg.class_count());
    }

    // Node 0 alone, then single-edge arrivals, then one closing edge so the seed
    // holds m nodes and m edges (2 nodes and 1 edge when m <= 2).
    void seed_graph() {
        const std::size_t seed_nodes = std::max<std::size_t>(cfg_.m, 2);
        arrive(0, false);
        while (state_.node_count() < seed_nodes) arrive(1, false);
        if (cfg_.m >= 3) close_seed();
        seed_nodes_ = seed_nodes;
    }

    void grow() {
        while (state_.node_count() < cfg_.n) arrive(cfg_.m, true);
    }

    GenerationTrace finish() {
        std::vector<Edge> edges;
        edges.reserve(state_.attachments().size());
        for (const auto& a : state_.attachments()) edges.push_back(make_edge(a.source, a.target));
        std::vector<ClassId> labels(state_.node_count());
        for (NodeId v = 0; v < labels.size(); ++v) labels[v] = state_.label(v);

        GenerationTrace trace;
        trace.graph = Graph(state_.node_count(), cfg_.class_count(), std::move(labels),
                            cfg_.class_count(), std::move(features_), std::move(edges));
        trace.drift.assign(state_.drifts().begin(), state_.drifts().end());
        trace.attachments.assign(state_.attachments().begin(), state_.attachments().end());
        trace.seed_nodes = seed_nodes_;
        trace.uniform_branch_draws = uniform_draws_;
        trace.fallbacks = fallbacks_;
        return trace;
    }

private:
    // Draw order per node: label, branch coin, h', neighbor samples, features.
    void arrive(std::size_t k, bool track_drift) {
        const auto label = static_cast<ClassId>(label_dist_(rng_));
        NeighborDraw draw;
        if (k > 0) {
            draw = get_neighbors(state_, label, k, params_, rng_);
            uniform_draws_ += draw.uniform_branch ? 1 : 0;
            fallbacks_ += draw.fallbacks;
        }
        const NodeId u = state_.add_node(label);
        for (NodeId v : draw.targets) state_.connect(u, v, track_drift);
        state_.reset_drift(u);
        const auto x = sample_features(label, cfg_.epsilon, cfg_.class_count(), rng_,
                                       cfg_.feature_mean);
        features_.insert(features_.end(), x.begin(), x.end());
    }

    // Links node 0 (or, if node 0 already touches everyone, the newest seed node)
    // to a compatibility-weighted partner it is not yet adjacent to.
    void close_seed() {
        NodeId source = 0;
        if (state_.neighbors(0).size() + 1 >= state_.node_count()) {
            source = static_cast<NodeId>(state_.node_count() - 1);
        }
        std::vector<NodeId> partner;
        {
            MaskGuard guard(state_);
            guard.mask(source);
            for (NodeId v : state_.neighbors(source)) guard.mask(v);
            const std::size_t c = cfg_.class_count();
            std::vector<double> row(c);
            for (std::size_t j = 0; j < c; ++j) {
                row[j] = params_.compatibility(static_cast<Eigen::Index>(state_.label(source)),
                                               static_cast<Eigen::Index>(j));
            }
            if (draw_degree_weighted(state_, row, 1, guard, rng_, partner) == 0) {
                ++fallbacks_;
                std::vector<double> everyone(c, 1.0);
                draw_degree_weighted(state_, everyone, 1, guard, rng_, partner);
            }
        }
        state_.connect(source, partner.front(), false);
    }

    const GeneratorConfig& cfg_;
    Rng rng_;
    GrowthState state_;
    AttachmentParams params_;
    std::discrete_distribution<std::size_t> label_dist_;
    std::vector<double> features_;
    std::size_t seed_nodes_{0};
    std::size_t uniform_draws_{0};
    std::size_t fallbacks_{0};
};

} // namespace detail

/// Grows a graph and returns it together with the drift counters and attachment log.
inline GenerationTrace generate_with_trace(const GeneratorConfig& cfg) {
    cfg.validate();
    detail::Grower grower(cfg);
    grower.seed_graph();
    grower.grow();
    return grower.finish();
}

/// Only the connected seed graph: m nodes and m edges (2 nodes, 1 edge for m <= 2).
inline GenerationTrace initialize_seed_graph(const GeneratorConfig& cfg) {
    cfg.validate();
    detail::Grower grower(cfg);
    grower.seed_graph();
    return grower.finish();
}

/// Local-homophily-controlled preferential attachment graph.
inline Graph generate(const GeneratorConfig& cfg) { return generate_with_trace(cfg).graph; }

} // namespace homolab
