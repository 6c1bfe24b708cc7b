#pragma once

#include <homolab/errors.hpp>
#include <homolab/graph.hpp>
#include <homolab/homophily.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace homolab {

/// Linear node classifiers fitted by least squares on a graph.
enum class FitKind {
    Homophilous,  // rows of (A+I)X
    Concat,       // rows of X || AX
    Baseline,     // rows of X, graph-agnostic
};

inline std::string to_string(FitKind kind) {
    switch (kind) {
    case FitKind::Homophilous: return "homophilous";
    case FitKind::Concat: return "concat";
    case FitKind::Baseline: return "baseline";
    }
    return "unknown";
}

inline FitKind parse_fit_kind(const std::string& s) {
    if (s == "homophilous") return FitKind::Homophilous;
    if (s == "concat") return FitKind::Concat;
    if (s == "baseline") return FitKind::Baseline;
    throw ValidationError("kind: expected homophilous, concat or baseline, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Splits

struct Split {
    std::vector<NodeId> train;
    std::vector<NodeId> val;
    std::vector<NodeId> test;
    std::array<double, 3> ratios{0.5, 0.25, 0.25};
    std::uint64_t seed{0};
};

/// Uniform random train/val/test partition. Each part is returned sorted.
inline Split split_nodes(const Graph& g, std::array<double, 3> ratios, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    if (n < 4) throw ValidationError("split: need at least 4 nodes, got " + std::to_string(n));
    for (double r : ratios) detail::require(r >= 0.0 && r <= 1.0, "ratios: must lie in [0,1]");
    detail::require(std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) <= 1e-9,
                    "ratios: must sum to 1");

    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto nd = static_cast<double>(n);
    const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(ratios[0] * nd)));
    const auto n_val =
        std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(ratios[1] * nd)));

    Split s;
    s.ratios = ratios;
    s.seed = seed;
    const auto first = order.begin();
    s.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(first + static_cast<std::ptrdiff_t>(n_train),
                 first + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

// ---------------------------------------------------------------------------
// Least-squares fits

/// Per-node input rows of the given model for every node.
inline Eigen::MatrixXd design_matrix(const Graph& g, FitKind kind) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    const auto f = static_cast<Eigen::Index>(g.feature_dim());
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        X(g.feature_data().data(), n, f);
    if (kind == FitKind::Baseline) return X;

    Eigen::MatrixXd AX = Eigen::MatrixXd::Zero(n, f);
    for (const auto& e : g.edges()) {
        AX.row(e.u) += X.row(e.v);
        AX.row(e.v) += X.row(e.u);
    }
    if (kind == FitKind::Homophilous) return AX + X;

    Eigen::MatrixXd out(n, 2 * f);
    out << X, AX;
    return out;
}

inline constexpr double kDefaultRidge = 1e-8;

/// Solves min ||R W - Y||^2 + ridge ||W||^2 over the given rows via the normal
/// equations, with Y the one-hot labels.
inline Eigen::MatrixXd fit_rows(const Eigen::MatrixXd& design, const Graph& g,
                                std::span<const NodeId> rows, double ridge = kDefaultRidge) {
    if (rows.empty()) throw ValidationError("fit: training set is empty");
    const auto cols = design.cols();
    const auto c = static_cast<Eigen::Index>(g.class_count());
    Eigen::MatrixXd R(static_cast<Eigen::Index>(rows.size()), cols);
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        R.row(r) = design.row(rows[i]);
        Y(r, static_cast<Eigen::Index>(g.label(rows[i]))) = 1.0;
    }
    Eigen::MatrixXd normal = R.transpose() * R;
    normal.diagonal().array() += ridge;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-15)) {
        throw DegenerateError("fit: normal equations are rank-deficient beyond ridge rescue");
    }
    Eigen::MatrixXd W = ldlt.solve(R.transpose() * Y);
    if (!W.allFinite()) throw DegenerateError("fit: non-finite weights");
    return W;
}

/// Least-squares weights of a graph model ((A+I)X or X || AX) on the training nodes.
inline Eigen::MatrixXd fit_linear_gnn(const Graph& g, std::span<const NodeId> train, FitKind kind,
                                      double ridge = kDefaultRidge) {
    return fit_rows(design_matrix(g, kind), g, train, ridge);
}

/// Features-only least-squares classifier; ignores the edge set.
inline Eigen::MatrixXd fit_baseline(const Graph& g, std::span<const NodeId> train,
                                    double ridge = kDefaultRidge) {
    return fit_rows(design_matrix(g, FitKind::Baseline), g, train, ridge);
}

/// Argmax class per node (ties to the lowest class index).
inline std::vector<ClassId> predict(const Graph& g, const Eigen::MatrixXd& W, FitKind kind) {
    const Eigen::MatrixXd Z = design_matrix(g, kind) * W;
    std::vector<ClassId> out(g.node_count());
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < Z.cols(); ++j) {
            if (Z(i, j) > Z(i, best)) best = j;
        }
        out[static_cast<std::size_t>(i)] = static_cast<ClassId>(best);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scores

/// Unweighted mean of per-class F1 over the classes that occur in either
/// `truth` or `pred`. A class with no true positives scores 0.
inline double macro_f1(std::span<const ClassId> truth, std::span<const ClassId> pred,
                       std::size_t class_count) {
    detail::require(truth.size() == pred.size(), "macro_f1: length mismatch");
    if (truth.empty()) throw ValidationError("macro_f1: no samples");
    std::vector<std::size_t> tp(class_count, 0), fp(class_count, 0), fn(class_count, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        detail::require(truth[i] < class_count && pred[i] < class_count,
                        "macro_f1: class index out of range");
        if (truth[i] == pred[i]) {
            ++tp[truth[i]];
        } else {
            ++fp[pred[i]];
            ++fn[truth[i]];
        }
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t k = 0; k < class_count; ++k) {
        const std::size_t denom = 2 * tp[k] + fp[k] + fn[k];
        if (denom == 0) continue;
        sum += 2.0 * static_cast<double>(tp[k]) / static_cast<double>(denom);
        ++present;
    }
    return sum / static_cast<double>(present);
}

// ---------------------------------------------------------------------------
// Binned reports

inline std::vector<double> default_bin_edges() { return {0.0, 0.25, 0.5, 0.75, 1.0}; }
inline constexpr std::size_t kMinBinOccupancy = 3;

struct BinStats {
    double lo{};
    double hi{};
    std::size_t count{};   // nodes, summed over runs
    double f1_mean{};
    double f1_std{};       // sample std across runs; 0 for a single run
    std::size_t runs{};    // runs in which the bin was not flagged
    bool flagged{};        // under-occupied (or missing) in every run
};

struct BinnedReport {
    std::string tag;
    std::vector<double> edges;
    std::vector<BinStats> bins;
};

inline void validate_bin_edges(std::span<const double> edges) {
    detail::require(edges.size() >= 2, "bins: need at least two edges");
    detail::require(edges.front() == 0.0 && edges.back() == 1.0, "bins: must span [0,1]");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        detail::require(edges[i] > edges[i - 1], "bins: edges must be strictly increasing");
    }
}

/// Index of the bin holding x: half-open [lo, hi) except the last, which is closed.
inline std::size_t bin_index(std::span<const double> edges, double x) {
    const std::size_t last = edges.size() - 2;
    if (x >= edges[last]) return last;
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

/// Per-bin macro-F1 of predictions `pred` over `nodes`, grouped by local homophily.
/// Isolated nodes are skipped. Bins with fewer than `min_count` nodes are flagged.
inline BinnedReport bin_scores(const Graph& g, std::span<const NodeId> nodes,
                               std::span<const ClassId> pred, std::span<const double> edges,
                               std::string tag, std::size_t min_count = kMinBinOccupancy) {
    validate_bin_edges(edges);
    const std::size_t nb = edges.size() - 1;
    std::vector<std::vector<ClassId>> truth(nb), guess(nb);
    for (NodeId v : nodes) {
        if (g.degree(v) == 0) continue;
        const std::size_t b = bin_index(edges, local_homophily(g, v));
        truth[b].push_back(g.label(v));
        guess[b].push_back(pred[v]);
    }
    BinnedReport report{std::move(tag), {edges.begin(), edges.end()}, {}};
    report.bins.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        BinStats& s = report.bins[b];
        s.lo = edges[b];
        s.hi = edges[b + 1];
        s.count = truth[b].size();
        s.flagged = s.count < min_count;
        if (!s.flagged) {
            s.f1_mean = macro_f1(truth[b], guess[b], g.class_count());
            s.runs = 1;
        }
    }
    return report;
}

/// Per-bin macro-F1 of a fitted model on the test nodes.
inline BinnedReport evaluate_binned(const Graph& g, const Split& split, const Eigen::MatrixXd& W,
                                    FitKind kind,
                                    std::span<const double> edges = default_bin_edges(),
                                    std::size_t min_count = kMinBinOccupancy) {
    const auto pred = predict(g, W, kind);
    BinnedReport report = bin_scores(g, split.test, pred, edges, to_string(kind), min_count);
    const bool any = std::any_of(report.bins.begin(), report.bins.end(),
                                 [](const BinStats& b) { return !b.flagged; });
    if (!any) throw DegenerateError("evaluate: every bin has fewer than " +
                                    std::to_string(min_count) + " test nodes");
    return report;
}

/// Mean and sample standard deviation of each bin's F1 across runs, skipping
/// runs where the bin was flagged.
inline BinnedReport aggregate_reports(std::span<const BinnedReport> runs) {
    if (runs.empty()) throw ValidationError("aggregate: no reports");
    BinnedReport out{runs.front().tag, runs.front().edges, {}};
    const std::size_t nb = out.edges.size() - 1;
    out.bins.resize(nb);
    for (const auto& r : runs) {
        detail::require(r.edges == out.edges, "aggregate: reports use different bins");
    }
    for (std::size_t b = 0; b < nb; ++b) {
        BinStats& s = out.bins[b];
        s.lo = out.edges[b];
        s.hi = out.edges[b + 1];
        std::vector<double> f1s;
        for (const auto& r : runs) {
            s.count += r.bins[b].count;
            if (!r.bins[b].flagged) f1s.push_back(r.bins[b].f1_mean);
        }
        s.runs = f1s.size();
        s.flagged = f1s.empty();
        if (s.flagged) continue;
        s.f1_mean = std::accumulate(f1s.begin(), f1s.end(), 0.0) / static_cast<double>(f1s.size());
        if (f1s.size() > 1) {
            double ss = 0.0;
            for (double x : f1s) ss += (x - s.f1_mean) * (x - s.f1_mean);
            s.f1_std = std::sqrt(ss / static_cast<double>(f1s.size() - 1));
        }
    }
    return out;
}

/// Per-bin F1(model) - F1(baseline). A bin flagged in either input is flagged.
/// The spread combines both spreads as if independent.
inline BinnedReport delta_f1(const BinnedReport& model, const BinnedReport& baseline) {
    detail::require(model.edges == baseline.edges, "delta_f1: reports use different bins");
    BinnedReport out{model.tag + "-minus-" + baseline.tag, model.edges, model.bins};
    for (std::size_t b = 0; b < out.bins.size(); ++b) {
        BinStats& s = out.bins[b];
        const BinStats& base = baseline.bins[b];
        s.flagged = model.bins[b].flagged || base.flagged;
        s.runs = std::min(model.bins[b].runs, base.runs);
        if (s.flagged) {
            s.f1_mean = 0.0;
            s.f1_std = 0.0;
            continue;
        }
        s.f1_mean = model.bins[b].f1_mean - base.f1_mean;
        s.f1_std = std::hypot(model.bins[b].f1_std, base.f1_std);
    }
    return out;
}

/// max - min of the unflagged bins' mean F1 (0 when fewer than two bins qualify).
inline double bin_gap(const BinnedReport& r) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& b : r.bins) {
        if (b.flagged) continue;
        lo = any ? std::min(lo, b.f1_mean) : b.f1_mean;
        hi = any ? std::max(hi, b.f1_mean) : b.f1_mean;
        any = true;
    }
    return hi - lo;
}

} // namespace homolab
