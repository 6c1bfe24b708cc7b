#include "support.hpp"

#include <homolab/io.hpp>

#include <gtest/gtest.h>

#include <map>

using namespace homolab;
using homolab::testing::is_connected;
using homolab::testing::is_simple;

namespace {

GeneratorConfig small_config(double h, double rho, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.n = 600;
    cfg.m = 6;
    cfg.h = h;
    cfg.rho = rho;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST(Compatibility, FormulaExamples) {
    const auto a = build_compatibility(0.9, 2);
    EXPECT_DOUBLE_EQ(a(0, 0), 0.9);
    EXPECT_DOUBLE_EQ(a(1, 1), 0.9);
    EXPECT_DOUBLE_EQ(a(0, 1), 0.05);
    EXPECT_DOUBLE_EQ(a(1, 0), 0.05);

    const auto id = build_compatibility(1.0, 4);
    EXPECT_TRUE(id.isApprox(Eigen::MatrixXd::Identity(4, 4)));

    const auto anti = build_compatibility(0.0, 2);
    EXPECT_DOUBLE_EQ(anti(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(anti(0, 1), 0.5);

    EXPECT_THROW(build_compatibility(0.5, 1), ValidationError);
    EXPECT_THROW(build_compatibility(1.5, 2), ValidationError);
}

TEST(Compatibility, RowStochasticRowsSumToOne) {
    for (std::size_t c : {2u, 3u, 5u}) {
        const auto m = build_row_stochastic_compatibility(0.3, c);
        for (Eigen::Index r = 0; r < m.rows(); ++r) EXPECT_NEAR(m.row(r).sum(), 1.0, 1e-15);
        EXPECT_DOUBLE_EQ(m(0, 0), 0.3);
    }
}

TEST(SlotSplit, RoundsHalfToEven) {
    const auto s = split_slots(20, 0.43);
    EXPECT_EQ(s.same, 9u);
    EXPECT_EQ(s.different, 11u);
    EXPECT_EQ(split_slots(5, 0.5).same, 2u);   // 2.5 -> 2
    EXPECT_EQ(split_slots(3, 0.5).same, 2u);   // 1.5 -> 2
    EXPECT_EQ(split_slots(20, 1.0).same, 20u);
    EXPECT_EQ(split_slots(20, 0.0).same, 0u);
}

TEST(SeedGraph, MNodesAndMEdges) {
    for (std::size_t m : {3u, 5u, 8u, 20u}) {
        GeneratorConfig cfg;
        cfg.n = 100;
        cfg.m = m;
        cfg.seed = m;
        const auto seed = initialize_seed_graph(cfg);
        EXPECT_EQ(seed.graph.node_count(), m);
        EXPECT_EQ(seed.graph.edge_count(), m);
        EXPECT_TRUE(is_connected(seed.graph));
        EXPECT_TRUE(is_simple(seed.graph));
        for (NodeId v = 0; v < m; ++v) EXPECT_GE(seed.graph.degree(v), 1u);
    }
}

TEST(SeedGraph, SmallMUsesTwoNodesAndOneEdge) {
    for (std::size_t m : {1u, 2u}) {
        GeneratorConfig cfg;
        cfg.n = 10;
        cfg.m = m;
        const auto seed = initialize_seed_graph(cfg);
        EXPECT_EQ(seed.graph.node_count(), 2u);
        EXPECT_EQ(seed.graph.edge_count(), 1u);
    }
}

TEST(Generate, EdgeCountConnectivityAndSimplicity) {
    for (std::size_t m : {1u, 2u, 3u, 7u}) {
        GeneratorConfig cfg = small_config(0.3, 0.5, 11);
        cfg.m = m;
        const auto g = generate(cfg);
        EXPECT_EQ(g.node_count(), cfg.n);
        EXPECT_EQ(g.edge_count(), expected_edge_count(cfg.n, cfg.m));
        EXPECT_TRUE(is_connected(g));
        EXPECT_TRUE(is_simple(g));
    }
    EXPECT_EQ(expected_edge_count(5000, 20), 99620u);
}

TEST(Generate, NEqualsMIsSeedOnly) {
    GeneratorConfig cfg;
    cfg.n = 6;
    cfg.m = 6;
    const auto g = generate(cfg);
    EXPECT_EQ(g.node_count(), 6u);
    EXPECT_EQ(g.edge_count(), 6u);
}

TEST(Generate, SameSeedIsByteIdentical) {
    const auto cfg = small_config(0.7, 0.5, 1234);
    const std::string a = serialize_graph(generate(cfg));
    const std::string b = serialize_graph(generate(cfg));
    EXPECT_EQ(a, b);
    auto other = cfg;
    other.seed = 1235;
    EXPECT_NE(a, serialize_graph(generate(other)));
}

TEST(Generate, DriftMatchesReplayOfAttachments) {
    const auto trace = generate_with_trace(small_config(0.2, 0.8, 5));
    std::vector<int> replay(trace.graph.node_count(), 0);
    for (const auto& a : trace.attachments) {
        if (!a.tracked) continue;
        replay[a.target] += trace.graph.label(a.source) == trace.graph.label(a.target) ? 1 : -1;
    }
    EXPECT_EQ(replay, trace.drift);
    // Seed attachments are not tracked; growth ones are.
    std::size_t tracked = 0;
    for (const auto& a : trace.attachments) tracked += a.tracked;
    EXPECT_EQ(tracked, (trace.graph.node_count() - trace.seed_nodes) * 6);
}

TEST(Generate, PerfectHomophilyWithoutUniformBranch) {
    GeneratorConfig cfg = small_config(1.0, 0.0, 3);
    cfg.class_probs = {1.0, 0.0};
    const auto trace = generate_with_trace(cfg);
    EXPECT_DOUBLE_EQ(global_homophily(trace.graph), 1.0);
    EXPECT_EQ(trace.uniform_branch_draws, 0u);
}

TEST(Generate, TwoClassPerfectHomophilyIsNearlyPure) {
    // Cross-class edges only arise while a class has too few members to fill m slots.
    const auto g = generate(small_config(1.0, 0.0, 8));
    EXPECT_GT(global_homophily(g), 0.99);
}

TEST(Generate, RhoZeroTracksTargetHomophily) {
    for (double h : {0.1, 0.9}) {
        double sum = 0.0;
        for (std::uint64_t s = 0; s < 3; ++s) {
            GeneratorConfig cfg;
            cfg.n = 2000;
            cfg.m = 10;
            cfg.h = h;
            cfg.rho = 0.0;
            cfg.seed = 100 + s;
            sum += global_homophily(generate(cfg));
        }
        EXPECT_NEAR(sum / 3.0, h, 0.05) << "h=" << h;
    }
}

TEST(Generate, RhoOneSpreadsLocalHomophily) {
    GeneratorConfig cfg;
    cfg.n = 2000;
    cfg.m = 10;
    cfg.h = 0.5;
    cfg.rho = 1.0;
    cfg.seed = 42;
    const auto g = generate(cfg);
    std::vector<std::size_t> counts(4, 0);
    const auto edges = default_bin_edges();
    for (NodeId v = 0; v < g.node_count(); ++v) ++counts[bin_index(edges, local_homophily(g, v))];
    for (std::size_t c : counts) EXPECT_GE(c, g.node_count() / 20);
}

TEST(Generate, RejectsInvalidConfig) {
    GeneratorConfig cfg;
    cfg.h = 1.5;
    EXPECT_THROW(generate(cfg), ValidationError);
    cfg = GeneratorConfig{};
    cfg.class_probs = {0.7, 0.7};
    EXPECT_THROW(generate(cfg), ValidationError);
    cfg = GeneratorConfig{};
    cfg.m = 0;
    EXPECT_THROW(generate(cfg), ValidationError);
    cfg = GeneratorConfig{};
    cfg.n = 10;
    cfg.m = 11;
    EXPECT_THROW(generate(cfg), ValidationError);
}

TEST(GetNeighbors, UniformBranchHonoursSameSlots) {
    // 8 class-0 and 6 class-1 nodes on a ring.
    GrowthState state(2, 32);
    for (int i = 0; i < 14; ++i) state.add_node(i < 8 ? 0 : 1);
    for (NodeId v = 0; v < 14; ++v) state.connect(v, (v + 1) % 14, false);
    AttachmentParams params{1.0, build_row_stochastic_compatibility(0.5, 2), 5};

    bool saw_all_same = false;
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng rng(s);
        const auto draw = get_neighbors(state, 0, 4, params, rng);
        ASSERT_TRUE(draw.uniform_branch);
        ASSERT_EQ(draw.targets.size(), 4u);
        EXPECT_EQ(draw.fallbacks, 0u);
        std::size_t same = 0;
        for (NodeId v : draw.targets) same += state.label(v) == 0;
        EXPECT_EQ(same, draw.same_slots);
        EXPECT_EQ(draw.same_slots, split_slots(4, draw.h_prime).same);
        saw_all_same |= draw.same_slots == 4;
        std::vector<NodeId> sorted = draw.targets;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
        for (NodeId v = 0; v < state.node_count(); ++v) EXPECT_FALSE(state.masked(v));
    }
    EXPECT_TRUE(saw_all_same);
}

TEST(GetNeighbors, DriftPoolsAreUsedFirst) {
    GrowthState state(2, 32);
    for (int i = 0; i < 12; ++i) state.add_node(i < 6 ? 0 : 1);
    for (NodeId v = 0; v < 12; ++v) state.connect(v, (v + 1) % 12, false);
    // Node 2 (class 0) receives many heterophilous arrivals; node 9 (class 1)
    // receives many same-class arrivals.
    for (int i = 0; i < 7; ++i) {
        const NodeId a = state.add_node(1);
        state.connect(a, 2, true);
        const NodeId b = state.add_node(1);
        state.connect(b, 9, true);
    }
    ASSERT_LT(state.drift(2), -5);
    ASSERT_GT(state.drift(9), 5);
    AttachmentParams params{1.0, build_row_stochastic_compatibility(0.5, 2), 5};
    for (std::uint64_t s = 0; s < 100; ++s) {
        Rng rng(s);
        const auto draw = get_neighbors(state, 0, 2, params, rng);
        const auto has = [&](NodeId v) {
            return std::find(draw.targets.begin(), draw.targets.end(), v) != draw.targets.end();
        };
        if (draw.same_slots >= 1) { EXPECT_TRUE(has(2)); }
        if (draw.same_slots <= 1) { EXPECT_TRUE(has(9)); }
    }
}

TEST(GetNeighbors, ShortBucketFallsBack) {
    GrowthState state(2, 8);
    for (int i = 0; i < 4; ++i) state.add_node(i == 0 ? 0 : 1);
    state.connect(1, 0, false);
    state.connect(2, 0, false);
    state.connect(3, 1, false);
    // Perfect homophily toward class 0, which has a single node, with k=3.
    AttachmentParams params{0.0, build_row_stochastic_compatibility(1.0, 2), 5};
    Rng rng(1);
    const auto draw = get_neighbors(state, 0, 3, params, rng);
    EXPECT_EQ(draw.targets.size(), 3u);
    EXPECT_EQ(draw.fallbacks, 1u);
}

TEST(Features, OneHotMeanAndUnitVariance) {
    Rng rng(7);
    const int draws = 100000;
    Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
    for (int i = 0; i < draws; ++i) {
        const auto x = sample_features(1, 1.0, 2, rng);
        for (int j = 0; j < 2; ++j) {
            sum[j] += x[static_cast<std::size_t>(j)];
            sq[j] += x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        }
    }
    const Eigen::Vector2d mean = sum / draws;
    EXPECT_NEAR(mean[0], 0.0, 0.02);
    EXPECT_NEAR(mean[1], 1.0, 0.02);
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(sq[j] / draws - mean[j] * mean[j], 1.0, 0.05);
}

TEST(Features, ZeroSignalIsLabelIndependent) {
    Rng rng(9);
    const int draws = 100000;
    Eigen::Vector2d m0 = Eigen::Vector2d::Zero(), m1 = Eigen::Vector2d::Zero();
    for (int i = 0; i < draws; ++i) {
        const auto a = sample_features(0, 0.0, 2, rng);
        const auto b = sample_features(1, 0.0, 2, rng);
        m0 += Eigen::Vector2d(a[0], a[1]);
        m1 += Eigen::Vector2d(b[0], b[1]);
    }
    EXPECT_LT(((m0 - m1) / draws).cwiseAbs().maxCoeff(), 0.03);
}

TEST(Features, LabelScaledMean) {
    Rng rng(3);
    double sum = 0.0;
    for (int i = 0; i < 50000; ++i) sum += sample_features(2, 0.5, 3, rng, FeatureMean::LabelScaled)[0];
    EXPECT_NEAR(sum / 50000, 1.0, 0.03);
}
