#pragma once

#include <homolab/evaluation.hpp>
#include <homolab/generator.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace homolab {

struct SweepSpec {
    std::vector<GeneratorConfig> configs;
    std::vector<FitKind> kinds{FitKind::Homophilous, FitKind::Concat, FitKind::Baseline};
    std::size_t seeds{10};
    std::array<double, 3> ratios{0.5, 0.25, 0.25};
    std::vector<double> bin_edges{default_bin_edges()};
    /// 0 picks std::thread::hardware_concurrency().
    std::size_t threads{0};
};

struct SweepResult {
    GeneratorConfig config;
    FitKind kind{};
    BinnedReport report;                 // aggregated across seeds
    std::vector<BinnedReport> per_seed;  // in seed order
};

/// Seed offset applied to a config's base seed for run `s`.
inline std::uint64_t run_seed(const GeneratorConfig& cfg, std::size_t s) {
    return cfg.seed + static_cast<std::uint64_t>(s);
}

/// Generates one graph, splits it, then fits and scores every kind.
inline std::vector<BinnedReport> run_single(const GeneratorConfig& cfg, const SweepSpec& spec,
                                            std::size_t s) {
    GeneratorConfig run_cfg = cfg;
    run_cfg.seed = run_seed(cfg, s);
    const Graph g = generate(run_cfg);
    const Split split = split_nodes(g, spec.ratios, run_cfg.seed ^ 0x5eed5eed5eed5eedULL);
    std::vector<BinnedReport> out;
    out.reserve(spec.kinds.size());
    for (FitKind kind : spec.kinds) {
        const Eigen::MatrixXd W = fit_rows(design_matrix(g, kind), g, split.train);
        out.push_back(bin_scores(g, split.test, predict(g, W, kind), spec.bin_edges,
                                 to_string(kind)));
    }
    return out;
}

/// Every config x seed run, parallel over runs; results ordered config-major,
/// then by the order of spec.kinds.
inline std::vector<SweepResult> run_sweep(const SweepSpec& spec) {
    detail::require(spec.seeds >= 1, "seeds: must be >= 1");
    detail::require(!spec.kinds.empty(), "kinds: need at least one model kind");
    validate_bin_edges(spec.bin_edges);
    for (const auto& cfg : spec.configs) cfg.validate();

    const std::size_t runs = spec.configs.size() * spec.seeds;
    std::vector<std::vector<BinnedReport>> results(runs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < runs; i = next++) {
            try {
                results[i] = run_single(spec.configs[i / spec.seeds], spec, i % spec.seeds);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::size_t threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(runs, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<SweepResult> out;
    for (std::size_t ci = 0; ci < spec.configs.size(); ++ci) {
        for (std::size_t ki = 0; ki < spec.kinds.size(); ++ki) {
            SweepResult r{spec.configs[ci], spec.kinds[ki], {}, {}};
            for (std::size_t s = 0; s < spec.seeds; ++s) {
                r.per_seed.push_back(results[ci * spec.seeds + s][ki]);
            }
            r.report = aggregate_reports(r.per_seed);
            out.push_back(std::move(r));
        }
    }
    return out;
}

} // namespace homolab
