// homolab: generate graphs with controlled local homophily, measure them,
// check the closed-form linear GNN results, and run binned evaluations.
//
// Exit codes: 0 success, 2 validation error, 3 degenerate math, 4 I/O error.

#include <homolab.hpp>
#include <homolab/io.hpp>
#include <homolab/manifest.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using homolab::Json;

enum ExitCode { kOk = 0, kValidation = 2, kDegenerate = 3, kIo = 4 };

std::string g_command_line;

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

std::optional<std::uint64_t> env_seed() {
    const char* s = std::getenv("HOMOLAB_SEED");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != std::string(s).size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw homolab::ValidationError("HOMOLAB_SEED: expected a non-negative integer, got '" +
                                       std::string(s) + "'");
    }
}

Json load_json_file(const std::string& path) {
    return homolab::parse_json_text(homolab::read_text_file(path), "'" + path + "'");
}

/// Prints to stdout, or writes `out` with a sidecar manifest when a path is given.
void emit(const std::string& content, const std::string& out, homolab::RunManifest manifest) {
    if (out.empty()) {
        std::cout << content;
        return;
    }
    homolab::write_with_manifest(out, content, std::move(manifest));
}

homolab::RunManifest manifest_for(Json config, std::vector<std::uint64_t> seeds) {
    homolab::RunManifest m;
    m.command = g_command_line;
    m.config = std::move(config);
    m.seeds = std::move(seeds);
    return m;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string config_path;
    std::string out;
    std::optional<std::size_t> n, m, classes;
    std::optional<double> h, rho, epsilon;
    std::optional<int> delta;
    std::optional<std::uint64_t> seed;
    std::vector<double> class_probs;
    bool literal_compat{false};
    bool literal_feature_mean{false};
};

void add_generate(CLI::App& app, GenerateArgs& a) {
    auto* cmd = app.add_subcommand("generate", "Grow a graph with controlled local homophily");
    cmd->add_option("--config", a.config_path, "JSON config file; flags override its values");
    cmd->add_option("--n", a.n, "Total nodes (default 5000)");
    cmd->add_option("--m", a.m, "Edges per arriving node (default 20)");
    cmd->add_option("--h", a.h, "Target global homophily, diagonal of the compatibility matrix (default 0.5)");
    cmd->add_option("--rho", a.rho, "Probability an arrival draws its local homophily from U(0,1) (default 0)");
    cmd->add_option("--epsilon", a.epsilon, "Feature signal strength in [0,1] (default 0.5)");
    cmd->add_option("--delta", a.delta, "Drift threshold (default 5)");
    cmd->add_option("--classes", a.classes, "Number of classes, uniform prior (default 2)");
    cmd->add_option("--class-probs", a.class_probs, "Class prior, comma separated")->delimiter(',');
    cmd->add_option("--seed", a.seed, "RNG seed (falls back to $HOMOLAB_SEED, then 0)");
    cmd->add_flag("--literal-compat", a.literal_compat,
                  "Use off-diagonal compatibility (1-h)/c instead of (1-h)/(c-1)");
    cmd->add_flag("--literal-feature-mean", a.literal_feature_mean,
                  "Every feature entry has mean epsilon*label instead of epsilon*onehot(label)");
    cmd->add_option("--out", a.out, "Output graph JSON")->required();
    cmd->callback([&a] {
        Json file = a.config_path.empty() ? Json::object() : load_json_file(a.config_path);
        if (!file.is_object()) throw homolab::ValidationError("config: expected a JSON object");
        if (a.n) file["n"] = *a.n;
        if (a.m) file["m"] = *a.m;
        if (a.h) file["h"] = *a.h;
        if (a.rho) file["rho"] = *a.rho;
        if (a.epsilon) file["epsilon"] = *a.epsilon;
        if (a.delta) file["delta"] = *a.delta;
        if (a.classes) file["classes"] = *a.classes;
        if (!a.class_probs.empty()) file["class_probs"] = a.class_probs;
        if (a.seed) {
            file["seed"] = *a.seed;
        } else if (!file.contains("seed")) {
            if (const auto s = env_seed()) file["seed"] = *s;
        }
        if (a.literal_compat) file["literal_compat"] = true;
        if (a.literal_feature_mean) file["literal_feature_mean"] = true;

        std::vector<std::string> warnings;
        const auto cfg = homolab::generator_config_from_json(file, homolab::GeneratorConfig{}, &warnings);
        for (const auto& w : warnings) warn(w);

        const auto trace = homolab::generate_with_trace(cfg);
        if (trace.fallbacks > 0) {
            warn(std::to_string(trace.fallbacks) +
                 " attachment(s) filled from another class bucket because one ran dry");
        }
        homolab::write_with_manifest(a.out, homolab::serialize_graph(trace.graph),
                                     manifest_for(homolab::to_json(cfg), {cfg.seed}));
        std::cerr << "wrote " << a.out << ": " << trace.graph.node_count() << " nodes, "
                  << trace.graph.edge_count() << " edges, global homophily "
                  << homolab::format_number(homolab::global_homophily(trace.graph)) << "\n";
    });
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
    std::string graph;
    std::string out;
    std::string bins{"0,0.25,0.5,0.75,1"};
};

void add_metrics(CLI::App& app, MetricsArgs& a) {
    auto* cmd = app.add_subcommand("metrics", "Global/local homophily and the compatibility matrix");
    cmd->add_option("--graph", a.graph, "Graph JSON")->required();
    cmd->add_option("--bins", a.bins, "Local homophily bin edges")->capture_default_str();
    cmd->add_option("--out", a.out, "Write JSON here instead of stdout");
    cmd->callback([&a] {
        const auto g = homolab::read_graph(a.graph);
        const auto edges = homolab::parse_bin_edges(a.bins);
        const auto summary = homolab::summarize_homophily(g);

        Json j;
        j["n"] = g.node_count();
        j["edges"] = g.edge_count();
        j["global_homophily"] = summary.global_ratio;
        Json rows = Json::array();
        for (Eigen::Index r = 0; r < summary.compatibility.values.rows(); ++r) {
            Json row = Json::array();
            for (Eigen::Index c = 0; c < summary.compatibility.values.cols(); ++c) {
                row.push_back(summary.compatibility.values(r, c));
            }
            rows.push_back(std::move(row));
        }
        j["compatibility"] = std::move(rows);
        Json populated = Json::array();
        for (bool p : summary.compatibility.populated) populated.push_back(p);
        j["compatibility_populated"] = std::move(populated);

        std::vector<std::size_t> counts(edges.size() - 1, 0);
        Json local = Json::array();
        for (const auto& h : summary.per_node_ratio) {
            if (h) {
                local.push_back(*h);
                ++counts[homolab::bin_index(edges, *h)];
            } else {
                local.push_back(nullptr);
            }
        }
        j["bin_edges"] = edges;
        j["bin_counts"] = counts;
        j["local_homophily"] = std::move(local);
        emit(j.dump(2) + "\n", a.out, manifest_for(Json{{"graph", a.graph}, {"bins", edges}}, {}));
    });
}

// ---------------------------------------------------------------------------

struct TheoremArgs {
    std::string kind{"homophilous"};
    double h{0.9};
    double d{4};
    double p{0.3};
    double alpha{-0.4};
    std::string out;
};

void add_theorem(CLI::App& app, TheoremArgs& a) {
    auto* cmd = app.add_subcommand("theorem", "Check the closed-form logit change of a linear GNN");
    cmd->add_option("--kind", a.kind, "homophilous | homophilous2 | concat")->capture_default_str();
    cmd->add_option("--h", a.h, "Global homophily of the training pattern")->capture_default_str();
    cmd->add_option("--d", a.d, "Node degree (integer >= 1)")->capture_default_str();
    cmd->add_option("--p", a.p, "Feature agreement in (0, 0.5]")->capture_default_str();
    cmd->add_option("--alpha", a.alpha, "Local homophily shift of the test node")->capture_default_str();
    cmd->add_option("--out", a.out, "Write JSON here instead of stdout");
    cmd->callback([&a] {
        const auto kind = homolab::parse_model_kind(a.kind);
        const homolab::TheorySetup setup{a.h, a.d, a.p};
        const auto check = homolab::verify_theorem(kind, setup, a.alpha);
        Json j = homolab::to_json(check);
        if (kind != homolab::ModelKind::HeterophilousConcat) {
            j["settings"] = homolab::to_json(homolab::settings_report(setup));
        }
        emit(j.dump(2) + "\n", a.out,
             manifest_for(Json{{"kind", a.kind}, {"h", a.h}, {"d", a.d}, {"p", a.p}, {"alpha", a.alpha}}, {}));
    });
}

// ---------------------------------------------------------------------------

struct GridArgs {
    std::vector<double> degrees{homolab::default_grid_degrees()};
    double h_step{0.001};
    std::string out;
};

void add_coeff_grid(CLI::App& app, GridArgs& a) {
    auto* cmd = app.add_subcommand("coeff-grid", "Tabulate |b1'| - |b1| over degree and homophily");
    cmd->add_option("--d", a.degrees, "Degrees, comma separated")->capture_default_str()->delimiter(',');
    cmd->add_option("--h-step", a.h_step, "Homophily grid step")->capture_default_str();
    cmd->add_option("--out", a.out, "Output CSV")->required();
    cmd->callback([&a] {
        const auto rows = homolab::coefficient_grid(a.degrees, a.h_step);
        homolab::write_with_manifest(a.out, homolab::coefficient_grid_csv(rows),
                                     manifest_for(Json{{"d", a.degrees}, {"h_step", a.h_step}}, {}));
    });
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string graph;
    std::string kind{"homophilous"};
    std::optional<std::uint64_t> seed;
    std::string bins{"0,0.25,0.5,0.75,1"};
    std::vector<double> ratios{0.5, 0.25, 0.25};
    std::string out;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
    auto* cmd = app.add_subcommand("evaluate", "Fit a linear model and report F1 per local homophily bin");
    cmd->add_option("--graph", a.graph, "Graph JSON")->required();
    cmd->add_option("--kind", a.kind, "homophilous | concat | baseline")->capture_default_str();
    cmd->add_option("--seed", a.seed, "Split seed (falls back to $HOMOLAB_SEED, then 0)");
    cmd->add_option("--bins", a.bins, "Local homophily bin edges")->capture_default_str();
    cmd->add_option("--ratios", a.ratios, "Train,val,test ratios")->capture_default_str()->delimiter(',')->expected(3);
    cmd->add_option("--out", a.out, "Write JSON here instead of stdout");
    cmd->callback([&a] {
        const auto kind = homolab::parse_fit_kind(a.kind);
        const auto g = homolab::read_graph(a.graph);
        const auto edges = homolab::parse_bin_edges(a.bins);
        const std::uint64_t seed = a.seed ? *a.seed : env_seed().value_or(0);
        const auto split = homolab::split_nodes(g, {a.ratios[0], a.ratios[1], a.ratios[2]}, seed);

        const auto W = homolab::fit_rows(homolab::design_matrix(g, kind), g, split.train);
        const auto report = homolab::evaluate_binned(g, split, W, kind, edges);
        Json j = homolab::to_json(report);
        if (kind != homolab::FitKind::Baseline) {
            const auto Wb = homolab::fit_baseline(g, split.train);
            const auto base = homolab::evaluate_binned(g, split, Wb, homolab::FitKind::Baseline, edges);
            j["delta_f1_vs_baseline"] = homolab::to_json(homolab::delta_f1(report, base));
        }
        emit(j.dump(2) + "\n", a.out,
             manifest_for(Json{{"graph", a.graph}, {"kind", a.kind}, {"bins", edges}, {"ratios", a.ratios}},
                          {seed}));
    });
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::string out;
    bool paper_scale{false};
    std::optional<std::size_t> seeds;
    std::optional<std::size_t> threads;
};

void add_sweep(CLI::App& app, SweepArgs& a) {
    auto* cmd = app.add_subcommand("sweep", "Multi-seed binned F1 over generated graphs");
    cmd->add_option("--config", a.config, "Sweep JSON")->required();
    cmd->add_option("--out", a.out, "Output CSV")->required();
    cmd->add_flag("--paper-scale", a.paper_scale, "Default to n=5000, m=20 instead of n=2000, m=10");
    cmd->add_option("--seeds", a.seeds, "Seeds per config (overrides the file)");
    cmd->add_option("--threads", a.threads, "Worker threads (0 = hardware concurrency)");
    cmd->callback([&a] {
        Json j = load_json_file(a.config);
        if (!j.is_object()) throw homolab::ValidationError("sweep: expected a JSON object");
        const bool base_has_seed = j.contains("base") && j["base"].is_object() && j["base"].contains("seed");
        if (!base_has_seed) {
            if (const auto s = env_seed()) {
                if (!j.contains("base")) j["base"] = Json::object();
                j["base"]["seed"] = *s;
            }
        }
        auto spec = homolab::sweep_spec_from_json(
            j, a.paper_scale ? std::optional<bool>(true) : std::nullopt);
        if (a.seeds) spec.seeds = *a.seeds;
        if (a.threads) spec.threads = *a.threads;

        const auto results = homolab::run_sweep(spec);

        Json resolved;
        resolved["configs"] = Json::array();
        std::vector<std::uint64_t> seeds;
        for (const auto& c : spec.configs) {
            resolved["configs"].push_back(homolab::to_json(c));
            for (std::size_t s = 0; s < spec.seeds; ++s) seeds.push_back(homolab::run_seed(c, s));
        }
        resolved["kinds"] = Json::array();
        for (auto k : spec.kinds) resolved["kinds"].push_back(homolab::to_string(k));
        resolved["seeds"] = spec.seeds;
        resolved["ratios"] = spec.ratios;
        resolved["bins"] = spec.bin_edges;
        homolab::write_with_manifest(a.out, homolab::sweep_csv(results), manifest_for(resolved, seeds));
    });
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        if (i) g_command_line += ' ';
        g_command_line += i == 0 ? std::string("homolab") : std::string(argv[i]);
    }

    CLI::App app{"homolab: local homophily graph generator and linear GNN analysis"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", homolab::kVersion);

    GenerateArgs gen;
    MetricsArgs met;
    TheoremArgs thm;
    GridArgs grid;
    EvaluateArgs ev;
    SweepArgs sw;
    add_generate(app, gen);
    add_metrics(app, met);
    add_theorem(app, thm);
    add_coeff_grid(app, grid);
    add_evaluate(app, ev);
    add_sweep(app, sw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    } catch (const homolab::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const homolab::DegenerateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDegenerate;
    } catch (const homolab::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    }
    return kOk;
}
