#pragma once

#include <homolab/errors.hpp>
#include <homolab/evaluation.hpp>
#include <homolab/generator.hpp>
#include <homolab/graph.hpp>
#include <homolab/linear_models.hpp>
#include <homolab/sweep.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace homolab {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Files

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
    return buf.str();
}

/// Writes via a temporary sibling file and a rename, so readers never see a
/// partially written file.
inline void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path.string() + "'");
    }
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed JSON in " + what + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Graph interchange
//
// {"n": int, "c": int, "labels": [int], "features": [[float]], "edges": [[int,int]]}
// Edges carry the smaller index first and are sorted, which makes the
// serialization canonical.

inline Json graph_to_json(const Graph& g) {
    Json j;
    j["n"] = g.node_count();
    j["c"] = g.class_count();
    j["labels"] = Json::array();
    for (ClassId y : g.labels()) j["labels"].push_back(y);
    j["features"] = Json::array();
    for (NodeId v = 0; v < g.node_count(); ++v) {
        Json row = Json::array();
        for (double x : g.features(v)) row.push_back(x);
        j["features"].push_back(std::move(row));
    }
    j["edges"] = Json::array();
    for (const auto& e : g.edges()) j["edges"].push_back(Json::array({e.u, e.v}));
    return j;
}

inline std::string serialize_graph(const Graph& g) { return graph_to_json(g).dump() + "\n"; }

namespace detail {

inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> known,
                                const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        const bool ok = std::any_of(known.begin(), known.end(),
                                    [&](const char* k) { return item.key() == k; });
        if (!ok) throw ValidationError(where + ": unknown key '" + item.key() + "'");
    }
}

inline std::uint64_t json_index(const Json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ValidationError(field + ": expected a non-negative integer");
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ValidationError(field + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

inline const Json& json_field(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
    return j.at(key);
}

} // namespace detail

inline Graph graph_from_json(const Json& j) {
    detail::reject_unknown_keys(j, {"n", "c", "labels", "features", "edges"}, "graph");
    const auto n = detail::json_index(detail::json_field(j, "n", "graph"), "n");
    const auto c = detail::json_index(detail::json_field(j, "c", "graph"), "c");

    const Json& jl = detail::json_field(j, "labels", "graph");
    if (!jl.is_array()) throw ValidationError("labels: expected an array");
    std::vector<ClassId> labels;
    labels.reserve(jl.size());
    for (const auto& x : jl) {
        const auto y = detail::json_index(x, "labels");
        if (y >= c) {
            throw ValidationError("labels: label " + std::to_string(y) + " is >= c = " +
                                  std::to_string(c));
        }
        labels.push_back(static_cast<ClassId>(y));
    }

    const Json& jf = detail::json_field(j, "features", "graph");
    if (!jf.is_array()) throw ValidationError("features: expected an array of arrays");
    std::vector<std::vector<double>> rows;
    rows.reserve(jf.size());
    for (const auto& row : jf) {
        if (!row.is_array()) throw ValidationError("features: expected an array of arrays");
        std::vector<double> r;
        r.reserve(row.size());
        for (const auto& x : row) {
            if (!x.is_number()) throw ValidationError("features: expected numbers");
            r.push_back(x.get<double>());
        }
        rows.push_back(std::move(r));
    }

    const Json& je = detail::json_field(j, "edges", "graph");
    if (!je.is_array()) throw ValidationError("edges: expected an array of pairs");
    std::vector<Edge> edges;
    edges.reserve(je.size());
    for (const auto& pair : je) {
        if (!pair.is_array() || pair.size() != 2) {
            throw ValidationError("edges: every edge must be a pair [u, v]");
        }
        const auto a = detail::json_index(pair[0], "edges");
        const auto b = detail::json_index(pair[1], "edges");
        if (a >= n || b >= n) {
            throw ValidationError("edges: endpoint of [" + std::to_string(a) + "," +
                                  std::to_string(b) + "] is >= n = " + std::to_string(n));
        }
        edges.push_back(make_edge(static_cast<NodeId>(a), static_cast<NodeId>(b)));
    }
    if (labels.size() != n) {
        throw ValidationError("labels: length " + std::to_string(labels.size()) + " != n = " +
                              std::to_string(n));
    }
    return Graph::from_rows(n, c, std::move(labels), rows, std::move(edges));
}

inline Graph read_graph(const std::filesystem::path& path) {
    return graph_from_json(parse_json_text(read_text_file(path), "'" + path.string() + "'"));
}

inline void write_graph(const std::filesystem::path& path, const Graph& g) {
    write_text_file_atomic(path, serialize_graph(g));
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest-form number with 12 significant digits and '.' as decimal separator.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

/// Header plus rows joined with ',' and '\n'.
inline std::string to_csv(const std::vector<std::string>& header,
                          const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto line = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += csv_field(fields[i]);
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

/// Columns d,h,b1,bprime1,diff,degenerate. Degenerate rows leave b1 and diff empty.
inline std::string coefficient_grid_csv(std::vector<CoefficientRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const CoefficientRow& a, const CoefficientRow& b) {
        return std::tie(a.d, a.h) < std::tie(b.d, b.h);
    });
    std::vector<std::vector<std::string>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back({format_number(r.d), format_number(r.h),
                       r.degenerate ? "" : format_number(r.b1), format_number(r.bprime1),
                       r.degenerate ? "" : format_number(r.diff), r.degenerate ? "1" : "0"});
    }
    return to_csv({"d", "h", "b1", "bprime1", "diff", "degenerate"}, out);
}

/// Columns h,rho,kind,bin_lo,bin_hi,f1_mean,f1_std,n_nodes,flagged; sorted by
/// (h, rho, kind, bin_lo). Flagged bins leave the F1 columns empty.
inline std::string sweep_csv(const std::vector<SweepResult>& results) {
    struct Row {
        double h, rho;
        std::string kind;
        BinStats bin;
    };
    std::vector<Row> rows;
    for (const auto& r : results) {
        for (const auto& b : r.report.bins) rows.push_back({r.config.h, r.config.rho, to_string(r.kind), b});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.h, a.rho, a.kind, a.bin.lo) < std::tie(b.h, b.rho, b.kind, b.bin.lo);
    });
    std::vector<std::vector<std::string>> out;
    for (const auto& r : rows) {
        out.push_back({format_number(r.h), format_number(r.rho), r.kind, format_number(r.bin.lo),
                       format_number(r.bin.hi),
                       r.bin.flagged ? "" : format_number(r.bin.f1_mean),
                       r.bin.flagged ? "" : format_number(r.bin.f1_std),
                       std::to_string(r.bin.count), r.bin.flagged ? "1" : "0"});
    }
    return to_csv({"h", "rho", "kind", "bin_lo", "bin_hi", "f1_mean", "f1_std", "n_nodes", "flagged"},
                  out);
}

// ---------------------------------------------------------------------------
// JSON views of results

inline Json to_json(const BinnedReport& r) {
    Json j;
    j["model"] = r.tag;
    j["bin_edges"] = r.edges;
    j["bins"] = Json::array();
    for (const auto& b : r.bins) {
        Json jb;
        jb["lo"] = b.lo;
        jb["hi"] = b.hi;
        jb["count"] = b.count;
        jb["flagged"] = b.flagged;
        jb["runs"] = b.runs;
        if (b.flagged) {
            jb["f1_mean"] = nullptr;
            jb["f1_std"] = nullptr;
        } else {
            jb["f1_mean"] = b.f1_mean;
            jb["f1_std"] = b.f1_std;
        }
        j["bins"].push_back(std::move(jb));
    }
    return j;
}

inline Json to_json(const TheoremCheck& c) {
    Json j;
    j["kind"] = to_string(c.kind);
    j["h"] = c.setup.h;
    j["d"] = c.setup.d;
    j["p"] = c.setup.p;
    j["alpha"] = c.alpha;
    j["coefficient"] = c.coefficient;
    j["predicted_delta"] = {c.predicted_delta[0], c.predicted_delta[1]};
    j["observed_delta"] = {c.observed_delta[0], c.observed_delta[1]};
    j["residual"] = c.residual;
    j["class_at_zero"] = c.class_at_zero;
    j["class_at_alpha"] = c.class_at_alpha;
    return j;
}

inline Json to_json(const SettingsReport& s) {
    Json j;
    j["regime"] = to_string(s.regime);
    j["b1"] = s.b1;
    j["direction"] = to_string(s.degrades);
    j["flip_alpha"] = s.flip_alpha;
    j["flip_reachable"] = s.flip_reachable;
    return j;
}

// ---------------------------------------------------------------------------
// Generator configuration

inline Json to_json(const GeneratorConfig& c) {
    Json j;
    j["n"] = c.n;
    j["m"] = c.m;
    j["h"] = c.h;
    j["rho"] = c.rho;
    j["epsilon"] = c.epsilon;
    j["delta"] = c.delta;
    j["classes"] = c.class_count();
    j["class_probs"] = c.class_probs;
    j["seed"] = c.seed;
    j["literal_compat"] = c.compatibility == CompatibilityConvention::Literal;
    j["literal_feature_mean"] = c.feature_mean == FeatureMean::LabelScaled;
    return j;
}

/// Strict parse of a generator config object on top of `defaults`. Unknown keys
/// and out-of-range values are errors naming the field. A missing rho falls
/// back to the default and records a warning.
inline GeneratorConfig generator_config_from_json(const Json& j, GeneratorConfig defaults,
                                                  std::vector<std::string>* warnings = nullptr) {
    detail::reject_unknown_keys(j,
                                {"n", "m", "h", "rho", "epsilon", "delta", "classes",
                                 "class_probs", "seed", "literal_compat", "literal_feature_mean"},
                                "config");
    GeneratorConfig c = std::move(defaults);
    auto number = [&j](const char* key) {
        const Json& v = j.at(key);
        if (!v.is_number()) throw ValidationError(std::string(key) + ": expected a number");
        return v.get<double>();
    };
    auto flag = [&j](const char* key) {
        const Json& v = j.at(key);
        if (!v.is_boolean()) throw ValidationError(std::string(key) + ": expected true/false");
        return v.get<bool>();
    };
    if (j.contains("n")) c.n = detail::json_index(j["n"], "n");
    if (j.contains("m")) c.m = detail::json_index(j["m"], "m");
    if (j.contains("h")) c.h = number("h");
    if (j.contains("rho")) {
        c.rho = number("rho");
    } else if (warnings) {
        warnings->push_back("rho not given; using " + format_number(c.rho));
    }
    if (j.contains("epsilon")) c.epsilon = number("epsilon");
    if (j.contains("delta")) {
        if (!j["delta"].is_number_integer()) throw ValidationError("delta: expected an integer");
        c.delta = j["delta"].get<int>();
    }
    if (j.contains("seed")) c.seed = detail::json_index(j["seed"], "seed");
    if (j.contains("literal_compat")) {
        c.compatibility = flag("literal_compat") ? CompatibilityConvention::Literal
                                                 : CompatibilityConvention::RowStochastic;
    }
    if (j.contains("literal_feature_mean")) {
        c.feature_mean = flag("literal_feature_mean") ? FeatureMean::LabelScaled : FeatureMean::OneHot;
    }

    if (j.contains("class_probs")) {
        const Json& p = j["class_probs"];
        if (!p.is_array()) throw ValidationError("class_probs: expected an array of numbers");
        c.class_probs.clear();
        for (const auto& x : p) {
            if (!x.is_number()) throw ValidationError("class_probs: expected numbers");
            c.class_probs.push_back(x.get<double>());
        }
        if (j.contains("classes") && detail::json_index(j["classes"], "classes") != c.class_probs.size()) {
            throw ValidationError("classes: does not match the length of class_probs");
        }
    } else if (j.contains("classes")) {
        const auto k = detail::json_index(j["classes"], "classes");
        if (k < 2) throw ValidationError("classes: must be >= 2");
        c.class_probs.assign(k, 1.0 / static_cast<double>(k));
    }
    c.validate();
    return c;
}

/// Bin edges from a JSON array or a comma-separated string.
inline std::vector<double> parse_bin_edges(const std::string& text) {
    std::vector<double> edges;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            edges.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("bins: cannot parse '" + item + "' as a number");
        }
    }
    validate_bin_edges(edges);
    return edges;
}

/// Desk-scale defaults for sweeps; `paper_scale` switches to n=5000, m=20.
inline GeneratorConfig sweep_defaults(bool paper_scale) {
    GeneratorConfig c;
    c.n = paper_scale ? 5000 : 2000;
    c.m = paper_scale ? 20 : 10;
    c.rho = 0.5;
    c.epsilon = 0.5;
    c.delta = 5;
    return c;
}

/// Sweep description:
/// {"base": {...}, "configs": [{...}], "kinds": [...], "seeds": int,
///  "ratios": [a,b,c], "bins": [edges], "threads": int, "paper_scale": bool}
/// Each entry of "configs" is layered over "base", which is layered over the
/// desk-scale defaults.
inline SweepSpec sweep_spec_from_json(const Json& j,
                                      std::optional<bool> paper_scale_override = std::nullopt) {
    detail::reject_unknown_keys(
        j, {"base", "configs", "kinds", "seeds", "ratios", "bins", "threads", "paper_scale"},
        "sweep");
    bool paper_scale = false;
    if (j.contains("paper_scale")) {
        if (!j["paper_scale"].is_boolean()) throw ValidationError("paper_scale: expected true/false");
        paper_scale = j["paper_scale"].get<bool>();
    }
    if (paper_scale_override) paper_scale = *paper_scale_override;

    SweepSpec spec;
    Json base = j.contains("base") ? j["base"] : Json::object();
    if (!base.is_object()) throw ValidationError("base: expected an object");
    const Json& configs = detail::json_field(j, "configs", "sweep");
    if (!configs.is_array() || configs.empty()) {
        throw ValidationError("configs: expected a non-empty array");
    }
    for (const auto& entry : configs) {
        if (!entry.is_object()) throw ValidationError("configs: entries must be objects");
        Json merged = base;
        for (const auto& item : entry.items()) merged[item.key()] = item.value();
        spec.configs.push_back(generator_config_from_json(merged, sweep_defaults(paper_scale)));
    }
    if (j.contains("kinds")) {
        spec.kinds.clear();
        for (const auto& k : j["kinds"]) {
            if (!k.is_string()) throw ValidationError("kinds: expected strings");
            spec.kinds.push_back(parse_fit_kind(k.get<std::string>()));
        }
    }
    if (j.contains("seeds")) spec.seeds = detail::json_index(j["seeds"], "seeds");
    if (j.contains("threads")) spec.threads = detail::json_index(j["threads"], "threads");
    if (j.contains("ratios")) {
        const Json& r = j["ratios"];
        if (!r.is_array() || r.size() != 3) throw ValidationError("ratios: expected [train, val, test]");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!r[i].is_number()) throw ValidationError("ratios: expected numbers");
            spec.ratios[i] = r[i].get<double>();
        }
    }
    if (j.contains("bins")) {
        spec.bin_edges.clear();
        for (const auto& e : j["bins"]) {
            if (!e.is_number()) throw ValidationError("bins: expected numbers");
            spec.bin_edges.push_back(e.get<double>());
        }
        validate_bin_edges(spec.bin_edges);
    }
    return spec;
}

} // namespace homolab
