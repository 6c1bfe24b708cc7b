#include "support.hpp"

#include <homolab/io.hpp>
#include <homolab/manifest.hpp>

#include <gtest/gtest.h>

#include <filesystem>

using namespace homolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("homolab_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(GraphJson, RoundTripIsByteStable) {
    GeneratorConfig cfg;
    cfg.n = 200;
    cfg.m = 3;
    cfg.seed = 4;
    const Graph g = generate(cfg);
    const std::string text = serialize_graph(g);
    const Graph back = graph_from_json(parse_json_text(text, "graph"));
    EXPECT_EQ(serialize_graph(back), text);
    EXPECT_EQ(back.edge_count(), g.edge_count());
    for (NodeId v = 0; v < g.node_count(); ++v) {
        const auto a = g.features(v);
        const auto b = back.features(v);
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST(GraphJson, KeyOrderAndEdgeCanonicalization) {
    const Json j = Json::parse(R"({"n":6,"c":2,"labels":[0,1,0,1,0,1],
        "features":[[0,1],[1,0],[0,1],[1,0],[0,1],[1,0]],"edges":[[5,3],[0,1]]})");
    const Graph g = graph_from_json(j);
    EXPECT_EQ(g.edges()[1], (Edge{3, 5}));
    const std::string out = serialize_graph(g);
    EXPECT_EQ(out.rfind("{\"n\":6,\"c\":2,\"labels\":", 0), 0u);
    EXPECT_NE(out.find("\"edges\":[[0,1],[3,5]]"), std::string::npos);
}

TEST(GraphJson, ValidationErrors) {
    const auto bad = [](const char* text) {
        return [text] { graph_from_json(Json::parse(text)); };
    };
    EXPECT_THROW(bad(R"({"n":2,"c":2,"labels":[0,2],"features":[[0],[0]],"edges":[]})")(), ValidationError);
    EXPECT_THROW(bad(R"({"n":2,"c":2,"labels":[0,1],"features":[[0],[0]],"edges":[[0,2]]})")(), ValidationError);
    EXPECT_THROW(bad(R"({"n":2,"c":2,"labels":[0,1],"features":[[0],[0]],"edges":[[0,1],[1,0]]})")(), ValidationError);
    EXPECT_THROW(bad(R"({"n":2,"c":2,"labels":[0],"features":[[0],[0]],"edges":[]})")(), ValidationError);
    EXPECT_THROW(bad(R"({"n":2,"c":2,"labels":[0,1],"features":[[0],[0]]})")(), ValidationError);
    EXPECT_THROW(bad(R"({"n":2,"c":2,"labels":[0,1],"features":[[0],[0]],"edges":[],"x":1})")(), ValidationError);
    EXPECT_THROW(parse_json_text("{not json", "input"), ValidationError);
}

TEST(Files, MissingFileIsIoError) {
    EXPECT_THROW(read_graph("/nonexistent/graph.json"), IoError);
}

TEST(Csv, CoefficientGridIsDeterministicAndFlagsDegeneratePoints) {
    const std::vector<double> d{5, 1};
    const auto rows = coefficient_grid(d, 0.1);
    const std::string a = coefficient_grid_csv(rows);
    EXPECT_EQ(a, coefficient_grid_csv(coefficient_grid(d, 0.1)));
    EXPECT_EQ(a.rfind("d,h,b1,bprime1,diff,degenerate\n", 0), 0u);
    // Sorted by d, so the d=1 rows come first.
    EXPECT_EQ(a.find("\n1,0,"), a.find('\n'));
    EXPECT_NE(a.find("\n5,0.4,,"), std::string::npos);
}

TEST(Csv, EmptyTableIsHeaderOnly) {
    EXPECT_EQ(to_csv({"a", "b"}, {}), "a,b\n");
    EXPECT_EQ(sweep_csv({}), "h,rho,kind,bin_lo,bin_hi,f1_mean,f1_std,n_nodes,flagged\n");
    EXPECT_EQ(csv_field("x,y"), "\"x,y\"");
}

TEST(Config, DefaultsOverridesAndWarnings) {
    std::vector<std::string> warnings;
    const auto cfg = generator_config_from_json(Json::parse(R"({"n":100,"m":3,"h":0.2})"),
                                                GeneratorConfig{}, &warnings);
    EXPECT_EQ(cfg.n, 100u);
    EXPECT_EQ(cfg.m, 3u);
    EXPECT_DOUBLE_EQ(cfg.h, 0.2);
    EXPECT_DOUBLE_EQ(cfg.epsilon, 0.5);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("rho"), std::string::npos);

    const auto three = generator_config_from_json(Json::parse(R"({"classes":3,"rho":0.1})"), {});
    EXPECT_EQ(three.class_count(), 3u);
    const auto lit = generator_config_from_json(Json::parse(R"({"literal_compat":true,"rho":0})"), {});
    EXPECT_EQ(lit.compatibility, CompatibilityConvention::Literal);
}

TEST(Config, Errors) {
    EXPECT_THROW(generator_config_from_json(Json::parse(R"({"hh":0.2})"), {}), ValidationError);
    EXPECT_THROW(generator_config_from_json(Json::parse(R"({"h":1.5})"), {}), ValidationError);
    EXPECT_THROW(generator_config_from_json(Json::parse(R"({"h":"high"})"), {}), ValidationError);
    EXPECT_THROW(generator_config_from_json(Json::parse(R"({"n":-3})"), {}), ValidationError);
    EXPECT_THROW(generator_config_from_json(Json::parse(R"({"class_probs":[0.5,0.6]})"), {}), ValidationError);
    try {
        generator_config_from_json(Json::parse(R"({"h":1.5})"), {});
    } catch (const ValidationError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("h:", 0), 0u);
    }
}

TEST(Config, SweepSpec) {
    const Json j = Json::parse(R"({"base":{"rho":0.5},"configs":[{"h":0.1},{"h":0.9,"seed":7}],
                                   "kinds":["homophilous","baseline"],"seeds":4})");
    const auto spec = sweep_spec_from_json(j);
    ASSERT_EQ(spec.configs.size(), 2u);
    EXPECT_EQ(spec.configs[0].n, 2000u);
    EXPECT_EQ(spec.configs[0].m, 10u);
    EXPECT_EQ(spec.configs[1].seed, 7u);
    EXPECT_EQ(spec.kinds.size(), 2u);
    EXPECT_EQ(spec.seeds, 4u);
    EXPECT_EQ(sweep_spec_from_json(j, true).configs[0].n, 5000u);
    EXPECT_THROW(sweep_spec_from_json(Json::parse(R"({"configs":[]})")), ValidationError);
    EXPECT_THROW(sweep_spec_from_json(Json::parse(R"({"configs":[{}],"kinds":["gcn"]})")), ValidationError);
}

TEST(Config, BinEdges) {
    EXPECT_EQ(parse_bin_edges("0,0.5,1"), (std::vector<double>{0, 0.5, 1}));
    EXPECT_THROW(parse_bin_edges("0,x,1"), ValidationError);
    EXPECT_THROW(parse_bin_edges("0,0.5"), ValidationError);
}

TEST(Manifest, RecordsDigestsAndDetectsTampering) {
    const auto dir = scratch_dir("manifest");
    RunManifest m;
    m.command = "homolab test";
    m.config = Json{{"k", 1}};
    m.seeds = {3};
    write_with_manifest(dir / "out.csv", "a,b\n1,2\n", m);
    const auto mpath = manifest_path_for(dir / "out.csv");
    ASSERT_TRUE(fs::exists(mpath));
    EXPECT_TRUE(verify_manifest(mpath));
    const Json j = parse_json_text(read_text_file(mpath), "manifest");
    EXPECT_EQ(j["outputs"][0]["sha256"], sha256_hex("a,b\n1,2\n"));
    EXPECT_EQ(j["seeds"][0], 3);
    EXPECT_EQ(j["version"], kVersion);
    write_text_file_atomic(dir / "out.csv", "tampered\n");
    EXPECT_FALSE(verify_manifest(mpath));
    EXPECT_FALSE(fs::exists(dir / "out.csv.tmp"));
}

TEST(Manifest, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
