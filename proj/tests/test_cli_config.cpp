#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "choquard/config.hpp"
#include "choquard/errors.hpp"
#include "choquard/svg.hpp"

using namespace choquard;

namespace {

ExperimentConfig sample_config() {
    ExperimentConfig c;
    c.kind = "bubble-scan";
    c.dim = 4;
    c.mu = 2.0;
    c.lambda = -7.25;
    c.lambda_grid = {0.0, 1.0 / 3.0, 2.5};
    c.shape = "box";
    c.n = 26;
    c.half_width = 0.5;
    c.radius = 0.45;
    c.delta = 0.12;
    c.eps_grid = {0.02, 0.031, 1e-17};
    c.tol = 3e-7;
    c.max_iters = 155;
    c.starts = 12;
    c.linking_j = 2;
    c.epsilon = 0.031;
    c.method = "quotient";
    c.init = "bubble";
    c.width = 0.27;
    c.center = {0.1, -0.05, 0.0, 0.2};
    c.seed = 987654321012345ull;
    c.out_dir = "runs/scan_a";
    return c;
}

std::size_t count_substr(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::filesystem::path fresh_dir(const char* tag) {
    auto p = std::filesystem::temp_directory_path() / (std::string("chq_") + tag);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("config round trips through both formats") {
    const ExperimentConfig c = sample_config();
    CHECK(parse_config_text(print_config_text(c)) == c);
    CHECK(parse_config_json(print_config_json(c)) == c);
    CHECK(config_from_json(config_to_json(c)) == c);

    // defaults survive an empty document
    CHECK(parse_config_text("") == ExperimentConfig{});
    CHECK(parse_config_text("# only a comment\n\n") == ExperimentConfig{});
}

TEST_CASE("config parsing rejects malformed input") {
    CHECK_THROWS_AS(parse_config_text("unknown_key=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("dim=three\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("mu 1.0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("eps_grid=0.1,,0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("seed=-4\n"), ConfigError);

    CHECK_THROWS_AS(parse_config_json("{"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("[1,2]"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("{\"bogus\": 1}"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("{\"dim\": \"three\"}"), ConfigError);

    // comments and stray spacing are fine
    const ExperimentConfig c = parse_config_text("# run setup\n  dim = 5 \n\nmu=3.5\n");
    CHECK(c.dim == 5);
    CHECK(c.mu == 3.5);
}

TEST_CASE("config files load in either format") {
    const auto dir = fresh_dir("cfg");
    std::filesystem::create_directories(dir);
    const ExperimentConfig c = sample_config();

    const auto text_path = (dir / "a.cfg").string();
    const auto json_path = (dir / "a.json").string();
    std::ofstream(text_path) << print_config_text(c);
    std::ofstream(json_path) << print_config_json(c);

    CHECK(load_config(text_path) == c);
    CHECK(load_config(json_path) == c);
    CHECK_THROWS_AS(load_config((dir / "missing.cfg").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("config validation names the offending field") {
    ExperimentConfig good = sample_config();
    CHECK_NOTHROW(validate_config(good));

    const auto expect_bad = [](ExperimentConfig c, const char* key) {
        try {
            validate_config(c);
            FAIL("expected ConfigError for ", key);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(key) != std::string::npos);
        }
    };
    ExperimentConfig c = good;
    c.kind = "conquer";
    expect_bad(c, "kind");
    c = good; c.dim = 2;
    expect_bad(c, "dim");
    c = good; c.mu = 4.0;  // not below dim
    expect_bad(c, "mu");
    c = good; c.shape = "disc";
    expect_bad(c, "shape");
    c = good; c.n = 3;
    expect_bad(c, "n");
    c = good; c.half_width = 0.0;
    expect_bad(c, "half_width");
    c = good; c.shape = "ball"; c.radius = -1.0;
    expect_bad(c, "radius");
    c = good; c.eps_grid = {0.1, 0.0};
    expect_bad(c, "eps_grid");
    c = good; c.tol = 0.0;
    expect_bad(c, "tol");
    c = good; c.max_iters = 0;
    expect_bad(c, "max_iters");
    c = good; c.starts = 0;
    expect_bad(c, "starts");
    c = good; c.linking_j = 0;
    expect_bad(c, "linking_j");
    c = good; c.method = "newton";
    expect_bad(c, "method");
    c = good; c.init = "plane";
    expect_bad(c, "init");
    c = good; c.width = -0.2;
    expect_bad(c, "width");
    c = good; c.center = {0, 0, 0, 0, 0, 0};
    expect_bad(c, "center");
    c = good; c.out_dir = "";
    expect_bad(c, "out_dir");
}

TEST_CASE("fnv1a matches the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("artifact writer hashes every file into the manifest") {
    const auto dir = fresh_dir("art");
    ExperimentConfig cfg = sample_config();
    cfg.out_dir = dir.string();

    ArtifactWriter w(dir.string());
    w.write_text("scan.csv", "epsilon,deficit\n0.1,0.5\n");
    w.write_text("report.json", "{}\n");
    CHECK_THROWS_AS(w.write_text("sub/name.txt", "x"), ConfigError);

    const std::string man = w.manifest_text(cfg);
    const nlohmann::json j = nlohmann::json::parse(man);
    check_schema("manifest", j);
    CHECK(j["kind"] == "bubble-scan");
    CHECK(j["seed"] == cfg.seed);
    CHECK(config_from_json(j["config"]) == cfg);
    REQUIRE(j["files"].size() == 2);
    CHECK(j["files"][0]["name"] == "scan.csv");
    CHECK(j["files"][0]["bytes"] == 24);
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx",
                  (unsigned long long)fnv1a64("epsilon,deficit\n0.1,0.5\n"));
    CHECK(j["files"][0]["fnv1a"] == hex);

    // rewriting a name updates its entry instead of appending
    w.write_text("report.json", "{\"a\":1}\n");
    const nlohmann::json j2 = nlohmann::json::parse(w.manifest_text(cfg));
    REQUIRE(j2["files"].size() == 2);
    CHECK(j2["files"][1]["bytes"] == 8);

    w.write_manifest(cfg);
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(std::filesystem::exists(dir / "scan.csv"));

    // equal content gives a byte-identical manifest
    ArtifactWriter w2((dir / "again").string());
    w2.write_text("scan.csv", "epsilon,deficit\n0.1,0.5\n");
    w2.write_text("report.json", "{\"a\":1}\n");
    CHECK(w2.manifest_text(cfg) == w.manifest_text(cfg));
    std::filesystem::remove_all(dir);
}

TEST_CASE("output schemas pin their required keys") {
    CHECK(schema_required_keys("constants").size() == 9);
    CHECK_THROWS_AS(schema_required_keys("unheard-of"), NotFound);
    CHECK(schema_tag("solve") == "choquard.solve.v1");

    const nlohmann::json cj = constants_json(make_sharp_constants(3, 1.0));
    CHECK(cj.size() == 9);  // exactly the documented keys, nothing else
    CHECK_NOTHROW(check_schema("constants", cj));
    CHECK(cj["nonlocal_S_HL"].get<double>() == doctest::Approx(4.6397580731).epsilon(1e-9));
    nlohmann::json broken = cj;
    broken.erase("ps_threshold");
    CHECK_THROWS_AS(check_schema("constants", broken), ConfigError);

    EnergyBreakdown b;
    b.grad_sq = 2.0;
    b.l2_sq = 1.0;
    b.nonlocal_double = 0.5;
    b.functional_value = 0.25;
    b.quotient = 1.5;
    b.nl_norm = 0.9;
    nlohmann::json ej = breakdown_json(b, make_sharp_constants(4, 2.0), 0.75);
    CHECK_NOTHROW(check_schema("energy", ej));
    ej["schema"] = "choquard.energy.v2";
    CHECK_THROWS_AS(check_schema("energy", ej), ConfigError);

    SolveReport sr;
    sr.lambda = 1.25;
    sr.iterations = 3;
    sr.final_quotient = 4.5;
    sr.verdict = SolveVerdict::concentrating;
    sr.quotient_trace = {5.0, 4.7, 4.5};
    const nlohmann::json sj = solve_report_json(sr, 77);
    CHECK_NOTHROW(check_schema("solve", sj));
    CHECK(sj["verdict"] == "concentrating");
    CHECK(sj["quotient_trace"].size() == 3);
    CHECK(sj["seed"] == 77);

    ProbeReport pr;
    pr.n_concentrating = 2;
    pr.runs.resize(2);
    const nlohmann::json pj = probe_report_json(pr, -1.0, 2, 5);
    CHECK_NOTHROW(check_schema("probe", pj));
    CHECK(pj["runs"].size() == 2);
    CHECK(pj["multistarts"] == 2);

    LinkingReport lr;
    lr.m_value = 6.3;
    lr.coefficients = {0.8, 0.6};
    const nlohmann::json lj = linking_report_json(lr, 9);
    CHECK_NOTHROW(check_schema("linking", lj));
    CHECK(lj["coefficients"].size() == 2);
}

TEST_CASE("plots render as standalone svg documents") {
    PlotSeries s;
    s.x = {0, 1, 2, 3, 4};
    s.y = {6.0, 5.2, 4.9, 4.85, 4.84};
    s.title = "descent <of> Q & friends";
    const std::string svg = render_plot(s, PlotKind::trace);
    CHECK(svg.find("<?xml") == 0);
    CHECK(count_substr(svg, "<svg") == 1);
    CHECK(count_substr(svg, "</svg>") == 1);
    CHECK(count_substr(svg, "<polyline") == 1);
    CHECK(count_substr(svg, "<circle") == 5);
    CHECK(svg.find("iteration") != std::string::npos);
    CHECK(svg.find("quotient") != std::string::npos);
    CHECK(svg.find("descent &lt;of&gt; Q &amp; friends") != std::string::npos);

    // a rerun is byte identical
    CHECK(render_plot(s, PlotKind::trace) == svg);

    PlotSeries one;
    one.x = {2.0};
    one.y = {3.0};
    const std::string dot = render_plot(one, PlotKind::radial_profile);
    CHECK(count_substr(dot, "<circle") == 1);
    CHECK(count_substr(dot, "<polyline") == 0);
    CHECK(dot.find("radius") != std::string::npos);
    CHECK(dot.find("value") != std::string::npos);

    PlotSeries big;
    for (int i = 0; i < 1000; ++i) {
        big.x.push_back(i);
        big.y.push_back(1.0 / (1.0 + i));
    }
    const std::string crowded = render_plot(big, PlotKind::trace);
    CHECK(count_substr(crowded, "<circle") <= 201);
    CHECK(count_substr(crowded, "<polyline") == 1);
}

TEST_CASE("rate plot annotates the fitted slope") {
    PlotSeries s;
    s.x = {0.1, 0.2, 0.3, 0.4};
    for (double x : s.x) s.y.push_back(3.0 * x * x);
    const std::string svg = render_plot(s, PlotKind::rate_fit);
    CHECK(svg.find("slope 2.000") != std::string::npos);
    CHECK(svg.find("epsilon") != std::string::npos);
    CHECK(svg.find("deficit") != std::string::npos);

    PlotSeries bad = s;
    bad.y[1] = -1.0;
    CHECK_THROWS_AS(render_plot(bad, PlotKind::rate_fit), ConfigError);
}

TEST_CASE("plot input validation") {
    PlotSeries s;
    CHECK_THROWS_AS(render_plot(s, PlotKind::trace), ConfigError);
    s.x = {1, 2};
    s.y = {1};
    CHECK_THROWS_AS(render_plot(s, PlotKind::trace), ConfigError);
    s.y = {1, std::nan("")};
    CHECK_THROWS_AS(render_plot(s, PlotKind::trace), ConfigError);
}

TEST_CASE("plots write to disk") {
    const auto dir = fresh_dir("svg");
    std::filesystem::create_directories(dir);
    PlotSeries s;
    s.x = {1, 2, 3};
    s.y = {3, 2, 1};
    const auto path = (dir / "t.svg").string();
    emit_plot(s, PlotKind::trace, path);
    std::ifstream in(path);
    std::string head;
    std::getline(in, head);
    CHECK(head.find("<?xml") == 0);
    CHECK_THROWS_AS(emit_plot(s, PlotKind::trace, (dir / "no_dir" / "t.svg").string()),
                    IoError);
    std::filesystem::remove_all(dir);
}
