#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "codesift/report.hpp"
#include "test_util.hpp"

using namespace codesift;
using testutil::make_doc;

namespace {

// Independent whitespace token count: stream extraction.
std::size_t stream_tokens(const std::string& text) {
    std::istringstream in(text);
    std::string token;
    std::size_t count = 0;
    while (in >> token) ++count;
    return count;
}

PipelineManifest two_stage_manifest() {
    PipelineManifest manifest;
    manifest.seed = 42;
    manifest.stages.push_back({"preprocess", 100, 80, 800, 200, {{"Python", 80}}, {}});
    manifest.stages.push_back(
        {"exact-dedup", 80, 60, 600, 150, {{"Python", 60}}, {{"duplicate", 20}}});
    return manifest;
}

}  // namespace

// ---------------------------------------------------------------------------
// Token estimation
// ---------------------------------------------------------------------------

TEST_CASE("token estimators: whitespace counts tokens, bytes4 divides size by four") {
    CHECK(estimate_tokens(make_doc("a", "a bb  ccc\n")) == 3);
    CHECK(estimate_tokens(make_doc("a", "")) == 0);
    CHECK(estimate_tokens(make_doc("a", "abcdefgh"), TokenEstimator::bytes4) == 2);
    CHECK(estimate_tokens(make_doc("a", "abcdefghi"), TokenEstimator::bytes4) == 2);  // floor
    CHECK(estimate_tokens(make_doc("a", "xyz"), TokenEstimator::bytes4) == 0);
    CHECK(estimate_tokens(make_doc("a", ""), TokenEstimator::bytes4) == 0);

    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const std::string text = testutil::random_text(rng, 40);
        CHECK(estimate_tokens(make_doc("r", text)) == stream_tokens(text));
        CHECK(estimate_tokens(make_doc("r", text), TokenEstimator::bytes4) == text.size() / 4);
    }
}

TEST_CASE("corpus-level estimation sums per-document estimates") {
    const std::vector<CodeDocument> corpus = {
        make_doc("a", "one two"),
        make_doc("b", "three"),
        make_doc("c", ""),
    };
    CHECK(estimate_tokens(corpus) == 3);
    CHECK(estimate_tokens(corpus, TokenEstimator::bytes4) == (7 / 4) + (5 / 4));
}

TEST_CASE("estimator names round trip; unknown names are a ConfigError") {
    CHECK(to_string(TokenEstimator::whitespace) == "whitespace");
    CHECK(to_string(TokenEstimator::bytes4) == "bytes4");
    CHECK(estimator_from_string("whitespace") == TokenEstimator::whitespace);
    CHECK(estimator_from_string("bytes4") == TokenEstimator::bytes4);
    CHECK_THROWS_AS(estimator_from_string("gpt2"), ConfigError);
    CHECK_THROWS_AS(estimator_from_string(""), ConfigError);
}

// ---------------------------------------------------------------------------
// Stage entries and manifest validation
// ---------------------------------------------------------------------------

TEST_CASE("make_stage_entry aggregates output and rejection reasons") {
    const std::vector<CodeDocument> output = {
        make_doc("a", "x y z", "Python"),
        make_doc("b", "q r", "Python"),
        make_doc("c", "go code", "Go"),
    };
    const std::vector<Rejection> rejected = {
        {"d", "too-long"}, {"e", "too-long"}, {"f", "decode-failure"}};

    const auto entry = make_stage_entry("preprocess", 6, output, rejected);
    CHECK(entry.stage == "preprocess");
    CHECK(entry.docs_in == 6);
    CHECK(entry.docs_out == 3);
    CHECK(entry.bytes_out == 5 + 3 + 7);
    CHECK(entry.est_tokens_out == 3 + 2 + 2);
    CHECK(entry.per_language == std::map<std::string, std::size_t>{{"Go", 1}, {"Python", 2}});
    CHECK(entry.reason_histogram ==
          std::map<std::string, std::size_t>{{"decode-failure", 1}, {"too-long", 2}});

    const auto bytes4 = make_stage_entry("preprocess", 6, output, rejected, TokenEstimator::bytes4);
    CHECK(bytes4.est_tokens_out == 5 / 4 + 3 / 4 + 7 / 4);
}

TEST_CASE("manifest validation enforces per-stage shrinkage and chaining") {
    CHECK_NOTHROW(two_stage_manifest().validate());
    CHECK_NOTHROW(PipelineManifest{}.validate());  // empty is fine

    SUBCASE("a stage may not emit more than it consumed") {
        auto manifest = two_stage_manifest();
        manifest.stages[1].docs_out = 81;
        CHECK_THROWS_AS(manifest.validate(), ConfigError);
    }
    SUBCASE("stage k+1 must consume exactly what stage k produced") {
        auto manifest = two_stage_manifest();
        manifest.stages[1].docs_in = 79;
        CHECK_THROWS_AS(manifest.validate(), ConfigError);
    }
    SUBCASE("the estimator id must be known") {
        auto manifest = two_stage_manifest();
        manifest.estimator = "mystery";
        CHECK_THROWS_AS(manifest.validate(), ConfigError);
    }
}

// ---------------------------------------------------------------------------
// Manifest serialization
// ---------------------------------------------------------------------------

TEST_CASE("manifest JSON round trip preserves every field") {
    auto manifest = two_stage_manifest();
    manifest.estimator = "bytes4";
    const std::string text = manifest_to_json(manifest);
    CHECK(text.find("\"version\": 1") != std::string::npos);
    CHECK(text.back() == '\n');
    CHECK(manifest_from_json(text) == manifest);
}

TEST_CASE("two identical runs serialize to byte-identical manifests") {
    // No wall-clock field exists, so equality is byte equality.
    CHECK(manifest_to_json(two_stage_manifest()) == manifest_to_json(two_stage_manifest()));
}

TEST_CASE("manifest parsing rejects malformed input") {
    CHECK_THROWS_AS(manifest_from_json("not json at all"), ConfigError);
    CHECK_THROWS_AS(manifest_from_json("[]"), ConfigError);
    // Structurally valid JSON that breaches chaining fails validation.
    auto manifest = two_stage_manifest();
    manifest.stages[1].docs_in = 79;
    std::string text = manifest_to_json(manifest);  // serializer does not validate
    CHECK_THROWS_AS(manifest_from_json(text), ConfigError);
    // Missing a required stage key.
    CHECK_THROWS_AS(manifest_from_json(R"({"stages":[{"docs_in":1,"docs_out":1}]})"), ConfigError);
    // Wrong type for a required key.
    CHECK_THROWS_AS(
        manifest_from_json(R"({"stages":[{"stage":"x","docs_in":"one","docs_out":1}]})"),
        ConfigError);
}

TEST_CASE("manifest save/load round trip; a missing file is a StageError") {
    testutil::TempDir dir;
    const auto manifest = two_stage_manifest();
    const std::string path = dir.file("manifest.json");
    save_manifest(path, manifest);
    CHECK(load_manifest(path) == manifest);
    CHECK(testutil::read_file(path) == manifest_to_json(manifest));
    CHECK_THROWS_AS(load_manifest(dir.file("absent.json")), StageError);
}

// ---------------------------------------------------------------------------
// Composition table
// ---------------------------------------------------------------------------

TEST_CASE("composition table groups by language, sorts by bytes then name") {
    std::vector<CodeDocument> corpus = {
        make_doc("p1", std::string(60, 'a') + " b", "Python"),  // 62 bytes, 2 tokens
        make_doc("p2", std::string(37, 'c') + " d", "Python"),  // 39 bytes, 2 tokens
        make_doc("g1", std::string(300, 'x'), "Go"),            // 300 bytes, 1 token
        make_doc("m1", std::string(101, 'y'), "Markdown"),      // 101 bytes, 1 token
    };
    const auto rows = composition_table(corpus);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == CompositionRow{"Go", 1, 300, 1, 300.0 / 502.0});
    CHECK(rows[1] == CompositionRow{"Markdown", 1, 101, 1, 101.0 / 502.0});
    CHECK(rows[2] == CompositionRow{"Python", 2, 101, 4, 101.0 / 502.0});
    // Markdown and Python tie on bytes; names break the tie ascending.

    double ratio_sum = 0.0;
    for (const auto& row : rows) ratio_sum += row.ratio;
    CHECK(std::abs(ratio_sum - 1.0) <= 1e-9);

    // Permutation invariance.
    std::vector<CodeDocument> reversed(corpus.rbegin(), corpus.rend());
    CHECK(composition_table(reversed) == rows);
}

TEST_CASE("composition table on empty and zero-byte corpora") {
    CHECK(composition_table({}).empty());
    const std::vector<CodeDocument> empties = {make_doc("a", "", "Python"),
                                               make_doc("b", "", "Go")};
    const auto rows = composition_table(empties);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].language == "Go");  // bytes tie at zero; names ascend
    CHECK(rows[0].ratio == 0.0);
    CHECK(rows[1].ratio == 0.0);
}

TEST_CASE("formatted composition table has a header and one line per language") {
    const std::vector<CodeDocument> corpus = {make_doc("g", std::string(300, 'x'), "Go")};
    const std::string table = format_composition_table(composition_table(corpus));
    std::istringstream lines(table);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line.find("language") == 0);
    CHECK(line.find("est_tokens") != std::string::npos);
    REQUIRE(std::getline(lines, line));
    CHECK(line.find("Go") == 0);
    CHECK(line.find("1.0000") != std::string::npos);
    CHECK_FALSE(std::getline(lines, line));
}

TEST_CASE("composition CSV quotes awkward language names") {
    const std::vector<CompositionRow> rows = {
        {"Go", 1, 300, 60, 1.0},
        {"C,weird", 1, 10, 2, 0.5},
        {"say\"hi", 1, 10, 2, 0.25},
    };
    CHECK(composition_csv(rows) ==
          "language,files,bytes,est_tokens,ratio\n"
          "Go,1,300,60,1.000000\n"
          "\"C,weird\",1,10,2,0.500000\n"
          "\"say\"\"hi\",1,10,2,0.250000\n");
}

// ---------------------------------------------------------------------------
// Funnel report
// ---------------------------------------------------------------------------

TEST_CASE("funnel report shows per-stage and cumulative retention") {
    const std::string report = funnel_report(two_stage_manifest());
    CHECK(report.find("preprocess") != std::string::npos);
    CHECK(report.find("80.00") != std::string::npos);  // 80/100 kept
    CHECK(report.find("75.00") != std::string::npos);  // 60/80 kept
    CHECK(report.find("60.00") != std::string::npos);  // 60/100 overall
    CHECK(report.find("(token estimator: whitespace)") != std::string::npos);
}

TEST_CASE("funnel CSV is exact") {
    CHECK(funnel_csv(two_stage_manifest()) ==
          "stage,docs_in,docs_out,bytes_out,est_tokens_out,kept_pct,overall_pct\n"
          "preprocess,100,80,800,200,80.0000,80.0000\n"
          "exact-dedup,80,60,600,150,75.0000,60.0000\n");
}

TEST_CASE("an empty stage retains one hundred percent by convention") {
    PipelineManifest manifest;
    manifest.stages.push_back({"preprocess", 0, 0, 0, 0, {}, {}});
    CHECK(funnel_csv(manifest) ==
          "stage,docs_in,docs_out,bytes_out,est_tokens_out,kept_pct,overall_pct\n"
          "preprocess,0,0,0,0,100.0000,100.0000\n");
}

TEST_CASE("funnel rendering validates the manifest first") {
    auto manifest = two_stage_manifest();
    manifest.stages[1].docs_in = 79;
    CHECK_THROWS_AS(funnel_report(manifest), ConfigError);
    CHECK_THROWS_AS(funnel_csv(manifest), ConfigError);
}
