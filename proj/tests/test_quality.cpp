#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "codesift/hashing.hpp"
#include "codesift/quality.hpp"
#include "test_util.hpp"

using namespace codesift;
using testutil::make_doc;

namespace {

QualityRule rule(const std::string& signal, const std::string& comparator, double threshold,
                 std::vector<std::string> languages = {},
                 const std::string& category = "general-code") {
    QualityRule r;
    r.name = signal;
    r.signal = signal;
    r.comparator = comparator;
    r.threshold = threshold;
    r.languages = std::move(languages);
    r.category = category;
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

TEST_CASE("python signals match hand-computed line counts") {
    const std::string content =
        "import os\n"
        "from sys import argv\n"
        "\n"
        "def main():\n"
        "    pass\n"
        "x = 'a b c'\n";
    const auto s = compute_signals(make_doc("d", content, "Python"));
    // 6 physical lines, no phantom line after the trailing newline.
    CHECK(s.at("python-import-lines") == doctest::Approx(2.0 / 6.0));
    CHECK(s.at("python-function-density") == doctest::Approx(1.0 / 6.0));
    CHECK(s.at("python-pass-lines") == doctest::Approx(1.0 / 6.0));
    CHECK(s.at("python-parse-valid") == 1.0);
    CHECK(s.at("non-blank-lines") == 5.0);
    CHECK(s.at("assert-line") == 0.0);
    CHECK(s.at("placeholder-line") == 0.0);
    CHECK(s.at("long-string-line") == 0.0);
}

TEST_CASE("async def counts toward function density") {
    const auto s = compute_signals(make_doc("d", "async def f():\n    pass\n", "Python"));
    CHECK(s.at("python-function-density") == doctest::Approx(0.5));
}

TEST_CASE("python-parse-valid is 0 for broken sources") {
    const auto s = compute_signals(make_doc("d", "def f(:\n", "Python"));
    CHECK(s.at("python-parse-valid") == 0.0);
}

TEST_CASE("hex-chars counts hex digits over non-whitespace characters") {
    CHECK(compute_signals(make_doc("d", "deadbeef", "Python")).at("hex-chars") == 1.0);
    CHECK(compute_signals(make_doc("d", "zz zz", "Python")).at("hex-chars") == 0.0);
    CHECK(compute_signals(make_doc("d", "ab zz", "Python")).at("hex-chars") ==
          doctest::Approx(0.5));
    // 0/0 = 0: whitespace-only content has no non-whitespace characters.
    CHECK(compute_signals(make_doc("d", "  \n ", "Python")).at("hex-chars") == 0.0);
}

TEST_CASE("empty content scores 0 everywhere by the 0/0 convention") {
    const auto s = compute_signals(make_doc("d", "", "Python"));
    for (const auto& [name, value] : s) {
        CAPTURE(name);
        if (name == "python-parse-valid")
            CHECK(value == 1.0);  // the empty module parses
        else
            CHECK(value == 0.0);
    }
}

TEST_CASE("long-word-in-string measures characters of oversized string words") {
    // One 25-character word inside the literal; denominator is content size.
    const std::string content = "x = \"aaaaaaaaaaaaaaaaaaaaaaaaa\"\n";
    const auto s = compute_signals(make_doc("d", content, "Python"));
    CHECK(s.at("long-word-in-string") ==
          doctest::Approx(25.0 / static_cast<double>(content.size())));
    // 20 characters exactly is not "longer than 20".
    const std::string ok = "x = \"aaaaaaaaaaaaaaaaaaaa\"\n";
    CHECK(compute_signals(make_doc("d", ok, "Python")).at("long-word-in-string") == 0.0);
}

TEST_CASE("long-string-line fires above 15 words in one literal") {
    auto line_with = [](int words) {
        std::string lit;
        for (int i = 0; i < words; ++i) lit += (i ? " w" : "w");
        return "x = '" + lit + "'\n";
    };
    CHECK(compute_signals(make_doc("d", line_with(16), "Python")).at("long-string-line") == 1.0);
    CHECK(compute_signals(make_doc("d", line_with(15), "Python")).at("long-string-line") == 0.0);
}

TEST_CASE("backtick literals count only for JavaScript and Go") {
    const std::string content =
        "x = `one two three four five six seven eight nine ten eleven twelve "
        "thirteen fourteen fifteen sixteen`\n";
    CHECK(compute_signals(make_doc("d", content, "JavaScript")).at("long-string-line") == 1.0);
    CHECK(compute_signals(make_doc("d", content, "Go")).at("long-string-line") == 1.0);
    // In Python a backtick is not a quote character.
    CHECK(compute_signals(make_doc("d", content, "Python")).at("long-string-line") == 0.0);
}

TEST_CASE("placeholder and assert lines") {
    const std::string content =
        "# TODO fix this\n"
        "x = 1\n"
        "assert x == 1\n"
        "# You Code Here\n"
        "todo = 2\n";  // lowercase 'todo' is an identifier, not a marker
    const auto s = compute_signals(make_doc("d", content, "Python"));
    CHECK(s.at("placeholder-line") == doctest::Approx(2.0 / 5.0));
    CHECK(s.at("assert-line") == doctest::Approx(1.0 / 5.0));
    // "asserting" must not count: word-boundary match only.
    const auto t = compute_signals(make_doc("d", "asserting = 1\n", "Python"));
    CHECK(t.at("assert-line") == 0.0);
}

TEST_CASE("per-language import and keyword signals") {
    const auto c = compute_signals(make_doc("d", "#include <stdio.h>\ngoto fail;\nint x;\n", "C"));
    CHECK(c.at("include-lines") == doctest::Approx(1.0 / 3.0));
    CHECK(c.at("c-goto-lines") == doctest::Approx(1.0 / 3.0));

    const auto cpp = compute_signals(make_doc("d", "# include <vector>\nint y;\n", "C++"));
    CHECK(cpp.at("include-lines") == doctest::Approx(0.5));
    CHECK(cpp.count("c-goto-lines") == 0);  // goto signal is C-only

    const auto cs = compute_signals(make_doc("d", "using System;\nclass A {}\n", "C#"));
    CHECK(cs.at("csharp-using-lines") == doctest::Approx(0.5));

    const auto java =
        compute_signals(make_doc("d", "import java.util.List;\nclass A {}\n", "Java"));
    CHECK(java.at("java-import-lines") == doctest::Approx(0.5));

    const auto js = compute_signals(
        make_doc("d", "import x from 'y';\nconst z = require('w');\nlet a = 1;\n", "JavaScript"));
    CHECK(js.at("js-import-lines") == doctest::Approx(2.0 / 3.0));

    const auto go = compute_signals(make_doc("d", "import \"fmt\"\nfunc main() {}\n", "Go"));
    CHECK(go.at("go-import-lines") == doctest::Approx(0.5));
}

TEST_CASE("html visible-text ratio") {
    // Markup only: 0 visible characters.
    CHECK(compute_signals(make_doc("d", "<html><body></body></html>", "HTML"))
              .at("html-visible-text") == 0.0);
    // "Helloworld" = 10 visible of 36 non-whitespace characters.
    const auto s = compute_signals(make_doc("d", "<html><body>Hello world</body></html>", "HTML"));
    CHECK(s.at("html-visible-text") == doctest::Approx(10.0 / 36.0));
    // Script bodies are markup, not text.
    const auto script =
        compute_signals(make_doc("d", "<script>var x = 'Hello world';</script><p>Hi</p>", "HTML"));
    const auto plain = compute_signals(make_doc("d", "<p>Hello world and Hi</p>", "HTML"));
    CHECK(script.at("html-visible-text") < plain.at("html-visible-text"));
}

TEST_CASE("signals outside the language scope are omitted, never zero-filled") {
    const auto s = compute_signals(make_doc("d", "import x\n", "Haskell"));
    CHECK(s.count("python-import-lines") == 0);
    CHECK(s.count("go-import-lines") == 0);
    CHECK(s.count("html-visible-text") == 0);
    CHECK(s.count("hex-chars") == 1);  // general signals always present
    CHECK(s.count("non-blank-lines") == 1);

    CHECK(signal_in_scope("hex-chars", "Haskell"));
    CHECK(signal_in_scope("python-parse-valid", "Python"));
    CHECK_FALSE(signal_in_scope("python-parse-valid", "Go"));
}

TEST_CASE("crlf line endings do not change line counts") {
    const auto unix_s = compute_signals(make_doc("d", "import os\nx = 1\n", "Python"));
    const auto dos_s = compute_signals(make_doc("d", "import os\r\nx = 1\r\n", "Python"));
    CHECK(unix_s.at("python-import-lines") == dos_s.at("python-import-lines"));
    CHECK(unix_s.at("non-blank-lines") == dos_s.at("non-blank-lines"));
}

// ---------------------------------------------------------------------------
// Rules and filtering
// ---------------------------------------------------------------------------

TEST_CASE("rule validation rejects bad registries at load time") {
    auto expect_throw = [](QualityRule r) {
        CHECK_THROWS_AS(RuleRegistry::from_rules({std::move(r)}), ConfigError);
    };
    expect_throw(rule("no-such-signal", ">", 0.5));
    expect_throw(rule("hex-chars", ">=", 0.5));  // unknown comparator
    expect_throw(rule("hex-chars", ">", 0.5, {}, "made-up-category"));
    {
        auto r = rule("hex-chars", ">", std::nan(""));
        CHECK_THROWS_AS(RuleRegistry::from_rules({r}), ConfigError);
    }
    // Scope wider than the signal's: python-parse-valid never exists for Go.
    expect_throw(rule("python-parse-valid", "==", 0.0, {"Go"}, "language-specific"));
    expect_throw(rule("python-parse-valid", "==", 0.0, {}, "language-specific"));
    // Duplicate rule names.
    CHECK_THROWS_AS(
        RuleRegistry::from_rules({rule("hex-chars", ">", 0.4), rule("hex-chars", "<", 0.1)}),
        ConfigError);
    // A valid registry loads.
    CHECK_NOTHROW(RuleRegistry::from_rules(
        {rule("hex-chars", ">", 0.4),
         rule("python-parse-valid", "==", 0.0, {"Python"}, "language-specific")}));
}

TEST_CASE("builtin registry carries the shipped rules") {
    const auto& reg = RuleRegistry::builtin();
    CHECK(reg.rules().size() == 17);
    std::set<std::string> names;
    for (const auto& r : reg.rules()) names.insert(r.name);
    CHECK(names.count("hex-chars"));
    CHECK(names.count("python-parse"));
    CHECK(names.count("html-visible-text"));
}

TEST_CASE("comparators fire strictly") {
    const auto doc = make_doc("d", "ab zz", "Python");  // hex-chars == 0.5
    const auto signals = compute_signals(doc);

    auto fires = [&](const QualityRule& r) {
        return !apply_filters(doc, signals, RuleRegistry::from_rules({r})).kept;
    };
    CHECK(fires(rule("hex-chars", ">", 0.49)));
    CHECK_FALSE(fires(rule("hex-chars", ">", 0.5)));  // strict >
    CHECK(fires(rule("hex-chars", "<", 0.51)));
    CHECK_FALSE(fires(rule("hex-chars", "<", 0.5)));  // strict <
    CHECK(fires(rule("hex-chars", "==", 0.5)));
    CHECK_FALSE(fires(rule("hex-chars", "==", 0.4999)));
}

TEST_CASE("rules outside the document language never fire") {
    const auto reg = RuleRegistry::from_rules(
        {rule("python-parse-valid", "==", 0.0, {"Python"}, "language-specific")});
    const auto go_doc = make_doc("d", "not python at all {", "Go");
    CHECK(filter_document(go_doc, reg).kept);
    const auto py_doc = make_doc("d", "def f(:\n", "Python");
    CHECK_FALSE(filter_document(py_doc, reg).kept);
}

TEST_CASE("verdict reasons keep registry order and name every fired rule") {
    auto r1 = rule("hex-chars", ">", 0.1);
    r1.name = "too-hexy";
    auto r2 = rule("non-blank-lines", "==", 1.0);
    r2.name = "one-liner";
    r2.category = "natural-language";
    const auto reg = RuleRegistry::from_rules({r1, r2});
    const auto verdict = filter_document(make_doc("d", "deadbeef", "Python"), reg);
    CHECK_FALSE(verdict.kept);
    CHECK(verdict.reasons == std::vector<std::string>{"too-hexy", "one-liner"});
}

TEST_CASE("disabled rules are inert") {
    auto r = rule("hex-chars", ">", 0.1);
    r.enabled = false;
    const auto reg = RuleRegistry::from_rules({r});
    CHECK(filter_document(make_doc("d", "deadbeef", "Python"), reg).kept);
}

TEST_CASE("filter_corpus is worker-independent and aligns verdicts") {
    std::vector<CodeDocument> docs;
    for (int i = 0; i < 60; ++i) {
        const bool hexy = i % 3 == 0;
        docs.push_back(
            make_doc("d" + std::to_string(i), hexy ? "deadbeef cafe" : "zz qq xx yy", "Python"));
    }
    const auto reg = RuleRegistry::from_rules({rule("hex-chars", ">", 0.4)});
    const auto serial = filter_corpus(docs, reg, 1);
    const auto parallel = filter_corpus(docs, reg, 4);
    CHECK(serial.kept == parallel.kept);
    CHECK(serial.verdicts == parallel.verdicts);
    CHECK(serial.verdicts.size() == docs.size());
    CHECK(serial.kept.size() == 40);
    for (std::size_t i = 0; i < docs.size(); ++i) CHECK(serial.verdicts[i].id == docs[i].id);
}

TEST_CASE("raising a > threshold is monotone: never fires on more documents") {
    std::mt19937_64 rng(17);
    std::vector<CodeDocument> docs;
    for (int i = 0; i < 80; ++i)
        docs.push_back(make_doc("m" + std::to_string(i), testutil::random_text(rng, 15), "Python"));
    for (double t = 0.0; t < 0.9; t += 0.1) {
        const auto low = filter_corpus(docs, RuleRegistry::from_rules({rule("hex-chars", ">", t)}));
        const auto high =
            filter_corpus(docs, RuleRegistry::from_rules({rule("hex-chars", ">", t + 0.1)}));
        CHECK(high.kept.size() >= low.kept.size());
    }
}

TEST_CASE("verdict_jsonl shape") {
    std::vector<FilterVerdict> verdicts = {
        {"a", true, {}},
        {"b", false, {"rule-x", "rule-y"}},
    };
    const auto text = verdict_jsonl(verdicts);
    CHECK(text ==
          "{\"id\":\"a\",\"kept\":true,\"reasons\":[]}\n"
          "{\"id\":\"b\",\"kept\":false,\"reasons\":[\"rule-x\",\"rule-y\"]}\n");
}

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

TEST_CASE("signal_histograms bins per language with edge clamping") {
    std::vector<CodeDocument> docs = {
        make_doc("p1", "deadbeef", "Python"),  // hex 1.0 -> top bin
        make_doc("p2", "zzzz", "Python"),      // hex 0.0 -> bottom bin
        make_doc("p3", "ab zz", "Python"),     // hex 0.5 -> middle
        make_doc("g1", "zz zz zz", "Go"),      // separate language key
    };
    const auto hists = signal_histograms(docs, "hex-chars", 4);
    REQUIRE(hists.count("Python") == 1);
    REQUIRE(hists.count("Go") == 1);
    const auto& py = hists.at("Python");
    CHECK(py.total == 3);
    REQUIRE(py.counts.size() == 4);
    CHECK(py.counts[0] == 1);  // 0.0
    CHECK(py.counts[2] == 1);  // 0.5
    CHECK(py.counts[3] == 1);  // 1.0 clamps into the last bin
    CHECK(hists.at("Go").total == 1);

    SUBCASE("unknown signal raises ConfigError") {
        CHECK_THROWS_AS(signal_histograms(docs, "nope", 4), ConfigError);
    }
    SUBCASE("out-of-scope documents are skipped") {
        const auto parse = signal_histograms(docs, "python-parse-valid", 2);
        CHECK(parse.count("Go") == 0);
        CHECK(parse.at("Python").total == 3);
    }
    SUBCASE("worker count does not change the result") {
        const auto h1 = signal_histograms(docs, "hex-chars", 4, 0.0, 1.0, 1);
        const auto h4 = signal_histograms(docs, "hex-chars", 4, 0.0, 1.0, 4);
        CHECK(h1.size() == h4.size());
        for (const auto& [lang, h] : h1) {
            CHECK(h4.at(lang).counts == h.counts);
            CHECK(h4.at(lang).total == h.total);
        }
    }
}

TEST_CASE("score_histograms imports external scores") {
    std::vector<std::pair<std::string, double>> scores = {
        {"Python", 0.05},
        {"Python", 0.95},
        {"Python", -3.0},  // clamps low
        {"Go", 17.0},      // clamps high
    };
    const auto hists = score_histograms(scores, 10);
    CHECK(hists.at("Python").counts[0] == 2);  // 0.05 and the clamped -3.0
    CHECK(hists.at("Python").counts[9] == 1);
    CHECK(hists.at("Go").counts[9] == 1);
    CHECK(hists.at("Python").total == 3);
}

TEST_CASE("uniform scores fill bins uniformly within 3 sigma") {
    // hash_coin is the library's uniform source; 10k draws over 10 bins
    // should put ~1000 in each (sigma = sqrt(n p (1-p)) ~ 30).
    std::vector<std::pair<std::string, double>> scores;
    for (int i = 0; i < 10000; ++i)
        scores.push_back({"L", hash_coin(99, "key-" + std::to_string(i))});
    const auto hists = score_histograms(scores, 10);
    for (const auto count : hists.at("L").counts) {
        CHECK(count > 1000 - 100);
        CHECK(count < 1000 + 100);
    }
}

// ---------------------------------------------------------------------------
// Exclusive hits
// ---------------------------------------------------------------------------

TEST_CASE("exclusive_hits isolates documents only the candidate would drop") {
    // base registry drops hex-heavy docs; candidate targets one-line docs.
    const auto reg = RuleRegistry::from_rules({rule("hex-chars", ">", 0.9)});
    auto candidate = rule("non-blank-lines", "==", 1.0);
    candidate.name = "single-line";
    candidate.category = "natural-language";

    std::vector<CodeDocument> docs = {
        make_doc("only-short", "hello world", "Python"),      // candidate only
        make_doc("short-and-hexy", "deadbeef", "Python"),     // both fire
        make_doc("long-clean", "a b\nc d\ne f\n", "Python"),  // neither
    };
    const auto hits = exclusive_hits(docs, reg, candidate);
    CHECK(hits == std::vector<std::string>{"only-short"});
}

TEST_CASE("exclusive_hits ignores the candidate's own name in the registry") {
    // Tuning an existing rule: the shipped copy fires too, but it is the
    // same rule, so it must not mask the candidate's exclusive hit.
    auto shipped = rule("hex-chars", ">", 0.1);
    const auto reg = RuleRegistry::from_rules({shipped});
    auto candidate = rule("hex-chars", ">", 0.4);  // proposed tighter threshold
    std::vector<CodeDocument> docs = {
        make_doc("hexy", "deadbeef zz zz", "Python"),  // hex 8/12: both thresholds hit
    };
    const auto hits = exclusive_hits(docs, reg, candidate);
    CHECK(hits == std::vector<std::string>{"hexy"});
}
