#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "codesift/recall.hpp"
#include "test_util.hpp"

using namespace codesift;

// ---------------------------------------------------------------------------
// BPE
// ---------------------------------------------------------------------------

TEST_CASE("train_bpe picks the highest-frequency pair (brute-force oracle)") {
    // "abab abab": pieces "abab" x2 and " " x1. Adjacent pairs in "abab" are
    // (a,b) twice and (b,a) once, weighted by the piece count: (a,b)=4,
    // (b,a)=2. First merge must be (a,b); merging leaves "ab","ab" whose only
    // pair is (ab,ab).
    const std::vector<std::string> corpus = {"abab abab"};
    const auto one = train_bpe(corpus, 257);
    REQUIRE(one.merges.size() == 1);
    CHECK(one.merges[0] == std::pair<std::string, std::string>{"a", "b"});

    const auto two = train_bpe(corpus, 258);
    REQUIRE(two.merges.size() == 2);
    CHECK(two.merges[1] == std::pair<std::string, std::string>{"ab", "ab"});

    // A generous budget stops when no adjacent pairs remain.
    const auto full = train_bpe(corpus, 400);
    CHECK(full.merges.size() == 2);
}

TEST_CASE("train_bpe on a run of one byte") {
    // "aaaa": pairs (a,a) x3 -> merge to "aa","aa" -> pair (aa,aa) -> "aaaa".
    const auto model = train_bpe({"aaaa"}, 400);
    REQUIRE(model.merges.size() == 2);
    CHECK(model.merges[0] == std::pair<std::string, std::string>{"a", "a"});
    CHECK(model.merges[1] == std::pair<std::string, std::string>{"aa", "aa"});
    CHECK(model.vocab_size() == 258);
}

TEST_CASE("train_bpe breaks frequency ties lexicographically") {
    // (a,b) and (c,d) both appear once; (a,b) sorts first.
    const auto model = train_bpe({"ab", "cd"}, 257);
    REQUIRE(model.merges.size() == 1);
    CHECK(model.merges[0] == std::pair<std::string, std::string>{"a", "b"});
}

TEST_CASE("train_bpe rejects sub-byte vocabularies") {
    CHECK_THROWS_AS(train_bpe({"x"}, 255), ConfigError);
    CHECK_NOTHROW(train_bpe({"x"}, 256));
}

TEST_CASE("encode/decode round-trips any input byte-exactly") {
    const auto model = train_bpe({"the quick brown fox", "pack my box"}, 300);
    const std::string cases[] = {
        "",
        "the quick brown fox",
        "completely unseen vocabulary!",
        "caf\xc3\xa9 \xe6\x97\xa5\xe6\x9c\xac",
        "  leading and   runs\t\tof\nwhitespace  ",
        std::string("\x01\x02\x7f\xc3\xa9", 5),
    };
    for (const auto& text : cases) {
        CAPTURE(text);
        CHECK(BpeModel::decode(model.encode(text)) == text);
    }
}

TEST_CASE("encoding is canonical: re-encoding a decode is a no-op") {
    const auto model = train_bpe({"banana bandana"}, 280);
    const auto tokens = model.encode("banana bandana banana");
    CHECK(model.encode(BpeModel::decode(tokens)) == tokens);
}

TEST_CASE("merges never cross piece boundaries") {
    BpeModel model;
    model.merges = {{"a", "b"}};
    // "a b" splits into pieces "a", " ", "b": no adjacent (a,b) anywhere.
    const auto tokens = model.encode("a b");
    CHECK(tokens == std::vector<std::string>{"a", " ", "b"});
    CHECK(model.encode("ab") == std::vector<std::string>{"ab"});
}

// ---------------------------------------------------------------------------
// Classifier
// ---------------------------------------------------------------------------

namespace {

std::vector<SeedExample> toy_seeds() {
    std::vector<SeedExample> seeds;
    const char* positives[] = {
        "def parse(tokens): return ast",       "class Compiler: def emit(self)",
        "for i in range(n): total += arr[i]",  "import os import sys import json",
        "function render() { return dom; }",   "int main() { printf(hello); }",
        "while stack: node = stack.pop()",     "try: compile(src) except SyntaxError",
        "public static void main(String[] a)", "import json def load(path): return open(path)",
        "lambda x: x * x map filter reduce",   "SELECT id FROM users WHERE age > 21",
    };
    const char* negatives[] = {
        "the cat sat on the warm mat",        "once upon a time in a village",
        "the weather today is mild and calm", "she walked slowly along the shore",
        "add two cups of flour and stir",     "the committee met on tuesday morning",
        "his favorite color is deep blue",    "the garden bloomed in early spring",
        "they drove north past the old mill", "a quiet rain fell through the night",
        "the recipe calls for fresh basil",   "morning light filled the small room",
    };
    for (const char* p : positives) seeds.push_back({p, true});
    for (const char* n : negatives) seeds.push_back({n, false});
    return seeds;
}

RecallModelConfig small_config() {
    RecallModelConfig config;
    config.dim = 16;
    config.buckets = 1 << 12;
    config.bpe_vocab = 300;
    config.epochs = 40;  // the toy set needs a hot schedule to separate
    config.lr = 1.0;
    config.seed = 5;
    return config;
}

}  // namespace

TEST_CASE("classifier separates code from prose on held-out data") {
    const auto model = train_classifier(toy_seeds(), small_config());
    CHECK(model.held_out_accuracy >= 0.75);  // two held-out examples, both right
    // Training-like inputs score on the right side of the threshold.
    CHECK(model.score("def f(x): return x + 1 import sys") > 0.5);
    CHECK(model.score("the cat walked through the quiet garden") < 0.5);
}

TEST_CASE("an empty text scores the exact neutral prior") {
    const auto model = train_classifier(toy_seeds(), small_config());
    CHECK(model.score("") == 0.5);
    // Whitespace-only text still tokenizes (whitespace runs are BPE pieces so
    // decode stays a true inverse), so it is scored like any other text.
    const double ws = model.score("   \t\n  ");
    CHECK(ws > 0.0);
    CHECK(ws < 1.0);
}

TEST_CASE("training is deterministic for a fixed config") {
    const auto a = train_classifier(toy_seeds(), small_config());
    const auto b = train_classifier(toy_seeds(), small_config());
    CHECK(a.embeddings == b.embeddings);
    CHECK(a.output == b.output);
    CHECK(a.bias == b.bias);
    CHECK(a.held_out_accuracy == b.held_out_accuracy);
}

TEST_CASE("duplicated training set with halved epochs yields the identical model") {
    // lr decays by global step over the whole schedule, so two passes over
    // one copy and one pass over two copies are the same update sequence.
    auto seeds = toy_seeds();
    std::vector<SeedExample> doubled = seeds;
    doubled.insert(doubled.end(), seeds.begin(), seeds.end());

    auto config = small_config();
    config.epochs = 6;
    config.holdout_fraction = 0.0;  // holdout indexing differs; compare pure training
    const auto single = train_classifier(seeds, config);
    config.epochs = 3;
    const auto dup = train_classifier(doubled, config);
    CHECK(single.embeddings == dup.embeddings);
    CHECK(single.output == dup.output);
    CHECK(single.bias == dup.bias);
}

TEST_CASE("degenerate labels raise a StageError") {
    std::vector<SeedExample> all_positive = {{"a b", true}, {"c d", true}, {"e f", true}};
    try {
        train_classifier(all_positive, small_config());
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(std::string(e.what()).find("degenerate-labels") != std::string::npos);
    }
}

TEST_CASE("config validation rejects nonsense") {
    auto bad = small_config();
    bad.dim = 0;
    CHECK_THROWS_AS(train_classifier(toy_seeds(), bad), ConfigError);
    bad = small_config();
    bad.bpe_vocab = 100;
    CHECK_THROWS_AS(train_classifier(toy_seeds(), bad), ConfigError);
    bad = small_config();
    bad.threshold = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = small_config();
    bad.holdout_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("model save/load round trip preserves scores bit-for-bit") {
    testutil::TempDir dir;
    const auto model = train_classifier(toy_seeds(), small_config());
    const std::string path = dir.file("model.bin");
    model.save(path);
    const auto loaded = RecallModel::load(path);
    CHECK(loaded.embeddings == model.embeddings);
    CHECK(loaded.output == model.output);
    CHECK(loaded.bias == model.bias);
    CHECK(loaded.bpe.merges == model.bpe.merges);
    CHECK(loaded.held_out_accuracy == model.held_out_accuracy);
    CHECK(loaded.config.seed == model.config.seed);
    CHECK(loaded.score("def f(): pass") == model.score("def f(): pass"));
}

TEST_CASE("model load rejects corrupt files") {
    testutil::TempDir dir;
    const auto model = train_classifier(toy_seeds(), small_config());
    const std::string path = dir.file("model.bin");
    model.save(path);

    SUBCASE("truncated") {
        auto bytes = testutil::read_file(path);
        testutil::write_file(path, bytes.substr(0, bytes.size() / 2));
        CHECK_THROWS_AS(RecallModel::load(path), ConfigError);
    }
    SUBCASE("trailing garbage") {
        auto bytes = testutil::read_file(path);
        testutil::write_file(path, bytes + "extra");
        CHECK_THROWS_AS(RecallModel::load(path), ConfigError);
    }
    SUBCASE("bad magic") {
        auto bytes = testutil::read_file(path);
        bytes[0] = 'X';
        testutil::write_file(path, bytes);
        CHECK_THROWS_AS(RecallModel::load(path), ConfigError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(RecallModel::load(dir.file("nope.bin")), ConfigError);
    }
}

// ---------------------------------------------------------------------------
// Recall over web pages
// ---------------------------------------------------------------------------

TEST_CASE("recall_pages keeps pages at or above threshold and notes empties") {
    const auto model = train_classifier(toy_seeds(), small_config());
    std::vector<WebPage> corpus = {
        {"https://a.com/1", "def f(x): return x import os class A"},
        {"https://b.com/1", "the cat sat on the mat in the spring rain"},
        {"https://c.com/1", ""},
    };
    const auto out = recall_pages(model, corpus, 0.5);
    REQUIRE(out.recalled.size() == 1);
    CHECK(out.recalled[0].url == "https://a.com/1");
    REQUIRE(out.notes.size() == 1);
    CHECK(out.notes[0] == "empty-content: https://c.com/1");

    // Worker count never changes the outcome.
    const auto out4 = recall_pages(model, corpus, 0.5, 4);
    CHECK(out4.recalled == out.recalled);
    CHECK(out4.notes == out.notes);
}

TEST_CASE("web page jsonl round trip") {
    testutil::TempDir dir;
    std::vector<WebPage> pages = {{"https://x.com/a", "body text"},
                                  {"https://y.com/b", "line\nbreak \"quote\""}};
    const std::string path = dir.file("pages.jsonl");
    write_web_pages(path, pages);
    CHECK(read_web_pages(path) == pages);
    CHECK_THROWS_AS(read_web_pages(dir.file("missing.jsonl")), StageError);
}

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

TEST_CASE("base_url extracts the registrable host") {
    CHECK(base_url("https://my.oschina.net/u/4255272") == "oschina.net");
    CHECK(base_url("http://www.cnblogs.com/me/p/1.html") == "cnblogs.com");
    CHECK(base_url("cloud.tencent.com/developer/article/100") == "tencent.com");
    CHECK(base_url("https://forum.ubuntu.org.cn/viewtopic.php?t=1") == "ubuntu.org.cn");
    CHECK(base_url("https://bbs.emath.ac.cn/forum.php") == "emath.ac.cn");
    CHECK(base_url("https://user:pw@Example.COM:8080/p?q=1#f") == "example.com");
    CHECK(base_url("http://192.168.0.1:8080/admin") == "192.168.0.1");
    CHECK(base_url("http://localhost/x") == "localhost");
    CHECK(base_url("segmentfault.com/q/1010000") == "segmentfault.com");
    CHECK(base_url("https://deep.sub.domain.example.co.uk/x") == "example.co.uk");
}

TEST_CASE("malformed urls map to invalid-url") {
    CHECK(base_url("not a url with spaces") == "invalid-url");
    CHECK(base_url("http://") == "invalid-url");
    CHECK(base_url("https://bad..host/x") == "invalid-url");
    CHECK(base_url("https://.leading.dot/") == "invalid-url");
    CHECK(base_url("http://host_with_underscore/x") == "invalid-url");
}

TEST_CASE("discover_domains joins recalled counts with supplied totals") {
    std::vector<WebPage> recalled = {
        {"https://blog.codesite.com/a", "x"},
        {"https://blog.codesite.com/b", "x"},
        {"https://codesite.com/c", "x"},
        {"https://textsite.com/1", "x"},
    };
    std::map<std::string, std::size_t> totals = {
        {"codesite.com", 20},   // 3/20 = 0.15 -> flagged
        {"textsite.com", 10},   // 1/10 = 0.10 -> exactly the threshold: NOT flagged
        {"quietsite.com", 50},  // never recalled -> present, unflagged
    };
    const auto stats = discover_domains(recalled, totals);
    REQUIRE(stats.size() == 3);
    std::map<std::string, DomainStat> by_name;
    for (const auto& s : stats) by_name[s.domain] = s;

    CHECK(by_name.at("codesite.com").pages == 20);
    CHECK(by_name.at("codesite.com").code_pages == 3);
    CHECK(by_name.at("codesite.com").flagged);
    CHECK(by_name.at("textsite.com").code_fraction == doctest::Approx(0.10));
    CHECK_FALSE(by_name.at("textsite.com").flagged);  // strict >
    CHECK(by_name.at("quietsite.com").code_pages == 0);
    CHECK_FALSE(by_name.at("quietsite.com").flagged);
}

TEST_CASE("discover_domains clamps undercounted totals") {
    std::vector<WebPage> recalled = {{"https://small.com/a", "x"}, {"https://small.com/b", "x"}};
    const auto stats = discover_domains(recalled, {{"small.com", 1}});
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].pages == 2);  // clamped up to code_pages
    CHECK(stats[0].code_fraction == 1.0);
}

// ---------------------------------------------------------------------------
// URL patterns
// ---------------------------------------------------------------------------

TEST_CASE("url_matches implements SQL-LIKE wildcards with anchoring") {
    CHECK(url_matches("http://www.cnblogs.com/p/1", "%cnblogs.com%"));
    CHECK(url_matches("cloud.tencent.com/dev", "cloud.tencent%"));
    CHECK_FALSE(url_matches("https://cloud.tencent.com/dev", "cloud.tencent%"));
    CHECK(url_matches("https://site.com/questions", "%/questions"));
    CHECK_FALSE(url_matches("https://site.com/questions/2", "%/questions"));
    CHECK(url_matches("exact", "exact"));
    CHECK_FALSE(url_matches("exactly", "exact"));
    CHECK(url_matches("xaxbx", "%a%b%"));
    CHECK_FALSE(url_matches("xbxax", "%a%b%"));  // segment order matters
    CHECK(url_matches("abab", "%ab%ab%"));
    CHECK_FALSE(url_matches("ab", "%ab%ab%"));  // segments cannot overlap
    CHECK(url_matches("anything at all", "%"));
}

TEST_CASE("pattern files parse with comments and strict shape") {
    testutil::TempDir dir;
    const std::string good = dir.file("patterns.txt");
    testutil::write_file(good,
                         "# comment line\n"
                         "\n"
                         "%cnblogs.com% Code\n"
                         "%jyeoo.com% Math\n");
    const auto patterns = load_url_patterns(good);
    REQUIRE(patterns.size() == 2);
    CHECK(patterns[0] == UrlPattern{"%cnblogs.com%", "Code"});
    CHECK(patterns_with_tag(patterns, "Math").size() == 1);

    const std::string no_tag = dir.file("no_tag.txt");
    testutil::write_file(no_tag, "%cnblogs.com%\n");
    CHECK_THROWS_AS(load_url_patterns(no_tag), ConfigError);

    const std::string extra = dir.file("extra.txt");
    testutil::write_file(extra, "%cnblogs.com% Code extra-field\n");
    CHECK_THROWS_AS(load_url_patterns(extra), ConfigError);

    const std::string hollow = dir.file("hollow.txt");
    testutil::write_file(hollow, "%%% Code\n");
    CHECK_THROWS_AS(load_url_patterns(hollow), ConfigError);
}

TEST_CASE("the shipped pattern asset loads with both tags") {
    const auto& patterns = builtin_url_patterns();
    CHECK(patterns.size() == 29);
    CHECK(patterns_with_tag(patterns, "Code").size() == 18);
    CHECK(patterns_with_tag(patterns, "Math").size() == 11);
    // Spot-check a known developer-forum pattern against a plausible URL.
    bool hit = false;
    for (const auto& p : patterns_with_tag(patterns, "Code"))
        if (url_matches("https://segmentfault.com/q/1010000012", p.pattern)) hit = true;
    CHECK(hit);
}

TEST_CASE("annotate_urls recovers pattern pages the model scored low") {
    const auto model = train_classifier(toy_seeds(), small_config());
    const std::vector<UrlPattern> patterns = {{"%devforum.example%", "Code"}};
    std::vector<WebPage> pages = {
        // Prose-like body on a pattern-matched URL: scored low, recovered.
        {"https://devforum.example/q/1", "the cat sat on the mat in the rain"},
        // Code-like body on a pattern URL: scored high, nothing to recover.
        {"https://devforum.example/q/2", "def f(x): return x import os class A"},
        // Low score off-pattern: not recovered.
        {"https://elsewhere.example/1", "once upon a time in a village"},
        // Empty content: skipped entirely.
        {"https://devforum.example/q/3", ""},
    };
    const auto recovered = annotate_urls(pages, patterns, model, 0.5);
    REQUIRE(recovered.size() == 1);
    CHECK(recovered[0].url == "https://devforum.example/q/1");
}

// ---------------------------------------------------------------------------
// Iteration
// ---------------------------------------------------------------------------

namespace {

struct IterateFixture {
    std::vector<SeedExample> seeds = toy_seeds();
    std::vector<WebPage> corpus;
    std::vector<UrlPattern> patterns = {{"%devforum.example%", "Code"}};
    std::vector<std::string> hard_positive_urls;

    IterateFixture() {
        // Clear positives and negatives for the classifier.
        for (int i = 0; i < 6; ++i)
            corpus.push_back({"https://code" + std::to_string(i) + ".example/p",
                              "def handler(): import json return compile(src)"});
        for (int i = 0; i < 6; ++i)
            corpus.push_back({"https://prose" + std::to_string(i) + ".example/p",
                              "the cat sat on the mat through the morning rain"});
        // Hard positives: prose-like bodies (the model scores them low) on
        // pattern-matched URLs. The annotate step must pull them in.
        for (int i = 0; i < 3; ++i) {
            std::string url = "https://devforum.example/q/" + std::to_string(i);
            corpus.push_back({url, "a quiet rain fell softly through the village night"});
            hard_positive_urls.push_back(url);
        }
    }
};

}  // namespace

TEST_CASE("iterate grows the seed corpus from pattern recoveries, then stops") {
    IterateFixture fx;
    auto config = small_config();
    const auto result = iterate(fx.seeds, fx.corpus, /*rounds=*/3, config, fx.patterns,
                                /*threshold=*/0.5);

    REQUIRE(result.rounds.size() >= 1);
    const auto& r1 = result.rounds[0];
    CHECK(r1.round == 1);
    CHECK(r1.seed_size == fx.seeds.size());
    CHECK(r1.added_seeds == fx.hard_positive_urls.size());  // all three recovered
    CHECK(result.seeds.size() == fx.seeds.size() + fx.hard_positive_urls.size());

    // Recovered pages join as positive seeds exactly once: the next round
    // adds nothing and the loop stops early with a note.
    REQUIRE(result.rounds.size() == 2);
    CHECK(result.rounds[1].seed_size == fx.seeds.size() + 3);
    CHECK(result.rounds[1].added_seeds == 0);
    bool noted = false;
    for (const auto& note : result.notes)
        if (note.find("stopping early") != std::string::npos) noted = true;
    CHECK(noted);
}

TEST_CASE("iterate is deterministic") {
    IterateFixture fx;
    const auto config = small_config();
    const auto a = iterate(fx.seeds, fx.corpus, 2, config, fx.patterns, 0.5);
    const auto b = iterate(fx.seeds, fx.corpus, 2, config, fx.patterns, 0.5);
    CHECK(a.recalled == b.recalled);
    CHECK(a.seeds == b.seeds);
    CHECK(a.notes == b.notes);
    REQUIRE(a.rounds.size() == b.rounds.size());
    for (std::size_t i = 0; i < a.rounds.size(); ++i) CHECK(a.rounds[i] == b.rounds[i]);
}

TEST_CASE("iterate rejects a non-positive round count") {
    IterateFixture fx;
    CHECK_THROWS_AS(iterate(fx.seeds, fx.corpus, 0, small_config(), fx.patterns, 0.5), ConfigError);
}
