#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "codesift/document.hpp"

namespace codesift {

// ---------------------------------------------------------------------------
// Downsampling
// ---------------------------------------------------------------------------

/// Keeps documents of `language` with probability keep_ratio via a
/// deterministic per-id hash coin; every other language passes through
/// untouched. keep_ratio outside (0, 1] raises ConfigError; ratio 1 is the
/// identity. Survivors are byte-identical to their inputs.
std::vector<CodeDocument> downsample_language(const std::vector<CodeDocument>& corpus,
                                              const std::string& language, double keep_ratio,
                                              std::uint64_t seed);

/// Converts an absolute byte budget into a keep ratio by pre-scanning the
/// corpus: target_bytes / measured bytes of `language`, clamped to 1. A
/// language with no bytes yields 1 (nothing to downsample).
double keep_ratio_for_budget(const std::vector<CodeDocument>& corpus, const std::string& language,
                             std::size_t target_bytes);

// ---------------------------------------------------------------------------
// Algorithmic extraction
// ---------------------------------------------------------------------------

/// Documents whose content contains any keyword, case-insensitively.
/// An empty keyword list raises ConfigError.
std::vector<CodeDocument> extract_algorithmic(const std::vector<CodeDocument>& corpus,
                                              const std::vector<std::string>& keywords);

/// {"leetcode", "def solution", "class solution"}.
const std::vector<std::string>& default_algorithmic_keywords();

// ---------------------------------------------------------------------------
// Mixture assembly
// ---------------------------------------------------------------------------

struct MixtureComponent {
    std::string name;
    std::string source;  // key into the sources map; defaults to name
    double weight = 0.0;

    bool operator==(const MixtureComponent&) const = default;
};

/// Named components with non-negative weights summing to 1 within 1e-9.
struct MixtureSpec {
    std::vector<MixtureComponent> components;

    void validate() const;  // ConfigError on weight violations or dup names

    /// The default annealing mixture: original 0.8394, algorithmic 0.1244,
    /// snippets 0.0271, textbooks 0.0091.
    static MixtureSpec defaults();
};

struct MixtureComponentReport {
    std::string name;
    double target_share = 0.0;
    double achieved_share = 0.0;  // of tokens actually emitted
    std::size_t docs = 0;
    std::size_t tokens = 0;
    std::size_t shortfall_tokens = 0;  // target tokens the source could not supply

    bool operator==(const MixtureComponentReport&) const = default;
};

struct MixtureResult {
    std::vector<CodeDocument> mixed;
    std::vector<MixtureComponentReport> report;  // spec order
    std::size_t total_tokens = 0;
    bool shortfall = false;
};

/// Greedy deficit interleaver: each step takes the next document from the
/// component furthest below its token target, until the budget is met or
/// sources run dry. Each source is pre-shuffled by a seed-keyed hash of
/// document ids, so the result is deterministic and independent of input
/// order. A component whose source exhausts keeps its unmet deficit as an
/// explicit shortfall — its budget is never silently re-weighted onto the
/// others. Token accounting uses whitespace tokens.
MixtureResult assemble_mixture(const std::map<std::string, std::vector<CodeDocument>>& sources,
                               const MixtureSpec& spec, std::size_t total_tokens,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// Star filter
// ---------------------------------------------------------------------------

struct LanguageSnapshot {
    std::size_t files = 0;
    std::size_t bytes = 0;

    bool operator==(const LanguageSnapshot&) const = default;
};

struct StarFilterResult {
    std::vector<CodeDocument> kept;                  // stars >= min_stars, inclusive
    std::map<std::string, LanguageSnapshot> before;  // per-language distribution
    std::map<std::string, LanguageSnapshot> after;
};

/// Keeps documents with stars >= min_stars and snapshots the per-language
/// distribution on both sides for diversity comparison. min_stars <= 0
/// keeps everything (stars are never negative in practice but the
/// comparison is still applied literally).
StarFilterResult star_filter(const std::vector<CodeDocument>& corpus, std::int64_t min_stars);

// ---------------------------------------------------------------------------
// Decontamination
// ---------------------------------------------------------------------------

/// Benchmark fingerprint: entry-point identifiers plus every n-gram of the
/// benchmark texts under the decontamination tokenization (whitespace
/// tokens, lowercased) — the same tokenization the scan applies.
struct TestCorpusIndex {
    std::set<std::string> entry_points;
    std::set<std::string> ngrams;  // space-joined lowercased token n-grams
    std::size_t n = 10;

    bool empty() const { return entry_points.empty() && ngrams.empty(); }
};

/// Lowercased whitespace-token n-grams of `text`, space-joined. Texts
/// shorter than n tokens produce none.
std::vector<std::string> text_ngrams(const std::string& text, std::size_t n);

TestCorpusIndex build_test_index(const std::vector<std::string>& benchmark_texts,
                                 const std::vector<std::string>& entry_points, std::size_t n = 10);

struct RemovalRecord {
    std::string id;
    std::string reason;    // "entry-point" or "ngram"
    std::string evidence;  // the identifier or the matched n-gram

    bool operator==(const RemovalRecord&) const = default;
};

struct DecontaminateResult {
    std::vector<CodeDocument> kept;
    std::vector<RemovalRecord> removed;
};

/// Drops documents containing any entry point (word-boundary match) or
/// sharing at least one n-gram with the index. An empty index raises
/// ConfigError unless allow_empty_index — skipping decontamination must be
/// an explicit opt-out, never an accident.
DecontaminateResult decontaminate(const std::vector<CodeDocument>& corpus,
                                  const TestCorpusIndex& index, bool allow_empty_index = false,
                                  int workers = 0);

/// JSON-lines removal report {id, reason, evidence}.
std::string removal_report_jsonl(const std::vector<RemovalRecord>& removed);

}  // namespace codesift
