#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codesift/document.hpp"

namespace codesift {

// ---------------------------------------------------------------------------
// Byte-level BPE
// ---------------------------------------------------------------------------

/// Byte-level BPE model: the base alphabet is all 256 single bytes, so the
/// vocabulary is 256 + merges.size(). Text is pre-split into pieces
/// (alternating maximal non-whitespace and whitespace runs); merges never
/// cross piece boundaries, and decode is plain concatenation, so
/// decode(encode(text)) == text for any input.
struct BpeModel {
    std::vector<std::pair<std::string, std::string>> merges;  // applied in order

    std::size_t vocab_size() const { return 256 + merges.size(); }

    /// Applies the merge list to `text`. Deterministic; encoding is a
    /// canonical form (re-encoding a decoded token stream is a no-op).
    std::vector<std::string> encode(const std::string& text) const;

    /// Concatenation of the tokens.
    static std::string decode(const std::vector<std::string>& tokens);

    bool operator==(const BpeModel&) const = default;
};

/// Greedy BPE training: repeatedly merge the highest-frequency adjacent
/// symbol pair (piece-frequency weighted, overlapping pairs counted per
/// position); ties break to the lexicographically smallest pair. Stops at
/// vocab_size or when no adjacent pairs remain, whichever is first.
/// vocab_size below the 256-byte base alphabet raises ConfigError.
BpeModel train_bpe(const std::vector<std::string>& corpus, std::size_t vocab_size);

// ---------------------------------------------------------------------------
// Classifier
// ---------------------------------------------------------------------------

/// One labeled training text (true = positive / code-related).
struct SeedExample {
    std::string text;
    bool label = false;

    bool operator==(const SeedExample&) const = default;
};

struct RecallModelConfig {
    std::size_t dim = 64;            // embedding dimension d
    std::size_t buckets = 1u << 20;  // hashed n-gram bucket count B
    int max_ngram = 2;               // 1..max_ngram token grams
    int epochs = 5;
    double lr = 0.1;                // linear decay to 0 by global step
    std::size_t bpe_vocab = 8192;   // BPE vocabulary trained on the seeds
    std::uint64_t seed = 0;         // embedding init
    double holdout_fraction = 0.1;  // held-out slice for reported accuracy
    double threshold = 0.5;         // decision threshold in (0,1)

    void validate() const;  // ConfigError on nonsensical values
};

/// Linear classifier over averaged hashed n-gram embeddings (the fastText
/// architecture): hidden = mean of embedding rows for the text's 1..k-gram
/// buckets, score = sigmoid(w . hidden + b). A text with no tokens scores
/// exactly 0.5. Inference is deterministic.
struct RecallModel {
    RecallModelConfig config;
    BpeModel bpe;
    std::vector<float> embeddings;  // buckets x dim, row-major
    std::vector<float> output;      // dim
    float bias = 0.0f;
    double held_out_accuracy = 0.0;

    double score(const std::string& text) const;

    /// Versioned little-endian binary with the full config (including the
    /// training seed) embedded. load raises ConfigError on a bad magic,
    /// unsupported version or truncated file.
    void save(const std::string& path) const;
    static RecallModel load(const std::string& path);
};

/// Logistic-loss SGD over the seeds in input order (no shuffling), learning
/// rate decayed linearly by global step across all epochs. The visit order
/// makes training reproducible and makes a duplicated training set with
/// halved epochs produce the identical model. Every `k`-th example
/// (k from holdout_fraction) is held out for the reported accuracy; when
/// the held-out slice is empty the training slice is scored instead.
/// Raises StageError "degenerate-labels" unless both labels are present.
RecallModel train_classifier(const std::vector<SeedExample>& seeds,
                             const RecallModelConfig& config);

// ---------------------------------------------------------------------------
// Web pages and recall
// ---------------------------------------------------------------------------

/// JSON-lines record {url, content}.
struct WebPage {
    std::string url;
    std::string content;

    bool operator==(const WebPage&) const = default;
};

std::vector<WebPage> read_web_pages(const std::string& path);
void write_web_pages(const std::string& path, const std::vector<WebPage>& pages);

struct RecallOutput {
    std::vector<WebPage> recalled;   // input order, score >= threshold
    std::vector<std::string> notes;  // skipped pages (empty content)
};

/// Scores every page in parallel and keeps those at or above threshold.
/// Pages without content are skipped with a note, never scored.
RecallOutput recall_pages(const RecallModel& model, const std::vector<WebPage>& corpus,
                          double threshold, int workers = 0);

// ---------------------------------------------------------------------------
// Domain discovery
// ---------------------------------------------------------------------------

struct DomainStat {
    std::string domain;
    std::size_t pages = 0;
    std::size_t code_pages = 0;
    double code_fraction = 0.0;
    bool flagged = false;  // code_fraction > 0.10, strict

    bool operator==(const DomainStat&) const = default;
};

/// Scheme-stripped registrable host of a URL ("https://my.oschina.net/u/4"
/// -> "oschina.net"). Uses an embedded list of common two-level public
/// suffixes; IPv4 hosts are kept whole. Malformed URLs map to
/// "invalid-url".
std::string base_url(const std::string& url);

/// Groups recalled pages by base URL and joins them with caller-supplied
/// per-domain page totals (domains are emitted for every key in either
/// input). pages is clamped up to code_pages when the totals undercount.
std::vector<DomainStat> discover_domains(const std::vector<WebPage>& recalled,
                                         const std::map<std::string, std::size_t>& totals);

// ---------------------------------------------------------------------------
// URL-pattern annotation
// ---------------------------------------------------------------------------

/// One wildcard pattern ('%' matches any substring, otherwise anchored)
/// with its tag ("Code" / "Math" in the shipped asset).
struct UrlPattern {
    std::string pattern;
    std::string tag;

    bool operator==(const UrlPattern&) const = default;
};

/// SQL-LIKE-style match: '%' spans any substring; text before the first /
/// after the last '%' must match at the start / end.
bool url_matches(const std::string& url, const std::string& pattern);

/// Loads "pattern tag" lines ('#' comments and blanks skipped). A pattern
/// with no literal characters or a line without a tag raises ConfigError.
std::vector<UrlPattern> load_url_patterns(const std::string& path);
const std::vector<UrlPattern>& builtin_url_patterns();  // data/url_patterns.txt

std::vector<UrlPattern> patterns_with_tag(const std::vector<UrlPattern>& patterns,
                                          const std::string& tag);

/// The misclassification-recovery step: pages matching any pattern whose
/// classifier score fell below the threshold, i.e. positives the model
/// missed that should join the seed corpus.
std::vector<WebPage> annotate_urls(const std::vector<WebPage>& pages,
                                   const std::vector<UrlPattern>& patterns,
                                   const RecallModel& model, double threshold);

// ---------------------------------------------------------------------------
// Iteration
// ---------------------------------------------------------------------------

struct RoundStats {
    int round = 0;              // 1-based
    std::size_t seed_size = 0;  // seeds used for this round's training
    std::size_t recalled = 0;
    std::size_t added_seeds = 0;  // new pattern-recovered seeds this round
    double held_out_accuracy = 0.0;

    bool operator==(const RoundStats&) const = default;
};

struct IterateResult {
    std::vector<WebPage> recalled;   // final round's recall
    std::vector<SeedExample> seeds;  // final (augmented) seed corpus
    std::vector<RoundStats> rounds;
    std::vector<std::string> notes;  // early stop, skipped pages
};

/// Runs `rounds` cycles of train -> recall -> discover -> annotate ->
/// augment. Each round trains with config.seed + round_index so rounds are
/// independent but reproducible. The seed corpus only ever grows; a page
/// is added at most once (tracked by url). A round that adds zero new
/// seeds ends the loop early with a note. rounds < 1 raises ConfigError.
IterateResult iterate(std::vector<SeedExample> seeds, const std::vector<WebPage>& corpus,
                      int rounds, const RecallModelConfig& config,
                      const std::vector<UrlPattern>& patterns, double threshold, int workers = 0);

}  // namespace codesift
