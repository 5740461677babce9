#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "codesift/document.hpp"

namespace codesift {

/// Granularity of a deduplication pass.
///
/// file: each document is a unit. repo: a unit is the concatenation of one
/// repository's files in lexicographic path order (documents with an empty
/// repo field stay singleton units); unit stars/commit_time are the maxima
/// over member files. chunk: units are fixed-token segments of the seeded
/// randomly-concatenated corpus (fuzzy dedup only).
enum class DedupLevel { file, repo, chunk };

DedupLevel dedup_level_from_string(std::string_view s);
std::string_view to_string(DedupLevel level);

/// One duplicate group from a dedup pass.
///
/// representative maximizes (stars, commit_time) lexicographically over
/// members; remaining ties break to the smallest id. members is sorted and
/// includes the representative.
struct DedupGroup {
    std::string representative;
    std::vector<std::string> members;

    bool operator==(const DedupGroup&) const = default;
};

/// Output of one dedup pass.
struct DedupResult {
    std::vector<CodeDocument> retained;  // input order (chunk level: chunk order)
    std::vector<Rejection> dropped;      // reason "exact-dup" or "fuzzy-dup"
    std::vector<DedupGroup> groups;      // multi-member groups only
    std::string level;                   // "file" | "repo" | "chunk"
    std::string kind;                    // "exact" | "fuzzy"
};

/// Parameters for fuzzy (MinHash/LSH) deduplication.
struct FuzzyParams {
    int num_hashes = 2048;
    int num_bands = 16;
    int rows_per_band = 128;
    double threshold = 0.7;  // min signature-agreement fraction to merge
    std::uint64_t seed = 0;
    int chunk_tokens = 4096;  // chunk level only
    int workers = 1;

    /// Throws ConfigError unless num_bands * rows_per_band == num_hashes
    /// and all values are in range.
    void validate() const;
};

/// MinHash signature: per-hash-family minima over a shingle set.
struct MinHashSignature {
    std::vector<std::uint64_t> values;
    std::uint64_t seed = 0;
};

/// Exact deduplication by SHA-256 content digest.
///
/// One representative per equal-digest group is retained (DedupGroup rule);
/// the rest are dropped with reason "exact-dup". Levels: file, repo.
DedupResult exact_dedup(const std::vector<CodeDocument>& docs, DedupLevel level);

/// 5-gram word shingles of the content.
///
/// Tokens are maximal whitespace-separated runs; each shingle is 5
/// consecutive tokens joined by single spaces. Documents with 1-4 tokens
/// yield the single whole-document shingle (all tokens joined); documents
/// with no tokens yield the empty set.
std::set<std::string> shingle(const std::string& content);

/// MinHash signature of a shingle set.
///
/// Hash family member i is x -> a_i*x + b_i (mod 2^64) with odd a_i, applied
/// to a fixed 64-bit base hash of each shingle; (a_i, b_i) are drawn from a
/// splitmix64 stream keyed by `seed`. Throws StageError("empty-document") on
/// an empty shingle set.
MinHashSignature minhash_signature(const std::set<std::string>& shingles, std::uint64_t seed,
                                   int num_hashes = 2048);

/// Fraction of agreeing signature positions (Jaccard estimate).
///
/// Throws StageError("incompatible-signatures") when seeds or lengths differ.
double estimated_jaccard(const MinHashSignature& a, const MinHashSignature& b);

/// LSH candidate pairs: (i, j) with i < j iff some band matches.
///
/// Bands are num_bands contiguous blocks of rows_per_band signature values.
/// Throws StageError("incompatible-signatures") on mixed seeds or lengths.
std::vector<std::pair<std::size_t, std::size_t>> lsh_candidates(
    const std::vector<MinHashSignature>& signatures, int num_bands, int rows_per_band);

/// Fuzzy deduplication via MinHash + LSH + union-find.
///
/// Candidate pairs with estimated Jaccard >= params.threshold are merged;
/// one representative per group is retained, the rest dropped with reason
/// "fuzzy-dup". Documents with empty shingle sets pass through unexamined.
/// Levels: file, repo, chunk.
DedupResult fuzzy_dedup(const std::vector<CodeDocument>& docs, DedupLevel level,
                        const FuzzyParams& params);

/// Segment the corpus into fixed-token chunks.
///
/// Documents are ordered by a seeded hash of their ids, their whitespace
/// tokens concatenated, and the stream cut every chunk_tokens tokens; every
/// chunk except possibly the last has exactly chunk_tokens tokens. Chunks are
/// synthetic documents with ids "chunk-<index>".
std::vector<CodeDocument> chunk_corpus(const std::vector<CodeDocument>& docs, int chunk_tokens,
                                       std::uint64_t seed);

/// One row of the strategy-comparison funnel.
struct StrategyRow {
    std::string strategy;
    std::uint64_t rows_in = 0;
    std::uint64_t rows_out = 0;
    std::uint64_t tokens_out = 0;

    bool operator==(const StrategyRow&) const = default;
};

/// Run the six dedup strategies and report the funnel.
///
/// Strategies: file, repo, chunk, repo+chunk, file+chunk, repo-then-file.
/// Each named level runs exact then fuzzy dedup; "+chunk" re-chunks the
/// survivors and dedups the chunks; rows_out counts the final stage's output
/// units and tokens_out their whitespace tokens.
std::vector<StrategyRow> compare_strategies(const std::vector<CodeDocument>& docs,
                                            const FuzzyParams& params);

/// Fixed-column text table for a strategy report.
std::string format_strategy_table(const std::vector<StrategyRow>& rows);

/// JSON-lines group report: {representative_id, member_ids, level, kind}.
std::string group_report_jsonl(const DedupResult& result);

}  // namespace codesift
