#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "codesift/document.hpp"

namespace codesift {

// ---------------------------------------------------------------------------
// Token estimation
// ---------------------------------------------------------------------------

/// Pluggable token estimators. Counts are estimates, not tokenizer truth;
/// every manifest records which estimator produced its numbers so they are
/// never mistaken for comparable figures from a real tokenizer.
enum class TokenEstimator { whitespace, bytes4 };

std::string_view to_string(TokenEstimator estimator);
TokenEstimator estimator_from_string(std::string_view name);  // ConfigError on unknown

std::size_t estimate_tokens(const CodeDocument& doc,
                            TokenEstimator estimator = TokenEstimator::whitespace);
std::size_t estimate_tokens(const std::vector<CodeDocument>& corpus,
                            TokenEstimator estimator = TokenEstimator::whitespace);

// ---------------------------------------------------------------------------
// Pipeline manifest
// ---------------------------------------------------------------------------

struct StageEntry {
    std::string stage;
    std::size_t docs_in = 0;
    std::size_t docs_out = 0;
    std::size_t bytes_out = 0;
    std::size_t est_tokens_out = 0;
    std::map<std::string, std::size_t> per_language;      // docs by language, post-stage
    std::map<std::string, std::size_t> reason_histogram;  // rejection reason -> count

    bool operator==(const StageEntry&) const = default;
};

/// Ordered record of what every stage did. Contains no wall-clock data, so
/// two identical runs produce byte-identical manifests.
struct PipelineManifest {
    std::string estimator = "whitespace";  // TokenEstimator id for all counts
    std::uint64_t seed = 0;
    std::vector<StageEntry> stages;

    /// docs_out <= docs_in per stage and stage k+1 consumes exactly what
    /// stage k produced. ConfigError on breach.
    void validate() const;

    bool operator==(const PipelineManifest&) const = default;
};

/// Aggregates a stage's output corpus and rejections into a StageEntry.
StageEntry make_stage_entry(const std::string& stage, std::size_t docs_in,
                            const std::vector<CodeDocument>& output,
                            const std::vector<Rejection>& rejected,
                            TokenEstimator estimator = TokenEstimator::whitespace);

/// Manifest persisted as a single JSON document.
std::string manifest_to_json(const PipelineManifest& manifest);
PipelineManifest manifest_from_json(const std::string& text);  // validates
void save_manifest(const std::string& path, const PipelineManifest& manifest);
PipelineManifest load_manifest(const std::string& path);

// ---------------------------------------------------------------------------
// Composition table
// ---------------------------------------------------------------------------

struct CompositionRow {
    std::string language;
    std::size_t files = 0;
    std::size_t bytes = 0;
    std::size_t est_tokens = 0;
    double ratio = 0.0;  // byte share of the corpus

    bool operator==(const CompositionRow&) const = default;
};

/// Per-language aggregation sorted by descending byte volume (ties by
/// name). Ratios are byte shares and sum to 1 within 1e-9 on a non-empty
/// corpus. Permutation-invariant in the input order.
std::vector<CompositionRow> composition_table(
    const std::vector<CodeDocument>& corpus, TokenEstimator estimator = TokenEstimator::whitespace);

std::string format_composition_table(const std::vector<CompositionRow>& rows);
std::string composition_csv(const std::vector<CompositionRow>& rows);

// ---------------------------------------------------------------------------
// Funnel report
// ---------------------------------------------------------------------------

/// Stage-by-stage retention with per-stage and cumulative percentages.
/// Validates the manifest first (ConfigError on inconsistent chaining).
std::string funnel_report(const PipelineManifest& manifest);
std::string funnel_csv(const PipelineManifest& manifest);

}  // namespace codesift
