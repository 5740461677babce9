#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "codesift/dedup.hpp"
#include "codesift/document.hpp"
#include "codesift/report.hpp"

namespace codesift {

/// One configured stage. Only the fields for the named stage are
/// meaningful; the config parser rejects keys that do not belong to the
/// stage they appear under.
struct StageConfig {
    std::string stage;  // preprocess | exact-dedup | fuzzy-dedup | transform | filter | sample

    DedupLevel level = DedupLevel::file;        // exact-dedup, fuzzy-dedup
    FuzzyParams fuzzy;                          // fuzzy-dedup (seed/workers set at run time)
    bool strip_copyright = true;                // transform
    bool redact_pii = true;                     // transform
    std::string language;                       // sample
    std::optional<double> keep_ratio;           // sample: exactly one of these two
    std::optional<std::uint64_t> target_bytes;  // sample
};

/// Full pipeline configuration, loaded from a JSON file with strict keys:
/// anything unrecognized is a ConfigError naming the offending key.
struct PipelineConfig {
    std::string input;  // directory tree, record dump, or document JSONL
    std::string output_dir;
    std::uint64_t seed = 0;
    int workers = 0;      // 0 = hardware default; CODESIFT_WORKERS overrides
    bool resume = false;  // reuse matching checkpoints from a previous run
    std::string estimator = "whitespace";
    std::string rules_file;      // empty = shipped data/rules.json
    std::string redaction_file;  // empty = shipped data/redaction.json
    std::string languages_file;  // empty = shipped data/languages.json
    std::vector<StageConfig> stages;

    static PipelineConfig load(const std::string& path);
    static PipelineConfig parse(const std::string& json_text, const std::string& origin);

    /// Stage names must be known and in dependency order (preprocess <
    /// exact-dedup < fuzzy-dedup < transform < filter < sample, each at
    /// most once); per-stage parameters must be coherent. ConfigError
    /// otherwise.
    void validate() const;

    /// Content digest of everything that determines outputs (the resume
    /// flag itself is excluded). Used to refuse resuming with a changed
    /// config.
    std::string canonical_digest() const;
};

struct RunResult {
    int exit_code = 0;          // 0 success, 1 stage failure
    PipelineManifest manifest;  // stages completed (possibly partial on failure)
    std::string corpus_path;    // written on success
    std::string manifest_path;  // written on success
    std::string error;          // failure description, empty on success
};

/// Executes the configured stages in order. Each completed stage writes a
/// checkpoint (corpus + stage entry) under <output_dir>/checkpoints; with
/// resume enabled, checkpoints from an identical config are loaded instead
/// of recomputed, so a resumed run reproduces the uninterrupted manifest.
/// On a stage failure the partial manifest and error are quarantined under
/// <output_dir>/failed and the exit code is 1. Identical
/// (config, seed, input) produce byte-identical outputs regardless of
/// worker count.
RunResult run_pipeline(const PipelineConfig& config);

}  // namespace codesift
