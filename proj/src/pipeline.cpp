#include "codesift/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codesift/curate.hpp"
#include "codesift/hashing.hpp"
#include "codesift/ingest.hpp"
#include "codesift/parallel.hpp"
#include "codesift/quality.hpp"
#include "codesift/registry.hpp"
#include "codesift/transform.hpp"

namespace codesift {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::map<std::string, int>& stage_ranks() {
    static const std::map<std::string, int> kRanks = {
        {"preprocess", 0}, {"exact-dedup", 1}, {"fuzzy-dedup", 2},
        {"transform", 3},  {"filter", 4},      {"sample", 5},
    };
    return kRanks;
}

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (allowed.count(key) == 0)
            throw ConfigError("pipeline: unknown key '" + key + "' in " + where);
}

StageConfig parse_stage(const json& obj, const std::string& origin) {
    if (!obj.is_object() || !obj.contains("stage"))
        throw ConfigError("pipeline: every stage entry needs a 'stage' name (" + origin + ")");
    StageConfig stage;
    stage.stage = obj.at("stage").get<std::string>();
    const std::string where = "stage '" + stage.stage + "' (" + origin + ")";

    if (stage.stage == "preprocess") {
        require_keys(obj, {"stage"}, where);
    } else if (stage.stage == "exact-dedup") {
        require_keys(obj, {"stage", "level"}, where);
        if (obj.contains("level"))
            stage.level = dedup_level_from_string(obj.at("level").get<std::string>());
    } else if (stage.stage == "fuzzy-dedup") {
        require_keys(obj,
                     {"stage", "level", "num_hashes", "num_bands", "rows_per_band", "threshold",
                      "chunk_tokens"},
                     where);
        if (obj.contains("level"))
            stage.level = dedup_level_from_string(obj.at("level").get<std::string>());
        if (obj.contains("num_hashes")) stage.fuzzy.num_hashes = obj.at("num_hashes").get<int>();
        if (obj.contains("num_bands")) stage.fuzzy.num_bands = obj.at("num_bands").get<int>();
        if (obj.contains("rows_per_band"))
            stage.fuzzy.rows_per_band = obj.at("rows_per_band").get<int>();
        else if (obj.contains("num_hashes") || obj.contains("num_bands"))
            stage.fuzzy.rows_per_band =
                stage.fuzzy.num_bands > 0 ? stage.fuzzy.num_hashes / stage.fuzzy.num_bands : 0;
        if (obj.contains("threshold")) stage.fuzzy.threshold = obj.at("threshold").get<double>();
        if (obj.contains("chunk_tokens"))
            stage.fuzzy.chunk_tokens = obj.at("chunk_tokens").get<int>();
    } else if (stage.stage == "transform") {
        require_keys(obj, {"stage", "strip_copyright", "redact_pii"}, where);
        stage.strip_copyright = obj.value("strip_copyright", true);
        stage.redact_pii = obj.value("redact_pii", true);
    } else if (stage.stage == "filter") {
        require_keys(obj, {"stage"}, where);
    } else if (stage.stage == "sample") {
        require_keys(obj, {"stage", "language", "keep_ratio", "target_bytes"}, where);
        stage.language = obj.value("language", std::string());
        if (obj.contains("keep_ratio")) stage.keep_ratio = obj.at("keep_ratio").get<double>();
        if (obj.contains("target_bytes"))
            stage.target_bytes = obj.at("target_bytes").get<std::uint64_t>();
    } else {
        throw ConfigError("pipeline: unknown stage '" + stage.stage + "' (" + origin + ")");
    }
    return stage;
}

}  // namespace

PipelineConfig PipelineConfig::parse(const std::string& json_text, const std::string& origin) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        throw ConfigError("pipeline: " + origin + " is not a JSON object");
    require_keys(root,
                 {"input", "output_dir", "seed", "workers", "resume", "estimator", "rules_file",
                  "redaction_file", "languages_file", "stages"},
                 origin);
    PipelineConfig config;
    try {
        config.input = root.value("input", std::string());
        config.output_dir = root.value("output_dir", std::string());
        config.seed = root.value("seed", std::uint64_t{0});
        config.workers = root.value("workers", 0);
        config.resume = root.value("resume", false);
        config.estimator = root.value("estimator", std::string("whitespace"));
        config.rules_file = root.value("rules_file", std::string());
        config.redaction_file = root.value("redaction_file", std::string());
        config.languages_file = root.value("languages_file", std::string());
        for (const auto& entry : root.value("stages", json::array()))
            config.stages.push_back(parse_stage(entry, origin));
    } catch (const json::exception& e) {
        throw ConfigError("pipeline: malformed config " + origin + ": " + e.what());
    }
    config.validate();
    return config;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("pipeline: cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

void PipelineConfig::validate() const {
    if (input.empty()) throw ConfigError("pipeline: config needs an input path");
    if (output_dir.empty()) throw ConfigError("pipeline: config needs an output_dir");
    if (stages.empty()) throw ConfigError("pipeline: config needs at least one stage");
    (void)estimator_from_string(estimator);
    if (workers < 0) throw ConfigError("pipeline: workers must be >= 0");

    int last_rank = -1;
    for (const auto& stage : stages) {
        const int rank = stage_ranks().at(stage.stage);  // names checked at parse
        if (rank <= last_rank)
            throw ConfigError("pipeline: stage '" + stage.stage +
                              "' violates the dependency order (preprocess < exact-dedup < "
                              "fuzzy-dedup < transform < filter < sample, each at most once)");
        last_rank = rank;

        if (stage.stage == "exact-dedup" && stage.level == DedupLevel::chunk)
            throw ConfigError("pipeline: exact-dedup supports levels file and repo only");
        if (stage.stage == "fuzzy-dedup") {
            FuzzyParams params = stage.fuzzy;
            params.workers = 1;  // placeholder; real value set at run time
            params.validate();
        }
        if (stage.stage == "sample") {
            if (stage.language.empty())
                throw ConfigError("pipeline: sample stage needs a language");
            if (stage.keep_ratio.has_value() == stage.target_bytes.has_value())
                throw ConfigError(
                    "pipeline: sample stage needs exactly one of keep_ratio, target_bytes");
            if (stage.keep_ratio && (!(*stage.keep_ratio > 0.0) || *stage.keep_ratio > 1.0))
                throw ConfigError("pipeline: sample keep_ratio must be in (0, 1]");
        }
    }
}

std::string PipelineConfig::canonical_digest() const {
    json root;
    root["input"] = input;
    root["output_dir"] = output_dir;
    root["seed"] = seed;
    root["estimator"] = estimator;
    root["rules_file"] = rules_file;
    root["redaction_file"] = redaction_file;
    root["languages_file"] = languages_file;
    root["stages"] = json::array();
    for (const auto& stage : stages) {
        json entry;
        entry["stage"] = stage.stage;
        entry["level"] = std::string(to_string(stage.level));
        entry["num_hashes"] = stage.fuzzy.num_hashes;
        entry["num_bands"] = stage.fuzzy.num_bands;
        entry["rows_per_band"] = stage.fuzzy.rows_per_band;
        entry["threshold"] = stage.fuzzy.threshold;
        entry["chunk_tokens"] = stage.fuzzy.chunk_tokens;
        entry["strip_copyright"] = stage.strip_copyright;
        entry["redact_pii"] = stage.redact_pii;
        entry["language"] = stage.language;
        entry["keep_ratio"] = stage.keep_ratio ? json(*stage.keep_ratio) : json();
        entry["target_bytes"] = stage.target_bytes ? json(*stage.target_bytes) : json();
        root["stages"].push_back(std::move(entry));
    }
    // Worker count deliberately excluded: results are contract-equal for
    // any worker count, so it must not invalidate checkpoints.
    return to_hex(sha256(root.dump()));
}

namespace {

// ---------------------------------------------------------------------------
// Stage execution
// ---------------------------------------------------------------------------

struct StageOutcome {
    std::vector<CodeDocument> docs;
    std::vector<Rejection> rejected;
    std::size_t docs_in = 0;
};

StageOutcome run_preprocess(const PipelineConfig& config, const LanguageRegistry& registry) {
    const ScanResult scan = scan_source(config.input);
    StageOutcome outcome;
    outcome.docs_in = scan.records.size() + scan.skipped.size();
    for (const auto& skip : scan.skipped) outcome.rejected.push_back({skip.path, skip.reason});

    std::vector<PreprocessResult> results(scan.records.size());
    parallel_for(scan.records.size(), resolve_workers(config.workers),
                 [&](std::size_t i) { results[i] = preprocess(scan.records[i], registry); });
    for (std::size_t i = 0; i < scan.records.size(); ++i) {
        auto& result = results[i];
        if (!result.doc) {
            outcome.rejected.push_back({scan.records[i].id, result.reason});
            continue;
        }
        // Text recall in the batch pipeline is filename-based only:
        // category-text documents survive through the keep-list, no scorer.
        if (result.doc->category == Category::text && !recall_text_file(*result.doc)) {
            outcome.rejected.push_back({result.doc->id, "text-recall"});
            continue;
        }
        outcome.docs.push_back(std::move(*result.doc));
    }
    return outcome;
}

StageOutcome run_transform(const PipelineConfig& config, const StageConfig& stage,
                           std::vector<CodeDocument> current, const RedactionCatalog* catalog) {
    StageOutcome outcome;
    outcome.docs_in = current.size();
    parallel_for(current.size(), resolve_workers(config.workers), [&](std::size_t i) {
        CodeDocument doc = std::move(current[i]);
        if (stage.strip_copyright) doc = strip_copyright(doc);
        if (stage.redact_pii && catalog != nullptr) doc = redact_pii(doc, *catalog).doc;
        current[i] = std::move(doc);
    });
    outcome.docs = std::move(current);
    return outcome;
}

StageOutcome run_filter(const PipelineConfig& config, std::vector<CodeDocument> current,
                        const RuleRegistry& rules, const fs::path& out_dir) {
    StageOutcome outcome;
    outcome.docs_in = current.size();
    QualityResult result = filter_corpus(current, rules, config.workers);
    for (const auto& verdict : result.verdicts)
        for (const auto& reason : verdict.reasons) outcome.rejected.push_back({verdict.id, reason});
    std::ofstream sidecar(out_dir / "verdicts.jsonl", std::ios::binary | std::ios::trunc);
    if (!sidecar) throw StageError("pipeline: cannot write verdict sidecar");
    sidecar << verdict_jsonl(result.verdicts);
    outcome.docs = std::move(result.kept);
    return outcome;
}

StageOutcome run_sample(const PipelineConfig& config, const StageConfig& stage,
                        std::vector<CodeDocument> current) {
    StageOutcome outcome;
    outcome.docs_in = current.size();
    const double ratio = stage.keep_ratio
                             ? *stage.keep_ratio
                             : keep_ratio_for_budget(current, stage.language, *stage.target_bytes);
    outcome.docs = downsample_language(current, stage.language, ratio, config.seed);
    std::set<std::string> kept_ids;
    for (const auto& doc : outcome.docs) kept_ids.insert(doc.id);
    for (const auto& doc : current)
        if (kept_ids.count(doc.id) == 0) outcome.rejected.push_back({doc.id, "sampled-out"});
    return outcome;
}

StageOutcome run_dedup(const PipelineConfig& config, const StageConfig& stage,
                       std::vector<CodeDocument> current, const fs::path& out_dir) {
    StageOutcome outcome;
    outcome.docs_in = current.size();
    DedupResult result;
    if (stage.stage == "exact-dedup") {
        result = exact_dedup(current, stage.level);
    } else {
        FuzzyParams params = stage.fuzzy;
        params.seed = config.seed;
        params.workers = resolve_workers(config.workers);
        params.validate();
        result = fuzzy_dedup(current, stage.level, params);
    }
    std::ofstream sidecar(out_dir / ("groups-" + result.kind + ".jsonl"),
                          std::ios::binary | std::ios::trunc);
    if (!sidecar) throw StageError("pipeline: cannot write group sidecar");
    sidecar << group_report_jsonl(result);
    outcome.docs = std::move(result.retained);
    outcome.rejected = std::move(result.dropped);
    return outcome;
}

// Checkpoint meta files piggyback on the manifest JSON codec by wrapping a
// single stage entry.
void write_stage_meta(const fs::path& path, const PipelineConfig& config, const StageEntry& entry) {
    PipelineManifest wrapper;
    wrapper.estimator = config.estimator;
    wrapper.seed = config.seed;
    wrapper.stages.push_back(entry);
    save_manifest(path.string(), wrapper);
}

std::optional<StageEntry> read_stage_meta(const fs::path& path) {
    if (!fs::exists(path)) return std::nullopt;
    const PipelineManifest wrapper = load_manifest(path.string());
    if (wrapper.stages.size() != 1) return std::nullopt;
    return wrapper.stages.front();
}

}  // namespace

RunResult run_pipeline(const PipelineConfig& config) {
    config.validate();

    const fs::path out_dir = config.output_dir;
    const fs::path checkpoint_dir = out_dir / "checkpoints";
    std::error_code ec;
    fs::create_directories(checkpoint_dir, ec);
    if (ec) throw StageError("pipeline: cannot create output dir " + out_dir.string());

    // Refuse to resume against checkpoints from a different configuration.
    const std::string digest = config.canonical_digest();
    const fs::path digest_file = checkpoint_dir / "config.sha256";
    if (config.resume && fs::exists(digest_file)) {
        std::ifstream in(digest_file);
        std::string previous;
        in >> previous;
        if (previous != digest)
            throw ConfigError(
                "pipeline: checkpoints were written by a different config; "
                "clear " +
                checkpoint_dir.string() + " or disable resume");
    }
    {
        std::ofstream out(digest_file, std::ios::trunc);
        out << digest << '\n';
    }

    const LanguageRegistry owned_registry = config.languages_file.empty()
                                                ? LanguageRegistry()
                                                : LanguageRegistry::load(config.languages_file);
    const LanguageRegistry& registry =
        config.languages_file.empty() ? LanguageRegistry::builtin() : owned_registry;

    bool needs_rules = false, needs_catalog = false;
    for (const auto& stage : config.stages) {
        if (stage.stage == "filter") needs_rules = true;
        if (stage.stage == "transform" && stage.redact_pii) needs_catalog = true;
    }
    std::optional<RuleRegistry> owned_rules;
    const RuleRegistry* rules = nullptr;
    if (needs_rules) {
        if (config.rules_file.empty()) {
            rules = &RuleRegistry::builtin();
        } else {
            owned_rules = RuleRegistry::load(config.rules_file);
            rules = &*owned_rules;
        }
    }
    std::optional<RedactionCatalog> owned_catalog;
    const RedactionCatalog* catalog = nullptr;
    if (needs_catalog) {
        if (config.redaction_file.empty()) {
            catalog = &RedactionCatalog::builtin();
        } else {
            owned_catalog = RedactionCatalog::load(config.redaction_file);
            catalog = &*owned_catalog;
        }
    }

    RunResult result;
    result.manifest.estimator = config.estimator;
    result.manifest.seed = config.seed;
    const TokenEstimator estimator = estimator_from_string(config.estimator);

    std::vector<CodeDocument> current;
    bool have_corpus = false;
    std::string failed_stage;

    try {
        for (std::size_t k = 0; k < config.stages.size(); ++k) {
            const StageConfig& stage = config.stages[k];
            failed_stage = stage.stage;
            char prefix[8];
            std::snprintf(prefix, sizeof prefix, "%02zu-", k);
            const fs::path checkpoint = checkpoint_dir / (prefix + stage.stage + ".jsonl");
            const fs::path meta = checkpoint_dir / (prefix + stage.stage + ".meta.json");

            if (config.resume && fs::exists(checkpoint)) {
                if (auto entry = read_stage_meta(meta)) {
                    current = read_document_file(checkpoint.string());
                    have_corpus = true;
                    result.manifest.stages.push_back(std::move(*entry));
                    continue;
                }
            }

            // A non-preprocess first stage consumes an already-preprocessed
            // document file.
            if (!have_corpus && stage.stage != "preprocess") {
                current = read_document_file(config.input);
                have_corpus = true;
            }

            StageOutcome outcome;
            if (stage.stage == "preprocess")
                outcome = run_preprocess(config, registry);
            else if (stage.stage == "exact-dedup" || stage.stage == "fuzzy-dedup")
                outcome = run_dedup(config, stage, std::move(current), out_dir);
            else if (stage.stage == "transform")
                outcome = run_transform(config, stage, std::move(current), catalog);
            else if (stage.stage == "filter")
                outcome = run_filter(config, std::move(current), *rules, out_dir);
            else
                outcome = run_sample(config, stage, std::move(current));

            current = std::move(outcome.docs);
            have_corpus = true;
            StageEntry entry = make_stage_entry(stage.stage, outcome.docs_in, current,
                                                outcome.rejected, estimator);
            write_document_file(checkpoint.string(), current);
            write_stage_meta(meta, config, entry);
            result.manifest.stages.push_back(std::move(entry));
        }

        result.manifest.validate();
        const fs::path corpus_path = out_dir / "corpus.jsonl";
        const fs::path manifest_path = out_dir / "manifest.json";
        write_document_file(corpus_path.string(), current);
        save_manifest(manifest_path.string(), result.manifest);
        result.corpus_path = corpus_path.string();
        result.manifest_path = manifest_path.string();
        result.exit_code = 0;
    } catch (const StageError& e) {
        // Quarantine: the partial manifest and the error land under
        // failed/, and no top-level corpus/manifest is written.
        const fs::path failed_dir = out_dir / "failed";
        fs::create_directories(failed_dir, ec);
        std::ofstream err(failed_dir / "error.txt", std::ios::trunc);
        err << "stage: " << failed_stage << '\n' << e.what() << '\n';
        save_manifest((failed_dir / "manifest-partial.json").string(), result.manifest);
        result.exit_code = 1;
        result.error = e.what();
    }
    return result;
}

}  // namespace codesift
