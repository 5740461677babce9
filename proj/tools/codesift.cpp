// codesift — batch CLI for the corpus-curation pipeline.
//
// Subcommands: run, dedup-compare, recall, curate, report. Exit codes:
// 0 success, 1 stage failure, 2 usage or configuration error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "codesift/curate.hpp"
#include "codesift/dedup.hpp"
#include "codesift/document.hpp"
#include "codesift/parallel.hpp"
#include "codesift/pipeline.hpp"
#include "codesift/quality.hpp"
#include "codesift/recall.hpp"
#include "codesift/report.hpp"

namespace {

using codesift::ConfigError;
using codesift::StageError;
using nlohmann::json;

json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded()) throw ConfigError(path + " is not valid JSON");
    return root;
}

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (allowed.count(key) == 0) throw ConfigError("unknown key '" + key + "' in " + where);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("cannot write " + path);
    out << text;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

struct RunArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = -1;
    bool resume = false;
};

int cmd_run(const RunArgs& args) {
    codesift::PipelineConfig config = codesift::PipelineConfig::load(args.config_path);
    if (args.seed_set) config.seed = args.seed;
    if (args.workers >= 0) config.workers = args.workers;
    if (args.resume) config.resume = true;
    config.validate();

    const codesift::RunResult result = codesift::run_pipeline(config);
    if (result.exit_code != 0) {
        std::cerr << "run failed: " << result.error << '\n';
        std::cerr << "partial outputs quarantined under " << config.output_dir << "/failed\n";
        return result.exit_code;
    }
    std::cout << codesift::funnel_report(result.manifest);
    std::cout << "corpus:   " << result.corpus_path << '\n';
    std::cout << "manifest: " << result.manifest_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// dedup-compare
// ---------------------------------------------------------------------------

struct DedupCompareArgs {
    std::string input;
    std::string output;
    std::uint64_t seed = 0;
    int workers = 0;
    int num_hashes = 2048;
    int num_bands = 16;
    double threshold = 0.7;
    int chunk_tokens = 4096;
};

int cmd_dedup_compare(const DedupCompareArgs& args) {
    const auto docs = codesift::read_document_file(args.input);
    codesift::FuzzyParams params;
    params.num_hashes = args.num_hashes;
    params.num_bands = args.num_bands;
    params.rows_per_band = args.num_bands > 0 ? args.num_hashes / args.num_bands : 0;
    params.threshold = args.threshold;
    params.chunk_tokens = args.chunk_tokens;
    params.seed = args.seed;
    params.workers = codesift::resolve_workers(args.workers);
    params.validate();

    const std::string table =
        codesift::format_strategy_table(codesift::compare_strategies(docs, params));
    std::cout << table;
    if (!args.output.empty()) write_text(args.output, table);
    return 0;
}

// ---------------------------------------------------------------------------
// recall
// ---------------------------------------------------------------------------

struct RecallArgs {
    std::string input;
    std::string seeds;
    std::string output;
    std::string config;
    std::string patterns;
    int rounds = 3;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    double threshold = 0.5;
    bool threshold_set = false;
};

std::vector<codesift::SeedExample> load_seed_examples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("cannot open seed file " + path);
    std::vector<codesift::SeedExample> seeds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("text") ||
            !obj.contains("label"))
            throw ConfigError("seed file " + path + ":" + std::to_string(lineno) +
                              " needs {text, label}");
        seeds.push_back({obj["text"].get<std::string>(), obj["label"].get<bool>()});
    }
    return seeds;
}

codesift::RecallModelConfig load_recall_config(const std::string& path) {
    codesift::RecallModelConfig config;
    if (path.empty()) return config;
    const json root = parse_json_file(path);
    if (!root.is_object()) throw ConfigError(path + " must be a JSON object");
    require_keys(root,
                 {"dim", "buckets", "max_ngram", "epochs", "lr", "bpe_vocab", "seed",
                  "holdout_fraction", "threshold"},
                 path);
    config.dim = root.value("dim", config.dim);
    config.buckets = root.value("buckets", config.buckets);
    config.max_ngram = root.value("max_ngram", config.max_ngram);
    config.epochs = root.value("epochs", config.epochs);
    config.lr = root.value("lr", config.lr);
    config.bpe_vocab = root.value("bpe_vocab", config.bpe_vocab);
    config.seed = root.value("seed", config.seed);
    config.holdout_fraction = root.value("holdout_fraction", config.holdout_fraction);
    config.threshold = root.value("threshold", config.threshold);
    return config;
}

int cmd_recall(const RecallArgs& args) {
    auto seeds = load_seed_examples(args.seeds);
    const auto corpus = codesift::read_web_pages(args.input);
    codesift::RecallModelConfig config = load_recall_config(args.config);
    if (args.seed_set) config.seed = args.seed;
    const double threshold = args.threshold_set ? args.threshold : config.threshold;

    const auto patterns = args.patterns.empty() ? codesift::patterns_with_tag(
                                                      codesift::builtin_url_patterns(), "Code")
                                                : codesift::load_url_patterns(args.patterns);

    const codesift::IterateResult result = codesift::iterate(
        std::move(seeds), corpus, args.rounds, config, patterns, threshold, args.workers);

    for (const auto& round : result.rounds)
        std::cout << "round " << round.round << ": seeds=" << round.seed_size
                  << " recalled=" << round.recalled << " added=" << round.added_seeds
                  << " holdout_acc=" << round.held_out_accuracy << '\n';
    for (const auto& note : result.notes) std::cout << "note: " << note << '\n';
    codesift::write_web_pages(args.output, result.recalled);
    std::cout << "recalled " << result.recalled.size() << " pages -> " << args.output << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// curate
// ---------------------------------------------------------------------------

struct CurateArgs {
    std::string input;
    std::string output;
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

int cmd_curate(const CurateArgs& args) {
    const json root = parse_json_file(args.config);
    if (!root.is_object() || !root.contains("op"))
        throw ConfigError("curate config needs an 'op' key");
    const std::string op = root.at("op").get<std::string>();
    const std::uint64_t seed = args.seed_set ? args.seed : root.value("seed", std::uint64_t{0});

    if (op == "downsample") {
        require_keys(root, {"op", "seed", "language", "keep_ratio", "target_bytes"}, args.config);
        const auto docs = codesift::read_document_file(args.input);
        const std::string language = root.at("language").get<std::string>();
        double ratio;
        if (root.contains("keep_ratio") == root.contains("target_bytes"))
            throw ConfigError("downsample needs exactly one of keep_ratio, target_bytes");
        if (root.contains("keep_ratio"))
            ratio = root.at("keep_ratio").get<double>();
        else
            ratio = codesift::keep_ratio_for_budget(docs, language,
                                                    root.at("target_bytes").get<std::uint64_t>());
        const auto kept = codesift::downsample_language(docs, language, ratio, seed);
        codesift::write_document_file(args.output, kept);
        std::cout << "kept " << kept.size() << " of " << docs.size() << " documents\n";
        return 0;
    }
    if (op == "extract") {
        require_keys(root, {"op", "seed", "keywords"}, args.config);
        const auto docs = codesift::read_document_file(args.input);
        const auto keywords = root.contains("keywords")
                                  ? root.at("keywords").get<std::vector<std::string>>()
                                  : codesift::default_algorithmic_keywords();
        const auto extracted = codesift::extract_algorithmic(docs, keywords);
        codesift::write_document_file(args.output, extracted);
        std::cout << "extracted " << extracted.size() << " of " << docs.size() << " documents\n";
        return 0;
    }
    if (op == "mixture") {
        require_keys(root, {"op", "seed", "total_tokens", "components"}, args.config);
        codesift::MixtureSpec spec;
        std::map<std::string, std::vector<codesift::CodeDocument>> sources;
        if (!root.contains("components"))
            throw ConfigError("mixture needs a components list [{name, path, weight}]");
        for (const auto& entry : root.at("components")) {
            require_keys(entry, {"name", "path", "weight"}, "mixture component");
            codesift::MixtureComponent component;
            component.name = entry.at("name").get<std::string>();
            component.source = component.name;
            component.weight = entry.at("weight").get<double>();
            sources[component.name] =
                codesift::read_document_file(entry.at("path").get<std::string>());
            spec.components.push_back(std::move(component));
        }
        const auto total_tokens = root.at("total_tokens").get<std::size_t>();
        const auto result = codesift::assemble_mixture(sources, spec, total_tokens, seed);
        codesift::write_document_file(args.output, result.mixed);
        for (const auto& row : result.report)
            std::cout << row.name << ": target=" << row.target_share
                      << " achieved=" << row.achieved_share << " tokens=" << row.tokens
                      << (row.shortfall_tokens != 0
                              ? " SHORTFALL=" + std::to_string(row.shortfall_tokens)
                              : "")
                      << '\n';
        std::cout << "mixed " << result.mixed.size() << " documents, " << result.total_tokens
                  << " tokens\n";
        return result.shortfall ? 1 : 0;
    }
    if (op == "star-filter") {
        require_keys(root, {"op", "seed", "min_stars"}, args.config);
        const auto docs = codesift::read_document_file(args.input);
        const auto result = codesift::star_filter(docs, root.value("min_stars", std::int64_t{0}));
        codesift::write_document_file(args.output, result.kept);
        std::cout << "language before_files after_files\n";
        for (const auto& [language, before] : result.before) {
            const auto it = result.after.find(language);
            std::cout << language << ' ' << before.files << ' '
                      << (it == result.after.end() ? 0 : it->second.files) << '\n';
        }
        std::cout << "kept " << result.kept.size() << " of " << docs.size() << " documents\n";
        return 0;
    }
    if (op == "decontaminate") {
        require_keys(root, {"op", "seed", "benchmarks", "entry_points", "ngram", "allow_empty"},
                     args.config);
        const auto docs = codesift::read_document_file(args.input);
        std::vector<std::string> benchmark_texts;
        for (const auto& path : root.value("benchmarks", std::vector<std::string>{})) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw ConfigError("cannot open benchmark file " + path);
            std::ostringstream buf;
            buf << in.rdbuf();
            benchmark_texts.push_back(buf.str());
        }
        const auto index = codesift::build_test_index(
            benchmark_texts, root.value("entry_points", std::vector<std::string>{}),
            root.value("ngram", std::size_t{10}));
        const auto result = codesift::decontaminate(docs, index, root.value("allow_empty", false));
        codesift::write_document_file(args.output, result.kept);
        write_text(args.output + ".removals.jsonl", codesift::removal_report_jsonl(result.removed));
        std::cout << "removed " << result.removed.size() << " of " << docs.size() << " documents\n";
        return 0;
    }
    throw ConfigError("unknown curate op '" + op + "'");
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string input;
    std::string manifest;
    std::string output;
    std::string estimator = "whitespace";
};

int cmd_report(const ReportArgs& args) {
    if (!args.manifest.empty()) {
        const auto manifest = codesift::load_manifest(args.manifest);
        std::cout << codesift::funnel_report(manifest);
        if (!args.output.empty()) write_text(args.output, codesift::funnel_csv(manifest));
        return 0;
    }
    const auto docs = codesift::read_document_file(args.input);
    const auto rows =
        codesift::composition_table(docs, codesift::estimator_from_string(args.estimator));
    std::cout << codesift::format_composition_table(rows);
    if (!args.output.empty()) write_text(args.output, codesift::composition_csv(rows));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"codesift — corpus curation pipeline for code-pretraining data"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "execute the configured pipeline");
    run->add_option("--config", run_args.config_path, "pipeline config JSON")->required();
    auto* run_seed = run->add_option("--seed", run_args.seed, "override config seed");
    auto* run_workers = run->add_option("--workers", run_args.workers, "worker count");
    run->add_flag("--resume", run_args.resume, "reuse checkpoints from a previous run");

    DedupCompareArgs dc_args;
    auto* dc = app.add_subcommand("dedup-compare", "run the six dedup strategies");
    dc->add_option("--input", dc_args.input, "document JSONL corpus")->required();
    dc->add_option("--output", dc_args.output, "also write the table here");
    dc->add_option("--seed", dc_args.seed, "hash seed");
    dc->add_option("--workers", dc_args.workers, "worker count");
    dc->add_option("--num-hashes", dc_args.num_hashes, "MinHash signature length");
    dc->add_option("--num-bands", dc_args.num_bands, "LSH band count");
    dc->add_option("--threshold", dc_args.threshold, "signature-agreement threshold");
    dc->add_option("--chunk-tokens", dc_args.chunk_tokens, "chunk size in tokens");

    RecallArgs recall_args;
    auto* recall = app.add_subcommand("recall", "iterative web recall");
    recall->add_option("--input", recall_args.input, "web pages JSONL {url, content}")->required();
    recall->add_option("--seeds", recall_args.seeds, "seed JSONL {text, label}")->required();
    recall->add_option("--output", recall_args.output, "recalled pages JSONL")->required();
    recall->add_option("--config", recall_args.config, "classifier config JSON");
    recall->add_option("--patterns", recall_args.patterns, "URL pattern file");
    recall->add_option("--rounds", recall_args.rounds, "iteration rounds");
    auto* recall_seed = recall->add_option("--seed", recall_args.seed, "training seed");
    recall->add_option("--workers", recall_args.workers, "worker count");
    auto* recall_threshold =
        recall->add_option("--threshold", recall_args.threshold, "recall threshold");

    CurateArgs curate_args;
    auto* curate = app.add_subcommand("curate", "corpus shaping operations");
    curate->add_option("--config", curate_args.config, "curate op config JSON")->required();
    curate->add_option("--input", curate_args.input, "document JSONL corpus");
    curate->add_option("--output", curate_args.output, "output document JSONL")->required();
    auto* curate_seed = curate->add_option("--seed", curate_args.seed, "sampling seed");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "composition table or funnel report");
    auto* report_input = report->add_option("--input", report_args.input, "document JSONL corpus");
    auto* report_manifest = report->add_option("--manifest", report_args.manifest, "manifest JSON");
    report->add_option("--output", report_args.output, "write CSV here");
    report->add_option("--estimator", report_args.estimator, "whitespace | bytes4");
    report_input->excludes(report_manifest);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage errors are exit 2, whatever CLI11 prefers
    }

    try {
        if (run->parsed()) {
            run_args.seed_set = run_seed->count() > 0;
            if (run_workers->count() == 0) run_args.workers = -1;
            return cmd_run(run_args);
        }
        if (dc->parsed()) return cmd_dedup_compare(dc_args);
        if (recall->parsed()) {
            recall_args.seed_set = recall_seed->count() > 0;
            recall_args.threshold_set = recall_threshold->count() > 0;
            return cmd_recall(recall_args);
        }
        if (curate->parsed()) {
            curate_args.seed_set = curate_seed->count() > 0;
            return cmd_curate(curate_args);
        }
        if (report->parsed()) {
            if (report_args.manifest.empty() && report_args.input.empty())
                throw ConfigError("report needs --input or --manifest");
            return cmd_report(report_args);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
