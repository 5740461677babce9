#include "codesift/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace codesift {

namespace {

using nlohmann::json;

double percentage(std::size_t part, std::size_t whole) {
    if (whole == 0) return 100.0;  // an empty stage retains everything
    return 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

}  // namespace

// ---------------------------------------------------------------------------
// Token estimation
// ---------------------------------------------------------------------------

std::string_view to_string(TokenEstimator estimator) {
    switch (estimator) {
        case TokenEstimator::whitespace:
            return "whitespace";
        case TokenEstimator::bytes4:
            return "bytes4";
    }
    return "whitespace";
}

TokenEstimator estimator_from_string(std::string_view name) {
    if (name == "whitespace") return TokenEstimator::whitespace;
    if (name == "bytes4") return TokenEstimator::bytes4;
    throw ConfigError("report: unknown token estimator '" + std::string(name) + "'");
}

std::size_t estimate_tokens(const CodeDocument& doc, TokenEstimator estimator) {
    switch (estimator) {
        case TokenEstimator::whitespace:
            return count_whitespace_tokens(doc.content);
        case TokenEstimator::bytes4:
            return doc.content.size() / 4;
    }
    return 0;
}

std::size_t estimate_tokens(const std::vector<CodeDocument>& corpus, TokenEstimator estimator) {
    std::size_t total = 0;
    for (const auto& doc : corpus) total += estimate_tokens(doc, estimator);
    return total;
}

// ---------------------------------------------------------------------------
// Pipeline manifest
// ---------------------------------------------------------------------------

void PipelineManifest::validate() const {
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const StageEntry& stage = stages[i];
        if (stage.docs_out > stage.docs_in)
            throw ConfigError("report: stage '" + stage.stage +
                              "' emits more documents than it consumed");
        if (i + 1 < stages.size() && stages[i + 1].docs_in != stage.docs_out)
            throw ConfigError("report: stage '" + stages[i + 1].stage +
                              "' input does not chain from '" + stage.stage + "' output");
    }
    (void)estimator_from_string(estimator);
}

StageEntry make_stage_entry(const std::string& stage, std::size_t docs_in,
                            const std::vector<CodeDocument>& output,
                            const std::vector<Rejection>& rejected, TokenEstimator estimator) {
    StageEntry entry;
    entry.stage = stage;
    entry.docs_in = docs_in;
    entry.docs_out = output.size();
    for (const auto& doc : output) {
        entry.bytes_out += doc.content.size();
        entry.est_tokens_out += estimate_tokens(doc, estimator);
        entry.per_language[doc.language] += 1;
    }
    for (const auto& rejection : rejected) entry.reason_histogram[rejection.reason] += 1;
    return entry;
}

std::string manifest_to_json(const PipelineManifest& manifest) {
    json root;
    root["version"] = 1;
    root["estimator"] = manifest.estimator;
    root["seed"] = manifest.seed;
    root["stages"] = json::array();
    for (const auto& stage : manifest.stages) {
        json entry;
        entry["stage"] = stage.stage;
        entry["docs_in"] = stage.docs_in;
        entry["docs_out"] = stage.docs_out;
        entry["bytes_out"] = stage.bytes_out;
        entry["est_tokens_out"] = stage.est_tokens_out;
        entry["per_language"] = stage.per_language;
        entry["reason_histogram"] = stage.reason_histogram;
        root["stages"].push_back(std::move(entry));
    }
    return root.dump(2) + "\n";
}

PipelineManifest manifest_from_json(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        throw ConfigError("report: manifest is not a JSON object");
    PipelineManifest manifest;
    try {
        manifest.estimator = root.value("estimator", std::string("whitespace"));
        manifest.seed = root.value("seed", std::uint64_t{0});
        for (const auto& entry : root.value("stages", json::array())) {
            StageEntry stage;
            stage.stage = entry.at("stage").get<std::string>();
            stage.docs_in = entry.at("docs_in").get<std::size_t>();
            stage.docs_out = entry.at("docs_out").get<std::size_t>();
            stage.bytes_out = entry.value("bytes_out", std::size_t{0});
            stage.est_tokens_out = entry.value("est_tokens_out", std::size_t{0});
            if (entry.contains("per_language"))
                stage.per_language =
                    entry["per_language"].get<std::map<std::string, std::size_t>>();
            if (entry.contains("reason_histogram"))
                stage.reason_histogram =
                    entry["reason_histogram"].get<std::map<std::string, std::size_t>>();
            manifest.stages.push_back(std::move(stage));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report: malformed manifest: ") + e.what());
    }
    manifest.validate();
    return manifest;
}

void save_manifest(const std::string& path, const PipelineManifest& manifest) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("report: cannot write manifest " + path);
    out << manifest_to_json(manifest);
}

PipelineManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("report: cannot open manifest " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str());
}

// ---------------------------------------------------------------------------
// Composition table
// ---------------------------------------------------------------------------

std::vector<CompositionRow> composition_table(const std::vector<CodeDocument>& corpus,
                                              TokenEstimator estimator) {
    std::map<std::string, CompositionRow> by_language;
    std::size_t total_bytes = 0;
    for (const auto& doc : corpus) {
        CompositionRow& row = by_language[doc.language];
        row.language = doc.language;
        row.files += 1;
        row.bytes += doc.content.size();
        row.est_tokens += estimate_tokens(doc, estimator);
        total_bytes += doc.content.size();
    }
    std::vector<CompositionRow> rows;
    rows.reserve(by_language.size());
    for (auto& [language, row] : by_language) {
        row.ratio = total_bytes == 0
                        ? 0.0
                        : static_cast<double>(row.bytes) / static_cast<double>(total_bytes);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const CompositionRow& a, const CompositionRow& b) {
        if (a.bytes != b.bytes) return a.bytes > b.bytes;
        return a.language < b.language;
    });
    return rows;
}

std::string format_composition_table(const std::vector<CompositionRow>& rows) {
    std::size_t width = 8;
    for (const auto& row : rows) width = std::max(width, row.language.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "language" << std::right
        << std::setw(10) << "files" << std::setw(14) << "bytes" << std::setw(14) << "est_tokens"
        << std::setw(10) << "ratio" << '\n';
    for (const auto& row : rows) {
        out << std::left << std::setw(static_cast<int>(width)) << row.language << std::right
            << std::setw(10) << row.files << std::setw(14) << row.bytes << std::setw(14)
            << row.est_tokens << std::setw(10) << std::fixed << std::setprecision(4) << row.ratio
            << '\n';
    }
    return out.str();
}

std::string composition_csv(const std::vector<CompositionRow>& rows) {
    std::ostringstream out;
    out << "language,files,bytes,est_tokens,ratio\n";
    for (const auto& row : rows) {
        std::string language = row.language;
        if (language.find_first_of(",\"") != std::string::npos) {
            std::string quoted = "\"";
            for (char c : language) {
                if (c == '"') quoted += '"';
                quoted += c;
            }
            quoted += '"';
            language = quoted;
        }
        out << language << ',' << row.files << ',' << row.bytes << ',' << row.est_tokens << ','
            << std::fixed << std::setprecision(6) << row.ratio << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Funnel report
// ---------------------------------------------------------------------------

std::string funnel_report(const PipelineManifest& manifest) {
    manifest.validate();
    std::size_t width = 5;
    for (const auto& stage : manifest.stages) width = std::max(width, stage.stage.size());
    const std::size_t initial = manifest.stages.empty() ? 0 : manifest.stages.front().docs_in;
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "stage" << std::right << std::setw(12)
        << "docs_in" << std::setw(12) << "docs_out" << std::setw(10) << "kept%" << std::setw(12)
        << "overall%" << '\n';
    for (const auto& stage : manifest.stages) {
        out << std::left << std::setw(static_cast<int>(width)) << stage.stage << std::right
            << std::setw(12) << stage.docs_in << std::setw(12) << stage.docs_out << std::setw(10)
            << std::fixed << std::setprecision(2) << percentage(stage.docs_out, stage.docs_in)
            << std::setw(12) << percentage(stage.docs_out, initial) << '\n';
    }
    out << "(token estimator: " << manifest.estimator << ")\n";
    return out.str();
}

std::string funnel_csv(const PipelineManifest& manifest) {
    manifest.validate();
    const std::size_t initial = manifest.stages.empty() ? 0 : manifest.stages.front().docs_in;
    std::ostringstream out;
    out << "stage,docs_in,docs_out,bytes_out,est_tokens_out,kept_pct,overall_pct\n";
    for (const auto& stage : manifest.stages) {
        out << stage.stage << ',' << stage.docs_in << ',' << stage.docs_out << ','
            << stage.bytes_out << ',' << stage.est_tokens_out << ',' << std::fixed
            << std::setprecision(4) << percentage(stage.docs_out, stage.docs_in) << ','
            << percentage(stage.docs_out, initial) << '\n';
    }
    return out.str();
}

}  // namespace codesift
