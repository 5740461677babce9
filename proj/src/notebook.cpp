#include "codesift/notebook.hpp"

#include <nlohmann/json.hpp>

namespace codesift {
namespace {

using nlohmann::json;

// nbformat stores cell text either as a string or as a list of line strings.
std::optional<std::string> join_source(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string out;
        for (const auto& part : v) {
            if (!part.is_string()) return std::nullopt;
            out += part.get<std::string>();
        }
        return out;
    }
    return std::nullopt;
}

// Textual payload of one output object: stream text, or text/plain data.
std::optional<std::string> output_text(const json& out) {
    if (!out.is_object()) return std::nullopt;
    if (out.contains("text")) return join_source(out.at("text"));
    if (out.contains("data") && out.at("data").is_object()) {
        const auto& data = out.at("data");
        if (data.contains("text/plain")) return join_source(data.at("text/plain"));
        return std::string();
    }
    if (out.contains("ename")) {
        // Error output: keep the exception name/value line.
        std::string text = out.value("ename", std::string());
        std::string evalue = out.value("evalue", std::string());
        if (!evalue.empty()) text += ": " + evalue;
        return text;
    }
    return std::string();
}

void append_block(std::string& dst, const std::string& block) {
    if (block.empty()) return;
    if (!dst.empty()) dst += "\n\n";
    dst += block;
}

}  // namespace

std::optional<std::vector<NotebookTriplet>> convert_jupyter(const std::string& notebook_json) {
    json doc = json::parse(notebook_json, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    if (!doc.contains("cells") || !doc.at("cells").is_array()) return std::nullopt;

    std::vector<NotebookTriplet> triplets;
    NotebookTriplet current;
    bool current_has_code = false;
    bool current_has_any = false;

    auto flush = [&]() {
        if (current_has_any) triplets.push_back(std::move(current));
        current = NotebookTriplet{};
        current_has_code = false;
        current_has_any = false;
    };

    for (const auto& cell : doc.at("cells")) {
        if (!cell.is_object() || !cell.contains("cell_type") || !cell.at("cell_type").is_string())
            return std::nullopt;
        const std::string type = cell.at("cell_type").get<std::string>();
        auto source = cell.contains("source") ? join_source(cell.at("source"))
                                              : std::optional<std::string>(std::string());
        if (!source) return std::nullopt;

        if (type == "markdown") {
            if (current_has_code) flush();
            append_block(current.markdown, *source);
            current_has_any = true;
        } else if (type == "code") {
            if (current_has_code) flush();
            current.code = *source;
            current_has_code = true;
            current_has_any = true;
            if (cell.contains("outputs")) {
                if (!cell.at("outputs").is_array()) return std::nullopt;
                for (const auto& out : cell.at("outputs")) {
                    auto text = output_text(out);
                    if (!text) return std::nullopt;
                    append_block(current.output, *text);
                }
            }
        } else if (type == "raw") {
            continue;
        } else {
            return std::nullopt;
        }
    }
    flush();
    return triplets;
}

std::string render_triplets(const std::vector<NotebookTriplet>& triplets) {
    std::string out;
    for (const auto& t : triplets) {
        if (!t.markdown.empty()) {
            out += "<markdown>\n";
            out += t.markdown;
            out += "\n</markdown>\n";
        }
        if (!t.code.empty()) {
            out += "<code>\n";
            out += t.code;
            out += "\n</code>\n";
        }
        if (!t.output.empty()) {
            out += "<output>\n";
            out += t.output;
            out += "\n</output>\n";
        }
    }
    return out;
}

}  // namespace codesift
