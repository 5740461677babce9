#include "codesift/transform.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codesift/registry.hpp"

namespace codesift {
namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Lines with terminators preserved, so reassembly is byte-exact.
std::vector<std::string_view> split_lines_keep_ends(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            lines.push_back(text.substr(start, i - start + 1));
            start = i + 1;
        }
    }
    if (start < text.size()) lines.push_back(text.substr(start));
    return lines;
}

std::string_view trim_left(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

bool is_comment_line(std::string_view line) {
    std::string_view t = trim_left(line);
    if (t.substr(0, 1) == "#") {
        // C preprocessor directives start with '#' but are code, not comments.
        static constexpr std::array<std::string_view, 12> kDirectives = {
            "#include", "#define", "#pragma", "#ifdef", "#ifndef", "#if",
            "#endif",   "#else",   "#elif",   "#undef", "#error",  "#import"};
        for (std::string_view d : kDirectives)
            if (t.substr(0, d.size()) == d) return false;
        return true;
    }
    static constexpr std::array<std::string_view, 8> kMarkers = {"//", "/*", "*/", "*",
                                                                 "--", ";",  "%",  "<!--"};
    for (std::string_view m : kMarkers)
        if (t.substr(0, m.size()) == m) return true;
    return false;
}

bool matches_copyright(std::string_view line) {
    const std::string lower = lowercase(line);
    return lower.find("copyright") != std::string::npos || lower.find("(c)") != std::string::npos ||
           lower.find("all rights reserved") != std::string::npos;
}

// One strip pass; returns true if a block was removed.
bool strip_once(std::string& content) {
    const std::vector<std::string_view> lines = split_lines_keep_ends(content);
    std::size_t begin = 0;
    if (!lines.empty() && lines[0].substr(0, 2) == "#!") begin = 1;  // keep shebangs

    const std::size_t window = std::min<std::size_t>(lines.size(), 50);
    std::size_t run_begin = lines.size();
    for (std::size_t i = begin; i < window; ++i) {
        if (is_comment_line(lines[i])) {
            run_begin = i;
            break;
        }
    }
    if (run_begin == lines.size()) return false;

    std::size_t run_end = run_begin;  // exclusive
    bool copyrighted = false;
    while (run_end < lines.size() && is_comment_line(lines[run_end])) {
        if (matches_copyright(lines[run_end])) copyrighted = true;
        ++run_end;
    }
    if (!copyrighted) return false;

    std::size_t byte_begin = 0;
    for (std::size_t i = 0; i < run_begin; ++i) byte_begin += lines[i].size();
    std::size_t byte_end = byte_begin;
    for (std::size_t i = run_begin; i < run_end; ++i) byte_end += lines[i].size();
    content.erase(byte_begin, byte_end - byte_begin);
    return true;
}

void rule_from_json(const nlohmann::json& j, RedactionRule& rule) {
    if (!j.is_object() || !j.contains("name") || !j.contains("pattern") ||
        !j.contains("placeholder"))
        throw ConfigError("redaction rule needs name, pattern, placeholder");
    rule.name = j.at("name").get<std::string>();
    rule.pattern = j.at("pattern").get<std::string>();
    rule.placeholder = j.at("placeholder").get<std::string>();
    rule.replacement = j.value("replacement", rule.placeholder);
    rule.icase = j.value("flags", std::string()).find('i') != std::string::npos;
    auto flags = std::regex::ECMAScript;
    if (rule.icase) flags |= std::regex::icase;
    try {
        rule.compiled = std::regex(rule.pattern, flags);
    } catch (const std::regex_error& e) {
        throw ConfigError("redaction rule '" + rule.name + "': bad pattern: " + e.what());
    }
}

}  // namespace

RedactionCatalog RedactionCatalog::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open redaction catalog: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("rules") || !j.at("rules").is_array())
        throw ConfigError("redaction catalog must be an object with a rules array: " + path);
    RedactionCatalog catalog;
    for (const auto& entry : j.at("rules")) {
        RedactionRule rule;
        rule_from_json(entry, rule);
        catalog.rules_.push_back(std::move(rule));
    }
    return catalog;
}

const RedactionCatalog& RedactionCatalog::builtin() {
    static const RedactionCatalog catalog = load(default_data_file("redaction.json"));
    return catalog;
}

CodeDocument strip_copyright(const CodeDocument& doc) {
    CodeDocument out = doc;
    while (strip_once(out.content)) {
    }
    return out;
}

RedactionOutcome redact_pii(const CodeDocument& doc, const RedactionCatalog& catalog) {
    RedactionOutcome outcome;
    outcome.doc = doc;
    for (const RedactionRule& rule : catalog.rules()) {
        std::string next;
        auto begin = std::sregex_iterator(outcome.doc.content.begin(), outcome.doc.content.end(),
                                          rule.compiled);
        auto end = std::sregex_iterator();
        std::size_t last = 0;
        for (auto it = begin; it != end; ++it) {
            const std::smatch& m = *it;
            next.append(outcome.doc.content, last, static_cast<std::size_t>(m.position()) - last);
            next += m.format(rule.replacement);
            last = static_cast<std::size_t>(m.position()) + static_cast<std::size_t>(m.length());
            ++outcome.redactions;
        }
        if (last == 0) continue;
        next.append(outcome.doc.content, last, std::string::npos);
        outcome.doc.content = std::move(next);
    }
    return outcome;
}

}  // namespace codesift
