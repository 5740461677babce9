#include "codesift/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codesift/parallel.hpp"
#include "codesift/pysyntax.hpp"
#include "codesift/registry.hpp"

namespace codesift {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Signal registry
// ---------------------------------------------------------------------------

const std::vector<SignalInfo>& signals_table() {
    static const std::vector<SignalInfo> kSignals = {
        // General signals, computed for every language.
        {"long-string-line", {}},
        {"long-word-in-string", {}},
        {"hex-chars", {}},
        {"placeholder-line", {}},
        {"assert-line", {}},
        {"non-blank-lines", {}},
        // Language-specific signals.
        {"python-function-density", {"Python"}},
        {"python-parse-valid", {"Python"}},
        {"python-import-lines", {"Python"}},
        {"python-pass-lines", {"Python"}},
        {"c-goto-lines", {"C"}},
        {"include-lines", {"C", "C++"}},
        {"csharp-using-lines", {"C#"}},
        {"java-import-lines", {"Java"}},
        {"js-import-lines", {"JavaScript"}},
        {"go-import-lines", {"Go"}},
        {"html-visible-text", {"HTML"}},
    };
    return kSignals;
}

const SignalInfo* find_signal(const std::string& name) {
    for (const auto& info : signals_table())
        if (info.name == name) return &info;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

// Lines without their terminators; a trailing newline does not create a
// phantom empty line. Empty content -> no lines.
std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::size_t end = nl;
        if (end > start && text[end - 1] == '\r') --end;
        lines.push_back(text.substr(start, end - start));
        start = nl + 1;
    }
    return lines;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

std::string_view lstrip(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

// True when `line` contains `word` delimited by non-word characters.
bool contains_word(std::string_view line, std::string_view word) {
    std::size_t pos = 0;
    while ((pos = line.find(word, pos)) != std::string_view::npos) {
        const bool left_ok = pos == 0 || !is_word_char(line[pos - 1]);
        const std::size_t after = pos + word.size();
        const bool right_ok = after >= line.size() || !is_word_char(line[after]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

// True when the stripped line begins with `word` as a whole word.
bool starts_with_word(std::string_view stripped, std::string_view word) {
    if (stripped.substr(0, word.size()) != word) return false;
    return stripped.size() == word.size() || !is_word_char(stripped[word.size()]);
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    if (haystack.size() < needle.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool hit = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (std::tolower(static_cast<unsigned char>(haystack[i + j])) !=
                std::tolower(static_cast<unsigned char>(needle[j]))) {
                hit = false;
                break;
            }
        }
        if (hit) return true;
    }
    return false;
}

double ratio(std::size_t numerator, std::size_t denominator) {
    if (denominator == 0) return 0.0;  // 0/0 = 0 by convention
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

// Same-line string literals found by a quote scan: '\"' and '\'' always,
// plus backticks for languages that use them. Backslash escapes the next
// character; an unterminated literal runs to the end of the line. This is
// a deliberate heuristic, not a parse — multi-line strings are seen as
// plain text, which biases the string signals toward leniency.
std::vector<std::string_view> string_literals(std::string_view line, bool backtick) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '"' || c == '\'' || (backtick && c == '`')) {
            std::size_t j = i + 1;
            while (j < line.size() && line[j] != c) {
                if (line[j] == '\\' && j + 1 < line.size()) ++j;
                ++j;
            }
            out.push_back(line.substr(i + 1, j - (i + 1)));
            i = (j < line.size()) ? j + 1 : j;
        } else {
            ++i;
        }
    }
    return out;
}

bool uses_backtick_strings(const std::string& language) {
    return language == "JavaScript" || language == "Go";
}

// Visible (non-markup) text proportion of an HTML document: characters
// outside tags, comments and script/style element bodies, counted over
// non-whitespace characters only.
double html_visible_ratio(std::string_view text) {
    enum class State { text, tag, comment, script, style };
    State state = State::text;
    std::size_t visible = 0, total = 0;
    std::size_t i = 0;

    auto starts_with_ci_at = [&](std::size_t pos, std::string_view prefix) {
        if (pos + prefix.size() > text.size()) return false;
        for (std::size_t j = 0; j < prefix.size(); ++j)
            if (std::tolower(static_cast<unsigned char>(text[pos + j])) !=
                std::tolower(static_cast<unsigned char>(prefix[j])))
                return false;
        return true;
    };

    while (i < text.size()) {
        const char c = text[i];
        if (!std::isspace(static_cast<unsigned char>(c))) ++total;
        switch (state) {
            case State::text:
                if (c == '<') {
                    if (starts_with_ci_at(i, "<!--"))
                        state = State::comment;
                    else if (starts_with_ci_at(i, "<script"))
                        state = State::script;
                    else if (starts_with_ci_at(i, "<style"))
                        state = State::style;
                    else
                        state = State::tag;
                } else if (!std::isspace(static_cast<unsigned char>(c))) {
                    ++visible;
                }
                ++i;
                continue;
            case State::tag:
                if (c == '>') state = State::text;
                ++i;
                continue;
            case State::comment:
                if (starts_with_ci_at(i, "-->")) {
                    // count the remaining "->" as markup, then resume
                    for (std::size_t j = i + 1; j < i + 3 && j < text.size(); ++j)
                        if (!std::isspace(static_cast<unsigned char>(text[j]))) ++total;
                    i += 3;
                    state = State::text;
                    continue;
                }
                ++i;
                continue;
            case State::script:
            case State::style: {
                const std::string_view close = (state == State::script) ? "</script" : "</style";
                if (starts_with_ci_at(i, close)) state = State::tag;
                ++i;
                continue;
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(visible) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Per-line predicates
// ---------------------------------------------------------------------------

bool is_placeholder_line(std::string_view line) {
    // TODO/FIXME are matched case-sensitively (the conventional all-caps
    // markers); the phrase is matched case-insensitively.
    return line.find("TODO") != std::string_view::npos ||
           line.find("FIXME") != std::string_view::npos || contains_ci(line, "you code here");
}

bool is_python_import_line(std::string_view stripped) {
    if (starts_with_word(stripped, "import")) return true;
    return starts_with_word(stripped, "from") && contains_word(stripped, "import");
}

bool is_python_def_line(std::string_view stripped) {
    if (starts_with_word(stripped, "def")) return true;
    if (!starts_with_word(stripped, "async")) return false;
    return starts_with_word(lstrip(stripped.substr(5)), "def");
}

bool is_include_line(std::string_view stripped) {
    if (stripped.empty() || stripped[0] != '#') return false;
    return starts_with_word(lstrip(stripped.substr(1)), "include");
}

bool is_js_import_line(std::string_view stripped) {
    if (starts_with_word(stripped, "import")) return true;
    // require(...) calls anywhere on the line
    std::string_view rest = stripped;
    std::size_t pos = 0;
    while ((pos = rest.find("require", pos)) != std::string_view::npos) {
        const bool left_ok = pos == 0 || !is_word_char(rest[pos - 1]);
        std::string_view after = lstrip(rest.substr(pos + 7));
        if (left_ok && !after.empty() && after[0] == '(') return true;
        pos += 1;
    }
    return false;
}

// ---------------------------------------------------------------------------
// compute_signals
// ---------------------------------------------------------------------------

void compute_general_signals(const CodeDocument& doc, const std::vector<std::string_view>& lines,
                             QualitySignalVector& out) {
    const bool backtick = uses_backtick_strings(doc.language);
    const std::size_t total_lines = lines.size();

    std::size_t long_string_lines = 0;
    std::size_t long_word_chars = 0;
    std::size_t placeholder_lines = 0;
    std::size_t assert_lines = 0;
    std::size_t non_blank = 0;

    for (const auto& line : lines) {
        bool long_string = false;
        for (const auto& lit : string_literals(line, backtick)) {
            // "long string line": longest literal on the line spans more
            // than 15 whitespace-separated words.
            if (count_whitespace_tokens(lit) > 15) long_string = true;
            for (const auto& word : whitespace_tokens(lit))
                if (word.size() > 20) long_word_chars += word.size();
        }
        if (long_string) ++long_string_lines;
        if (is_placeholder_line(line)) ++placeholder_lines;
        if (contains_word(line, "assert")) ++assert_lines;
        if (!lstrip(line).empty()) ++non_blank;
    }

    std::size_t hex_chars = 0, non_ws_chars = 0;
    for (unsigned char c : doc.content) {
        if (std::isspace(c)) continue;
        ++non_ws_chars;
        if (std::isxdigit(c)) ++hex_chars;
    }

    out["long-string-line"] = ratio(long_string_lines, total_lines);
    out["long-word-in-string"] = ratio(long_word_chars, doc.content.size());
    out["hex-chars"] = ratio(hex_chars, non_ws_chars);
    out["placeholder-line"] = ratio(placeholder_lines, total_lines);
    out["assert-line"] = ratio(assert_lines, total_lines);
    out["non-blank-lines"] = static_cast<double>(non_blank);
}

void compute_language_signals(const CodeDocument& doc, const std::vector<std::string_view>& lines,
                              QualitySignalVector& out) {
    const std::size_t total_lines = lines.size();
    const std::string& lang = doc.language;

    auto line_ratio = [&](auto&& pred) {
        std::size_t hits = 0;
        for (const auto& line : lines)
            if (pred(lstrip(line))) ++hits;
        return ratio(hits, total_lines);
    };

    if (lang == "Python") {
        out["python-function-density"] = line_ratio(is_python_def_line);
        out["python-parse-valid"] = pysyntax::parses(doc.content) ? 1.0 : 0.0;
        out["python-import-lines"] = line_ratio(is_python_import_line);
        out["python-pass-lines"] = line_ratio([](std::string_view s) { return s == "pass"; });
    }
    if (lang == "C")
        out["c-goto-lines"] =
            line_ratio([](std::string_view s) { return contains_word(s, "goto"); });
    if (lang == "C" || lang == "C++") out["include-lines"] = line_ratio(is_include_line);
    if (lang == "C#")
        out["csharp-using-lines"] =
            line_ratio([](std::string_view s) { return starts_with_word(s, "using"); });
    if (lang == "Java")
        out["java-import-lines"] =
            line_ratio([](std::string_view s) { return starts_with_word(s, "import"); });
    if (lang == "JavaScript") out["js-import-lines"] = line_ratio(is_js_import_line);
    if (lang == "Go")
        out["go-import-lines"] =
            line_ratio([](std::string_view s) { return starts_with_word(s, "import"); });
    if (lang == "HTML") out["html-visible-text"] = html_visible_ratio(doc.content);
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

bool rule_fires(const QualityRule& rule, const std::string& language,
                const QualitySignalVector& signals) {
    if (!rule.enabled) return false;
    if (!rule.languages.empty() &&
        std::find(rule.languages.begin(), rule.languages.end(), language) == rule.languages.end())
        return false;
    const auto it = signals.find(rule.signal);
    if (it == signals.end()) return false;
    const double score = it->second;
    if (rule.comparator == ">") return score > rule.threshold;
    if (rule.comparator == "<") return score < rule.threshold;
    return score == rule.threshold;  // "==": exact, used for boolean/count signals
}

void validate_rules(const std::vector<QualityRule>& rules) {
    static const std::set<std::string> kComparators = {">", "<", "=="};
    static const std::set<std::string> kCategories = {"natural-language", "general-code",
                                                      "language-specific"};
    std::set<std::string> names;
    for (const auto& rule : rules) {
        const std::string where = "quality: rule '" + rule.name + "'";
        const SignalInfo* info = find_signal(rule.signal);
        if (info == nullptr)
            throw ConfigError(where + " references unknown signal '" + rule.signal + "'");
        if (kComparators.count(rule.comparator) == 0)
            throw ConfigError(where + " has unknown comparator '" + rule.comparator + "'");
        if (!std::isfinite(rule.threshold))
            throw ConfigError(where + " has a non-finite threshold");
        if (kCategories.count(rule.category) == 0)
            throw ConfigError(where + " has unknown category '" + rule.category + "'");
        if (!info->languages.empty()) {
            if (rule.languages.empty())
                throw ConfigError(where + " applies to all languages but signal '" + rule.signal +
                                  "' is language-specific");
            for (const auto& lang : rule.languages)
                if (std::find(info->languages.begin(), info->languages.end(), lang) ==
                    info->languages.end())
                    throw ConfigError(where + " scopes language '" + lang + "' outside signal '" +
                                      rule.signal + "' scope");
        }
        if (!names.insert(rule.name).second)
            throw ConfigError("quality: duplicate rule name '" + rule.name + "'");
    }
}

std::vector<QualityRule> parse_rules_json(const json& root, const std::string& origin) {
    if (!root.is_object() || !root.contains("rules") || !root["rules"].is_array())
        throw ConfigError("quality: " + origin + " must be an object with a 'rules' array");
    std::vector<QualityRule> rules;
    for (const auto& entry : root["rules"]) {
        if (!entry.is_object())
            throw ConfigError("quality: rule entries in " + origin + " must be objects");
        QualityRule rule;
        try {
            rule.signal = entry.at("signal").get<std::string>();
            rule.comparator = entry.at("comparator").get<std::string>();
            rule.threshold = entry.at("threshold").get<double>();
            rule.category = entry.at("category").get<std::string>();
            const auto& langs = entry.at("languages");
            if (langs.is_string()) {
                if (langs.get<std::string>() != "all")
                    throw ConfigError("quality: languages must be \"all\" or a list in " + origin);
            } else {
                rule.languages = langs.get<std::vector<std::string>>();
            }
            rule.name = entry.value("name", rule.signal);
            rule.enabled = entry.value("enabled", true);
            rule.note = entry.value("note", std::string());
        } catch (const json::exception& e) {
            throw ConfigError("quality: malformed rule entry in " + origin + ": " + e.what());
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

const std::vector<SignalInfo>& signal_registry() { return signals_table(); }

bool signal_in_scope(const std::string& signal, const std::string& language) {
    const SignalInfo* info = find_signal(signal);
    if (info == nullptr) return false;
    if (info->languages.empty()) return true;
    return std::find(info->languages.begin(), info->languages.end(), language) !=
           info->languages.end();
}

RuleRegistry RuleRegistry::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("quality: cannot open rules file " + path);
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded())
        throw ConfigError("quality: rules file " + path + " is not valid JSON");
    return from_rules(parse_rules_json(root, path));
}

RuleRegistry RuleRegistry::from_rules(std::vector<QualityRule> rules) {
    for (auto& rule : rules)
        if (rule.name.empty()) rule.name = rule.signal;
    validate_rules(rules);
    RuleRegistry registry;
    registry.rules_ = std::move(rules);
    return registry;
}

const RuleRegistry& RuleRegistry::builtin() {
    static const RuleRegistry registry = load(default_data_file("rules.json"));
    return registry;
}

QualitySignalVector compute_signals(const CodeDocument& doc) {
    QualitySignalVector out;
    const auto lines = split_lines(doc.content);
    compute_general_signals(doc, lines, out);
    compute_language_signals(doc, lines, out);
    return out;
}

FilterVerdict apply_filters(const CodeDocument& doc, const QualitySignalVector& signals,
                            const RuleRegistry& registry) {
    FilterVerdict verdict;
    verdict.id = doc.id;
    for (const auto& rule : registry.rules())
        if (rule_fires(rule, doc.language, signals)) verdict.reasons.push_back(rule.name);
    verdict.kept = verdict.reasons.empty();
    return verdict;
}

FilterVerdict filter_document(const CodeDocument& doc, const RuleRegistry& registry) {
    return apply_filters(doc, compute_signals(doc), registry);
}

QualityResult filter_corpus(const std::vector<CodeDocument>& docs, const RuleRegistry& registry,
                            int workers) {
    QualityResult result;
    result.verdicts.resize(docs.size());
    parallel_for(docs.size(), resolve_workers(workers),
                 [&](std::size_t i) { result.verdicts[i] = filter_document(docs[i], registry); });
    for (std::size_t i = 0; i < docs.size(); ++i)
        if (result.verdicts[i].kept) result.kept.push_back(docs[i]);
    return result;
}

std::string verdict_jsonl(const std::vector<FilterVerdict>& verdicts) {
    std::string out;
    for (const auto& verdict : verdicts) {
        json obj;
        obj["id"] = verdict.id;
        obj["kept"] = verdict.kept;
        obj["reasons"] = verdict.reasons;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::map<std::string, Histogram> score_histograms(
    const std::vector<std::pair<std::string, double>>& language_scores, std::size_t bins, double lo,
    double hi) {
    if (bins == 0 || !(hi > lo))
        throw ConfigError("quality: histogram needs bins >= 1 and hi > lo");
    std::map<std::string, Histogram> out;
    for (const auto& [language, score] : language_scores) {
        Histogram& hist = out[language];
        if (hist.counts.empty()) {
            hist.lo = lo;
            hist.hi = hi;
            hist.counts.assign(bins, 0);
        }
        double pos = (score - lo) / (hi - lo) * static_cast<double>(bins);
        auto bin = static_cast<long long>(std::floor(pos));
        bin = std::clamp<long long>(bin, 0, static_cast<long long>(bins) - 1);
        ++hist.counts[static_cast<std::size_t>(bin)];
        ++hist.total;
    }
    return out;
}

std::map<std::string, Histogram> signal_histograms(const std::vector<CodeDocument>& docs,
                                                   const std::string& signal, std::size_t bins,
                                                   double lo, double hi, int workers) {
    if (find_signal(signal) == nullptr)
        throw ConfigError("quality: unknown signal '" + signal + "'");
    // Per-document scores computed in parallel, then aggregated serially so
    // the result is independent of the worker count.
    std::vector<std::pair<std::string, double>> scores(docs.size(), {std::string(), 0.0});
    std::vector<char> in_scope(docs.size(), 0);
    parallel_for(docs.size(), resolve_workers(workers), [&](std::size_t i) {
        if (!signal_in_scope(signal, docs[i].language)) return;
        const auto signals = compute_signals(docs[i]);
        const auto it = signals.find(signal);
        if (it == signals.end()) return;
        scores[i] = {docs[i].language, it->second};
        in_scope[i] = 1;
    });
    std::vector<std::pair<std::string, double>> flat;
    for (std::size_t i = 0; i < docs.size(); ++i)
        if (in_scope[i]) flat.push_back(std::move(scores[i]));
    return score_histograms(flat, bins, lo, hi);
}

std::vector<std::string> exclusive_hits(const std::vector<CodeDocument>& docs,
                                        const RuleRegistry& registry,
                                        const QualityRule& candidate) {
    if (find_signal(candidate.signal) == nullptr)
        throw ConfigError("quality: candidate rule references unknown signal '" + candidate.signal +
                          "'");
    std::vector<std::string> ids;
    for (const auto& doc : docs) {
        const auto signals = compute_signals(doc);
        if (!rule_fires(candidate, doc.language, signals)) continue;
        bool other_fired = false;
        for (const auto& rule : registry.rules()) {
            if (rule.name == candidate.name) continue;
            if (rule_fires(rule, doc.language, signals)) {
                other_fired = true;
                break;
            }
        }
        if (!other_fired) ids.push_back(doc.id);
    }
    return ids;
}

}  // namespace codesift
