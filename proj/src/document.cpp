#include "codesift/document.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace codesift {

using nlohmann::json;

std::string_view to_string(Category c) {
    switch (c) {
        case Category::code:
            return "code";
        case Category::data:
            return "data";
        case Category::text:
            return "text";
    }
    return "code";
}

std::string_view to_string(SourceKind s) {
    switch (s) {
        case SourceKind::github:
            return "github";
        case SourceKind::stack_v2:
            return "stack-v2";
        case SourceKind::web:
            return "web";
        case SourceKind::other:
            return "other";
    }
    return "other";
}

Category category_from_string(std::string_view s) {
    if (s == "code") return Category::code;
    if (s == "data") return Category::data;
    if (s == "text") return Category::text;
    throw ConfigError("unknown category: " + std::string(s));
}

SourceKind source_from_string(std::string_view s) {
    if (s == "github") return SourceKind::github;
    if (s == "stack-v2") return SourceKind::stack_v2;
    if (s == "web") return SourceKind::web;
    if (s == "other") return SourceKind::other;
    throw ConfigError("unknown source: " + std::string(s));
}

std::string to_jsonl(const CodeDocument& doc) {
    json j;
    j["id"] = doc.id;
    j["path"] = doc.path;
    j["repo"] = doc.repo;
    j["content"] = doc.content;
    j["language"] = doc.language;
    j["category"] = std::string(to_string(doc.category));
    j["stars"] = doc.stars;
    j["commit_time"] = doc.commit_time;
    j["source"] = std::string(to_string(doc.source));
    if (!doc.url.empty()) j["url"] = doc.url;
    return j.dump();
}

CodeDocument document_from_json(const std::string& line) {
    json j = json::parse(line);
    CodeDocument doc;
    doc.id = j.value("id", "");
    doc.path = j.value("path", "");
    doc.repo = j.value("repo", "");
    doc.content = j.value("content", "");
    doc.language = j.value("language", "unknown");
    if (j.contains("category"))
        doc.category = category_from_string(j["category"].get<std::string>());
    doc.stars = j.value("stars", std::int64_t{0});
    doc.commit_time = j.value("commit_time", std::int64_t{0});
    if (j.contains("source")) doc.source = source_from_string(j["source"].get<std::string>());
    doc.url = j.value("url", "");
    if (doc.stars < 0) throw ConfigError("document " + doc.id + ": negative stars");
    return doc;
}

std::vector<CodeDocument> read_document_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("cannot open document file: " + path);
    std::vector<CodeDocument> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        docs.push_back(document_from_json(line));
    }
    return docs;
}

void write_document_file(const std::string& path, const std::vector<CodeDocument>& docs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("cannot write document file: " + path);
    for (const auto& doc : docs) {
        out << to_jsonl(doc) << '\n';
    }
}

std::vector<std::string_view> whitespace_tokens(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

std::size_t count_whitespace_tokens(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++count;
        in_token = !space;
    }
    return count;
}

}  // namespace codesift
