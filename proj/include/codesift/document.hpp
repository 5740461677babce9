#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace codesift {

/// Raised for invalid configuration (bad thresholds, unknown stage names,
/// malformed registries). Always raised at load/validation time, never
/// mid-scan.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a pipeline stage cannot proceed (missing input, unreadable
/// root, I/O failure).
class StageError : public std::runtime_error {
public:
    explicit StageError(const std::string& what) : std::runtime_error(what) {}
};

enum class Category { code, data, text };
enum class SourceKind { github, stack_v2, web, other };

std::string_view to_string(Category c);
std::string_view to_string(SourceKind s);
Category category_from_string(std::string_view s);
SourceKind source_from_string(std::string_view s);

/// One source file or web page flowing through the pipeline.
///
/// `id` is a stable key (dump id or relative path), `language` is the
/// registry name or "unknown", and `stars`/`commit_time` are the dedup
/// tie-breakers. `url` is empty unless the document came from the web.
struct CodeDocument {
    std::string id;
    std::string path;
    std::string repo;
    std::string content;
    std::string language = "unknown";
    Category category = Category::code;
    std::int64_t stars = 0;
    std::int64_t commit_time = 0;
    SourceKind source = SourceKind::other;
    std::string url;

    bool operator==(const CodeDocument&) const = default;
};

/// A per-record drop decision carried as data (never an exception):
/// reasons include "oversize", "excluded-language", "decode-failure",
/// "notebook-parse", "exact-dup", "fuzzy-dup", and quality rule names.
struct Rejection {
    std::string id;
    std::string reason;

    bool operator==(const Rejection&) const = default;
};

/// JSON-lines codec for the document schema
/// {id, path, repo, content, stars, commit_time, source, url}.
/// Missing stars/commit_time default to 0. `language` and `category` are
/// re-derived at ingest but persisted on output so converted documents
/// (notebooks) survive a round trip.
std::string to_jsonl(const CodeDocument& doc);
CodeDocument document_from_json(const std::string& line);

std::vector<CodeDocument> read_document_file(const std::string& path);
void write_document_file(const std::string& path, const std::vector<CodeDocument>& docs);

/// Whitespace tokens of `text` (maximal non-whitespace runs).
std::vector<std::string_view> whitespace_tokens(std::string_view text);
std::size_t count_whitespace_tokens(std::string_view text);

}  // namespace codesift
