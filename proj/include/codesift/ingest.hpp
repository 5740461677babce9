#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "codesift/document.hpp"
#include "codesift/registry.hpp"

namespace codesift {

/// One discovered input prior to preprocessing.
///
/// Directory scans fill path/content and leave dump-only metadata at its
/// defaults; record dumps carry the full schema.
struct RawRecord {
    std::string id;    // dump id, or relative path for tree scans
    std::string path;  // relative path with '/' separators
    std::string repo;
    std::string content;  // raw bytes, not yet validated as text
    std::uint64_t byte_length = 0;
    std::int64_t stars = 0;
    std::int64_t commit_time = 0;
    SourceKind source = SourceKind::other;
    std::string url;
};

/// A record the scanner could not produce, with the reason.
struct SkipEntry {
    std::string path;
    std::string reason;  // "unreadable" | "bad-record"

    bool operator==(const SkipEntry&) const = default;
};

/// Result of scanning one root (directory tree or record dump).
struct ScanResult {
    std::vector<RawRecord> records;  // lexicographic path order for trees,
                                     // line order for dumps
    std::vector<SkipEntry> skipped;
};

/// Discover raw records under a directory tree or in a JSONL dump.
///
/// A directory root yields one record per regular file in lexicographic
/// relative-path order; unreadable entries (open failures, dangling symlinks)
/// become SkipEntry items and the scan continues. A regular-file root is read
/// as a record dump: one JSON object per line with fields {id, path, repo,
/// content, stars, commit_time, source, url}; missing stars/commit_time
/// default to 0, malformed lines become SkipEntry{"<root>:<line>", "bad-record"}.
/// Throws StageError if root does not exist.
ScanResult scan_source(const std::string& root);

/// Result of preprocessing one raw record.
///
/// Exactly one of doc/reason is meaningful: doc engaged means accepted,
/// otherwise reason is one of "oversize", "excluded-language",
/// "decode-failure", "notebook-parse", "notebook-empty".
struct PreprocessResult {
    std::optional<CodeDocument> doc;
    std::string reason;
};

/// Size cutoff from the preprocessing stage: 8 MB.
inline constexpr std::uint64_t kMaxContentBytes = 8388608;

/// Normalize one raw record into a CodeDocument or a rejection.
///
/// Checks run in order: size cutoff, registry inclusion by extension, UTF-8
/// decode (strict: no NUL bytes, no overlong/surrogate/out-of-range
/// sequences). ".ipynb" files are additionally converted from notebook JSON
/// into triplet form. Pure function of (byte length, extension, bytes).
PreprocessResult preprocess(const RawRecord& record, const LanguageRegistry& registry);

/// Scorer signature for classifier-backed text recall.
using TextScorer = std::function<double(const std::string&)>;

/// Keep/drop decision for a category-text document.
///
/// Keep when the lowercased filename contains "requirement" or the lowercased
/// stem is one of {readme, notes, todo, description, cmakelists}; otherwise
/// keep iff `scorer` is provided and scores the content above `threshold`;
/// otherwise drop.
bool recall_text_file(const CodeDocument& doc, const TextScorer& scorer = nullptr,
                      double threshold = 0.5);

/// True iff `bytes` is well-formed UTF-8 with no NUL bytes.
bool is_valid_utf8(const std::string& bytes);

}  // namespace codesift
