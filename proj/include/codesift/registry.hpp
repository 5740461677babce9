#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "codesift/document.hpp"

namespace codesift {

struct LanguageRegistryEntry {
    std::string name;
    std::vector<std::string> extensions;  // lowercase, with leading dot
    Category category = Category::code;
    bool included = false;
};

/// Extension -> language registry loaded from a structured data file.
///
/// The shipped registry carries the full included (code/data/text) and
/// excluded language lists. One extension may be claimed by several
/// languages; ties among included entries are broken by the data file's
/// collision_priority list, so detection is a pure function of the
/// extension. Content-based detection is out of scope.
class LanguageRegistry {
public:
    static LanguageRegistry load(const std::string& path);
    static const LanguageRegistry& builtin();  // loads data/languages.json once

    /// Included entry for an extension (".py"), or nullopt if the
    /// extension is unknown or maps only to excluded languages.
    std::optional<LanguageRegistryEntry> lookup_extension(std::string extension) const;

    /// True if the extension belongs to a language on the excluded list.
    bool is_excluded_extension(std::string extension) const;

    const LanguageRegistryEntry* language_entry(const std::string& name) const;

    std::size_t included_count() const { return included_count_; }
    const std::vector<LanguageRegistryEntry>& entries() const { return entries_; }

private:
    std::vector<LanguageRegistryEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::unordered_map<std::string, std::size_t> include_by_ext_;
    std::unordered_map<std::string, std::size_t> exclude_by_ext_;
    std::size_t included_count_ = 0;
};

/// Resolves a shipped data asset: explicit dir > $CODESIFT_DATA > the
/// directory compiled in at build time.
std::string default_data_file(const std::string& filename);

/// Lowercased extension of a path including the dot ("src/Main.PY" -> ".py").
/// Empty when the filename has no extension.
std::string path_extension(const std::string& path);

/// Filename stem, lowercased ("docs/README.md" -> "readme").
std::string path_stem_lower(const std::string& path);
std::string path_filename_lower(const std::string& path);

}  // namespace codesift
