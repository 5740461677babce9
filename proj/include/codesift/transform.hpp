#pragma once

#include <cstddef>
#include <regex>
#include <string>
#include <vector>

#include "codesift/document.hpp"

namespace codesift {

/// One redaction rule from the catalog data file.
///
/// `replacement` is the regex replacement template actually applied (defaults
/// to the placeholder when the catalog omits it; templates may keep captured
/// context, e.g. "$1<password>$3"). `icase` comes from the optional "flags"
/// field containing 'i'.
struct RedactionRule {
    std::string name;
    std::string pattern;
    std::string placeholder;  // "<email>", "<ip>", "<password>", "<name>", "<key>"
    std::string replacement;
    bool icase = false;
    std::regex compiled;
};

/// PII redaction catalog loaded from a structured data file
/// {name, pattern, placeholder[, replacement][, flags]}.
///
/// Patterns compile at load time; a malformed pattern raises ConfigError
/// then, never during a scan.
class RedactionCatalog {
public:
    static RedactionCatalog load(const std::string& path);
    static const RedactionCatalog& builtin();  // loads data/redaction.json once

    const std::vector<RedactionRule>& rules() const { return rules_; }

private:
    std::vector<RedactionRule> rules_;
};

/// Remove leading copyright comment blocks.
///
/// A candidate block is a contiguous run of comment lines (by line-start
/// heuristics: //, #, --, ;, %, /*, *, */, <!--) beginning within the first
/// 50 lines; it is removed iff some line matches "copyright", "(c)" or
/// "all rights reserved" case-insensitively. A leading shebang line is never
/// part of a block. Applied to fixpoint so the transform is idempotent;
/// all bytes after the removed block are untouched.
CodeDocument strip_copyright(const CodeDocument& doc);

struct RedactionOutcome {
    CodeDocument doc;
    std::size_t redactions = 0;
};

/// Replace every catalog match with its placeholder.
///
/// Rules apply in catalog order; placeholders never re-match any shipped
/// pattern, so the transform is idempotent. Non-matching text is
/// byte-identical.
RedactionOutcome redact_pii(const CodeDocument& doc,
                            const RedactionCatalog& catalog = RedactionCatalog::builtin());

}  // namespace codesift
