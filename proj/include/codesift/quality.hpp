#pragma once

#include <map>
#include <string>
#include <vector>

#include "codesift/document.hpp"

namespace codesift {

/// Signal name -> numeric score. Ratios lie in [0,1] (0/0 is defined as 0),
/// counts are >= 0, booleans are {0,1}. Signals outside a document's
/// language scope are omitted, never zero-filled, so presence in the map
/// means the signal was actually computed.
using QualitySignalVector = std::map<std::string, double>;

/// One threshold rule from the declarative registry. `name` is the reason
/// string emitted when the rule fires (defaults to the signal name).
/// `languages` empty means the rule applies to every language.
struct QualityRule {
    std::string name;
    std::string signal;
    std::string comparator;  // ">", "<" or "=="
    double threshold = 0.0;
    std::vector<std::string> languages;
    std::string category;  // natural-language | general-code | language-specific
    bool enabled = true;
    std::string note;

    bool operator==(const QualityRule&) const = default;
};

/// Outcome of apply_filters for one document. kept <=> reasons empty.
struct FilterVerdict {
    std::string id;
    bool kept = true;
    std::vector<std::string> reasons;

    bool operator==(const FilterVerdict&) const = default;
};

/// A registered signal and its language scope (empty = all languages).
struct SignalInfo {
    std::string name;
    std::vector<std::string> languages;
};

/// Every signal compute_signals can produce, with its scope. Rules are
/// validated against this list at load time, never at scan time.
const std::vector<SignalInfo>& signal_registry();

/// True when `signal` is computed for documents of `language`.
bool signal_in_scope(const std::string& signal, const std::string& language);

/// Validated rule set loaded from the structured registry file
/// (entries {name?, signal, comparator, threshold, languages, category,
/// enabled?, note?}). Load raises ConfigError for unknown signals, bad
/// comparators or categories, non-finite thresholds, rule scopes wider
/// than the signal's scope, and duplicate rule names.
class RuleRegistry {
public:
    static RuleRegistry load(const std::string& path);
    static RuleRegistry from_rules(std::vector<QualityRule> rules);
    static const RuleRegistry& builtin();  // loads data/rules.json once

    const std::vector<QualityRule>& rules() const { return rules_; }

private:
    std::vector<QualityRule> rules_;
};

/// Computes every in-scope signal for the document. Pure function of
/// (content, language); deterministic and order-independent across
/// documents. See data/rules.json for the operationalization notes.
QualitySignalVector compute_signals(const CodeDocument& doc);

/// Evaluates the registry against one document's signals. A rule fires
/// when it is enabled, the document's language is in its scope, and its
/// comparator holds on the signal value. Reasons keep registry order.
FilterVerdict apply_filters(const CodeDocument& doc, const QualitySignalVector& signals,
                            const RuleRegistry& registry);

/// compute_signals + apply_filters in one step.
FilterVerdict filter_document(const CodeDocument& doc, const RuleRegistry& registry);

struct QualityResult {
    std::vector<CodeDocument> kept;       // input order preserved
    std::vector<FilterVerdict> verdicts;  // one per input document
};

/// Filters a corpus with per-document parallelism. Output is independent
/// of the worker count.
QualityResult filter_corpus(const std::vector<CodeDocument>& docs, const RuleRegistry& registry,
                            int workers = 0);

/// JSON-lines verdict sidecar: one {id, kept, reasons} object per line.
std::string verdict_jsonl(const std::vector<FilterVerdict>& verdicts);

/// Fixed-width histogram over [lo, hi]; scores outside the range land in
/// the edge bins, so total always equals the number of scored documents.
struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::size_t> counts;
    std::size_t total = 0;
};

/// Per-language histograms of one signal across the corpus. Documents
/// whose language is outside the signal's scope are skipped. Raises
/// ConfigError for an unregistered signal.
std::map<std::string, Histogram> signal_histograms(const std::vector<CodeDocument>& docs,
                                                   const std::string& signal, std::size_t bins,
                                                   double lo = 0.0, double hi = 1.0,
                                                   int workers = 0);

/// Histograms over externally supplied (language, score) pairs — the
/// import path for scores produced outside this library (for example a
/// model-based column) so they can be inspected with the same tooling.
std::map<std::string, Histogram> score_histograms(
    const std::vector<std::pair<std::string, double>>& language_scores, std::size_t bins,
    double lo = 0.0, double hi = 1.0);

/// Ids of documents dropped exclusively by `candidate`: the candidate
/// fires and no other enabled rule in the registry does. This is the
/// inspection set used when tuning a threshold. Order follows the corpus.
std::vector<std::string> exclusive_hits(const std::vector<CodeDocument>& docs,
                                        const RuleRegistry& registry, const QualityRule& candidate);

}  // namespace codesift
