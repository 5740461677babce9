#include "codesift/curate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <nlohmann/json.hpp>

#include "codesift/hashing.hpp"
#include "codesift/parallel.hpp"

namespace codesift {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0 || c == '_'; }

bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
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

bool contains_word(std::string_view text, std::string_view word) {
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string_view::npos) {
        const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        const std::size_t after = pos + word.size();
        const bool right_ok = after >= text.size() || !is_word_char(text[after]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Downsampling
// ---------------------------------------------------------------------------

std::vector<CodeDocument> downsample_language(const std::vector<CodeDocument>& corpus,
                                              const std::string& language, double keep_ratio,
                                              std::uint64_t seed) {
    if (!(keep_ratio > 0.0) || keep_ratio > 1.0)
        throw ConfigError("curate: keep_ratio must be in (0, 1]");
    std::vector<CodeDocument> out;
    out.reserve(corpus.size());
    for (const auto& doc : corpus) {
        if (doc.language == language && hash_coin(seed, doc.id) >= keep_ratio) continue;
        out.push_back(doc);
    }
    return out;
}

double keep_ratio_for_budget(const std::vector<CodeDocument>& corpus, const std::string& language,
                             std::size_t target_bytes) {
    std::size_t actual = 0;
    for (const auto& doc : corpus)
        if (doc.language == language) actual += doc.content.size();
    if (actual == 0) return 1.0;
    return std::min(1.0, static_cast<double>(target_bytes) / static_cast<double>(actual));
}

// ---------------------------------------------------------------------------
// Algorithmic extraction
// ---------------------------------------------------------------------------

std::vector<CodeDocument> extract_algorithmic(const std::vector<CodeDocument>& corpus,
                                              const std::vector<std::string>& keywords) {
    if (keywords.empty()) throw ConfigError("curate: keyword list must not be empty");
    std::vector<CodeDocument> out;
    for (const auto& doc : corpus) {
        for (const auto& keyword : keywords) {
            if (contains_ci(doc.content, keyword)) {
                out.push_back(doc);
                break;
            }
        }
    }
    return out;
}

const std::vector<std::string>& default_algorithmic_keywords() {
    static const std::vector<std::string> kKeywords = {"leetcode", "def solution",
                                                       "class solution"};
    return kKeywords;
}

// ---------------------------------------------------------------------------
// Mixture assembly
// ---------------------------------------------------------------------------

void MixtureSpec::validate() const {
    if (components.empty()) throw ConfigError("curate: mixture spec has no components");
    double sum = 0.0;
    std::set<std::string> names;
    for (const auto& component : components) {
        if (component.weight < 0.0)
            throw ConfigError("curate: mixture weight for '" + component.name + "' is negative");
        if (!names.insert(component.name).second)
            throw ConfigError("curate: duplicate mixture component '" + component.name + "'");
        sum += component.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("curate: mixture weights must sum to 1 (got " + std::to_string(sum) +
                          ")");
}

MixtureSpec MixtureSpec::defaults() {
    MixtureSpec spec;
    spec.components = {
        {"original", "original", 0.8394},
        {"algorithmic", "algorithmic", 0.1244},
        {"snippets", "snippets", 0.0271},
        {"textbooks", "textbooks", 0.0091},
    };
    return spec;
}

MixtureResult assemble_mixture(const std::map<std::string, std::vector<CodeDocument>>& sources,
                               const MixtureSpec& spec, std::size_t total_tokens,
                               std::uint64_t seed) {
    spec.validate();

    struct Shard {
        std::vector<const CodeDocument*> docs;  // pre-shuffled, consumed front-first
        std::size_t next = 0;
        double target = 0.0;
        std::size_t taken_tokens = 0;
        std::size_t taken_docs = 0;
    };
    std::vector<Shard> shards(spec.components.size());

    for (std::size_t c = 0; c < spec.components.size(); ++c) {
        const auto& component = spec.components[c];
        const std::string& key = component.source.empty() ? component.name : component.source;
        const auto it = sources.find(key);
        if (it == sources.end())
            throw ConfigError("curate: mixture component '" + component.name + "' has no source '" +
                              key + "'");
        Shard& shard = shards[c];
        shard.target = component.weight * static_cast<double>(total_tokens);
        shard.docs.reserve(it->second.size());
        for (const auto& doc : it->second) shard.docs.push_back(&doc);
        // Seed-keyed shuffle: order by hash of (seed, component, id); id
        // breaks hash ties so the order is total and input-order free.
        const std::uint64_t shard_seed = seed ^ hash_bytes(component.name, 0x5eedu);
        std::sort(shard.docs.begin(), shard.docs.end(),
                  [&](const CodeDocument* a, const CodeDocument* b) {
                      const auto ha = hash_bytes(a->id, shard_seed);
                      const auto hb = hash_bytes(b->id, shard_seed);
                      if (ha != hb) return ha < hb;
                      return a->id < b->id;
                  });
    }

    MixtureResult result;
    std::size_t emitted_tokens = 0;
    while (emitted_tokens < total_tokens) {
        // The component furthest below target that still has documents.
        std::size_t best = shards.size();
        double best_deficit = 0.0;
        for (std::size_t c = 0; c < shards.size(); ++c) {
            const Shard& shard = shards[c];
            if (shard.next >= shard.docs.size()) continue;
            const double deficit = shard.target - static_cast<double>(shard.taken_tokens);
            if (deficit <= 0.0) continue;  // component satisfied
            if (best == shards.size() || deficit > best_deficit) {
                best = c;
                best_deficit = deficit;
            }
        }
        if (best == shards.size()) break;  // everyone satisfied or exhausted

        Shard& shard = shards[best];
        const CodeDocument& doc = *shard.docs[shard.next++];
        const std::size_t tokens = count_whitespace_tokens(doc.content);
        shard.taken_tokens += tokens;
        shard.taken_docs += 1;
        emitted_tokens += tokens;
        result.mixed.push_back(doc);
    }

    result.total_tokens = emitted_tokens;
    for (std::size_t c = 0; c < shards.size(); ++c) {
        const Shard& shard = shards[c];
        MixtureComponentReport row;
        row.name = spec.components[c].name;
        row.target_share = spec.components[c].weight;
        row.docs = shard.taken_docs;
        row.tokens = shard.taken_tokens;
        row.achieved_share = emitted_tokens == 0 ? 0.0
                                                 : static_cast<double>(shard.taken_tokens) /
                                                       static_cast<double>(emitted_tokens);
        // Unmet deficit counts as shortfall only when the source ran dry.
        const double deficit = shard.target - static_cast<double>(shard.taken_tokens);
        if (deficit > 0.0 && shard.next >= shard.docs.size())
            row.shortfall_tokens = static_cast<std::size_t>(std::ceil(deficit));
        if (row.shortfall_tokens > 0) result.shortfall = true;
        result.report.push_back(std::move(row));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Star filter
// ---------------------------------------------------------------------------

StarFilterResult star_filter(const std::vector<CodeDocument>& corpus, std::int64_t min_stars) {
    StarFilterResult result;
    for (const auto& doc : corpus) {
        auto& before = result.before[doc.language];
        before.files += 1;
        before.bytes += doc.content.size();
        if (doc.stars >= min_stars) {
            auto& after = result.after[doc.language];
            after.files += 1;
            after.bytes += doc.content.size();
            result.kept.push_back(doc);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Decontamination
// ---------------------------------------------------------------------------

std::vector<std::string> text_ngrams(const std::string& text, std::size_t n) {
    std::vector<std::string> tokens;
    for (auto token : whitespace_tokens(text)) {
        std::string lowered(token);
        for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        tokens.push_back(std::move(lowered));
    }
    std::vector<std::string> ngrams;
    if (n == 0 || tokens.size() < n) return ngrams;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string gram = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            gram += ' ';
            gram += tokens[i + j];
        }
        ngrams.push_back(std::move(gram));
    }
    return ngrams;
}

TestCorpusIndex build_test_index(const std::vector<std::string>& benchmark_texts,
                                 const std::vector<std::string>& entry_points, std::size_t n) {
    if (n == 0) throw ConfigError("curate: n-gram size must be >= 1");
    TestCorpusIndex index;
    index.n = n;
    index.entry_points.insert(entry_points.begin(), entry_points.end());
    for (const auto& text : benchmark_texts)
        for (auto& gram : text_ngrams(text, n)) index.ngrams.insert(std::move(gram));
    return index;
}

DecontaminateResult decontaminate(const std::vector<CodeDocument>& corpus,
                                  const TestCorpusIndex& index, bool allow_empty_index,
                                  int workers) {
    if (index.empty() && !allow_empty_index)
        throw ConfigError(
            "curate: decontamination index is empty; pass the explicit opt-out to skip");

    // First matching evidence per document, found in parallel.
    std::vector<RemovalRecord> hits(corpus.size());
    std::vector<char> removed(corpus.size(), 0);
    parallel_for(corpus.size(), resolve_workers(workers), [&](std::size_t i) {
        const CodeDocument& doc = corpus[i];
        for (const auto& entry : index.entry_points) {
            if (contains_word(doc.content, entry)) {
                hits[i] = {doc.id, "entry-point", entry};
                removed[i] = 1;
                return;
            }
        }
        for (auto& gram : text_ngrams(doc.content, index.n)) {
            if (index.ngrams.count(gram)) {
                hits[i] = {doc.id, "ngram", std::move(gram)};
                removed[i] = 1;
                return;
            }
        }
    });

    DecontaminateResult result;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (removed[i])
            result.removed.push_back(std::move(hits[i]));
        else
            result.kept.push_back(corpus[i]);
    }
    return result;
}

std::string removal_report_jsonl(const std::vector<RemovalRecord>& removed) {
    std::string out;
    for (const auto& record : removed) {
        nlohmann::json obj;
        obj["id"] = record.id;
        obj["reason"] = record.reason;
        obj["evidence"] = record.evidence;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}  // namespace codesift
