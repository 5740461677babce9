#include "codesift/dedup.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "codesift/hashing.hpp"
#include "codesift/parallel.hpp"

namespace codesift {
namespace {

// Base hash applied to each shingle before the per-index affine family.
constexpr std::uint64_t kShingleSalt = 0x5ab41ac1f0e9a0c3ULL;

// One dedup unit: a file, a whole repository, or a chunk.
struct Unit {
    std::string id;
    std::vector<std::size_t> doc_indices;  // into the input vector
    std::string content;
    std::int64_t stars = 0;
    std::int64_t commit_time = 0;
};

// Representative rule: max (stars, commit_time), final tie to smallest id.
bool better_representative(const Unit& a, const Unit& b) {
    if (a.stars != b.stars) return a.stars > b.stars;
    if (a.commit_time != b.commit_time) return a.commit_time > b.commit_time;
    return a.id < b.id;
}

std::vector<Unit> file_units(const std::vector<CodeDocument>& docs) {
    std::vector<Unit> units;
    units.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        units.push_back({docs[i].id, {i}, docs[i].content, docs[i].stars, docs[i].commit_time});
    }
    return units;
}

std::vector<Unit> repo_units(const std::vector<CodeDocument>& docs) {
    // Group by repo; empty-repo documents stay singleton units keyed by id.
    std::map<std::string, std::vector<std::size_t>> by_repo;
    std::vector<Unit> units;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].repo.empty()) {
            units.push_back({docs[i].id, {i}, docs[i].content, docs[i].stars, docs[i].commit_time});
        } else {
            by_repo[docs[i].repo].push_back(i);
        }
    }
    for (auto& [repo, indices] : by_repo) {
        std::sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            if (docs[a].path != docs[b].path) return docs[a].path < docs[b].path;
            return docs[a].id < docs[b].id;
        });
        Unit u;
        u.id = repo;
        u.doc_indices = indices;
        for (std::size_t i : indices) {
            u.content += docs[i].content;
            u.stars = std::max(u.stars, docs[i].stars);
            u.commit_time = std::max(u.commit_time, docs[i].commit_time);
        }
        units.push_back(std::move(u));
    }
    std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) {
        return a.doc_indices.front() < b.doc_indices.front();
    });
    return units;
}

// Disjoint-set forest with path compression.
struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void merge(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Collapse grouped units into a DedupResult over the original documents.
DedupResult collapse(const std::vector<CodeDocument>& docs, const std::vector<Unit>& units,
                     const std::vector<std::vector<std::size_t>>& unit_groups, DedupLevel level,
                     const char* kind, const char* drop_reason) {
    DedupResult result;
    result.level = std::string(to_string(level));
    result.kind = kind;

    std::vector<bool> unit_retained(units.size(), true);
    for (const auto& group : unit_groups) {
        if (group.size() < 2) continue;
        std::size_t best = group.front();
        for (std::size_t u : group)
            if (better_representative(units[u], units[best])) best = u;
        DedupGroup g;
        g.representative = units[best].id;
        for (std::size_t u : group) {
            g.members.push_back(units[u].id);
            if (u != best) unit_retained[u] = false;
        }
        std::sort(g.members.begin(), g.members.end());
        result.groups.push_back(std::move(g));
    }
    std::sort(result.groups.begin(), result.groups.end(),
              [](const DedupGroup& a, const DedupGroup& b) {
                  return a.representative < b.representative;
              });

    if (level == DedupLevel::chunk) {
        // Chunk units are synthetic documents; emit them directly in chunk order.
        for (std::size_t u = 0; u < units.size(); ++u) {
            if (unit_retained[u]) {
                CodeDocument chunk;
                chunk.id = units[u].id;
                chunk.path = units[u].id;
                chunk.content = units[u].content;
                result.retained.push_back(std::move(chunk));
            } else {
                result.dropped.push_back({units[u].id, drop_reason});
            }
        }
        return result;
    }

    std::vector<bool> doc_retained(docs.size(), true);
    for (std::size_t u = 0; u < units.size(); ++u)
        if (!unit_retained[u])
            for (std::size_t i : units[u].doc_indices) doc_retained[i] = false;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (doc_retained[i])
            result.retained.push_back(docs[i]);
        else
            result.dropped.push_back({docs[i].id, drop_reason});
    }
    return result;
}

std::vector<Unit> make_units(const std::vector<CodeDocument>& docs, DedupLevel level,
                             const FuzzyParams* fuzzy) {
    switch (level) {
        case DedupLevel::file:
            return file_units(docs);
        case DedupLevel::repo:
            return repo_units(docs);
        case DedupLevel::chunk: {
            if (fuzzy == nullptr) throw ConfigError("chunk level requires fuzzy parameters");
            auto chunks = chunk_corpus(docs, fuzzy->chunk_tokens, fuzzy->seed);
            return file_units(chunks);
        }
    }
    throw ConfigError("unknown dedup level");
}

struct HashFamily {
    std::vector<std::uint64_t> a;  // odd multipliers
    std::vector<std::uint64_t> b;
};

HashFamily make_family(std::uint64_t seed, int num_hashes) {
    HashFamily family;
    family.a.resize(static_cast<std::size_t>(num_hashes));
    family.b.resize(static_cast<std::size_t>(num_hashes));
    std::uint64_t state = seed;
    for (int i = 0; i < num_hashes; ++i) {
        family.a[static_cast<std::size_t>(i)] = splitmix64(state) | 1ULL;
        family.b[static_cast<std::size_t>(i)] = splitmix64(state);
    }
    return family;
}

MinHashSignature sign_with_family(const std::set<std::string>& shingles, std::uint64_t seed,
                                  const HashFamily& family) {
    if (shingles.empty()) throw StageError("empty-document");
    const std::size_t n = family.a.size();
    MinHashSignature sig;
    sig.seed = seed;
    sig.values.assign(n, ~0ULL);
    for (const std::string& s : shingles) {
        const std::uint64_t x = hash_bytes(s, kShingleSalt);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t v = family.a[i] * x + family.b[i];
            if (v < sig.values[i]) sig.values[i] = v;
        }
    }
    return sig;
}

void check_compatible(const std::vector<MinHashSignature>& sigs) {
    for (std::size_t i = 1; i < sigs.size(); ++i) {
        if (sigs[i].seed != sigs[0].seed || sigs[i].values.size() != sigs[0].values.size())
            throw StageError("incompatible-signatures");
    }
}

std::uint64_t tokens_of(const std::vector<CodeDocument>& docs) {
    std::uint64_t total = 0;
    for (const auto& d : docs) total += count_whitespace_tokens(d.content);
    return total;
}

}  // namespace

DedupLevel dedup_level_from_string(std::string_view s) {
    if (s == "file") return DedupLevel::file;
    if (s == "repo") return DedupLevel::repo;
    if (s == "chunk") return DedupLevel::chunk;
    throw ConfigError("unknown dedup level: " + std::string(s));
}

std::string_view to_string(DedupLevel level) {
    switch (level) {
        case DedupLevel::file:
            return "file";
        case DedupLevel::repo:
            return "repo";
        case DedupLevel::chunk:
            return "chunk";
    }
    return "unknown";
}

void FuzzyParams::validate() const {
    if (num_hashes <= 0 || num_bands <= 0 || rows_per_band <= 0)
        throw ConfigError("minhash geometry must be positive");
    if (num_bands * rows_per_band != num_hashes)
        throw ConfigError("num_bands * rows_per_band must equal num_hashes (got " +
                          std::to_string(num_bands) + " * " + std::to_string(rows_per_band) +
                          " != " + std::to_string(num_hashes) + ")");
    if (threshold < 0.0 || threshold > 1.0) throw ConfigError("fuzzy threshold must be in [0, 1]");
    if (chunk_tokens <= 0) throw ConfigError("chunk_tokens must be positive");
}

DedupResult exact_dedup(const std::vector<CodeDocument>& docs, DedupLevel level) {
    if (level == DedupLevel::chunk)
        throw ConfigError("exact dedup supports file and repo levels only");
    std::vector<Unit> units = make_units(docs, level, nullptr);

    std::map<std::string, std::vector<std::size_t>> by_digest;
    for (std::size_t u = 0; u < units.size(); ++u)
        by_digest[to_hex(sha256(units[u].content))].push_back(u);

    std::vector<std::vector<std::size_t>> groups;
    for (auto& [digest, members] : by_digest) groups.push_back(members);
    return collapse(docs, units, groups, level, "exact", "exact-dup");
}

std::set<std::string> shingle(const std::string& content) {
    std::vector<std::string_view> tokens = whitespace_tokens(content);
    std::set<std::string> out;
    if (tokens.empty()) return out;
    auto join = [](const std::vector<std::string_view>& toks, std::size_t begin,
                   std::size_t count) {
        std::string s;
        for (std::size_t i = begin; i < begin + count; ++i) {
            if (i > begin) s += ' ';
            s += toks[i];
        }
        return s;
    };
    if (tokens.size() < 5) {
        out.insert(join(tokens, 0, tokens.size()));
        return out;
    }
    for (std::size_t i = 0; i + 5 <= tokens.size(); ++i) out.insert(join(tokens, i, 5));
    return out;
}

MinHashSignature minhash_signature(const std::set<std::string>& shingles, std::uint64_t seed,
                                   int num_hashes) {
    if (num_hashes <= 0) throw ConfigError("num_hashes must be positive");
    return sign_with_family(shingles, seed, make_family(seed, num_hashes));
}

double estimated_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
    if (a.seed != b.seed || a.values.size() != b.values.size() || a.values.empty())
        throw StageError("incompatible-signatures");
    std::size_t match = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (a.values[i] == b.values[i]) ++match;
    return static_cast<double>(match) / static_cast<double>(a.values.size());
}

std::vector<std::pair<std::size_t, std::size_t>> lsh_candidates(
    const std::vector<MinHashSignature>& signatures, int num_bands, int rows_per_band) {
    check_compatible(signatures);
    if (!signatures.empty() &&
        signatures[0].values.size() !=
            static_cast<std::size_t>(num_bands) * static_cast<std::size_t>(rows_per_band))
        throw StageError("incompatible-signatures");

    std::set<std::pair<std::size_t, std::size_t>> pairs;
    const std::size_t rows = static_cast<std::size_t>(rows_per_band);
    for (int band = 0; band < num_bands; ++band) {
        std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
        const std::size_t offset = static_cast<std::size_t>(band) * rows;
        for (std::size_t i = 0; i < signatures.size(); ++i) {
            const auto* data = signatures[i].values.data() + offset;
            std::uint64_t key = hash_bytes(
                std::string_view(reinterpret_cast<const char*>(data), rows * sizeof(std::uint64_t)),
                static_cast<std::uint64_t>(band) + 1);
            buckets[key].push_back(i);
        }
        for (const auto& [key, members] : buckets) {
            for (std::size_t x = 0; x < members.size(); ++x)
                for (std::size_t y = x + 1; y < members.size(); ++y)
                    pairs.emplace(members[x], members[y]);
        }
    }
    return {pairs.begin(), pairs.end()};
}

DedupResult fuzzy_dedup(const std::vector<CodeDocument>& docs, DedupLevel level,
                        const FuzzyParams& params) {
    params.validate();
    std::vector<Unit> units = make_units(docs, level, &params);

    // Sign every unit with a non-empty shingle set; empties pass through.
    std::vector<std::set<std::string>> shingle_sets(units.size());
    std::vector<std::size_t> signable;
    for (std::size_t u = 0; u < units.size(); ++u) {
        shingle_sets[u] = shingle(units[u].content);
        if (!shingle_sets[u].empty()) signable.push_back(u);
    }

    const HashFamily family = make_family(params.seed, params.num_hashes);
    std::vector<MinHashSignature> sigs(signable.size());
    parallel_for(signable.size(), params.workers, [&](std::size_t k) {
        sigs[k] = sign_with_family(shingle_sets[signable[k]], params.seed, family);
    });

    auto candidates = lsh_candidates(sigs, params.num_bands, params.rows_per_band);

    UnionFind uf(units.size());
    for (const auto& [x, y] : candidates) {
        if (estimated_jaccard(sigs[x], sigs[y]) >= params.threshold)
            uf.merge(signable[x], signable[y]);
    }

    std::map<std::size_t, std::vector<std::size_t>> by_root;
    for (std::size_t u = 0; u < units.size(); ++u) by_root[uf.find(u)].push_back(u);
    std::vector<std::vector<std::size_t>> groups;
    for (auto& [root, members] : by_root) groups.push_back(members);
    return collapse(docs, units, groups, level, "fuzzy", "fuzzy-dup");
}

std::vector<CodeDocument> chunk_corpus(const std::vector<CodeDocument>& docs, int chunk_tokens,
                                       std::uint64_t seed) {
    if (chunk_tokens <= 0) throw ConfigError("chunk_tokens must be positive");
    // Seeded random concatenation order: sort by keyed hash of the id.
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const std::uint64_t ha = hash_bytes(docs[a].id, seed);
        const std::uint64_t hb = hash_bytes(docs[b].id, seed);
        if (ha != hb) return ha < hb;
        return docs[a].id < docs[b].id;
    });

    std::vector<CodeDocument> chunks;
    std::string current;
    std::size_t current_tokens = 0;
    auto flush = [&]() {
        if (current_tokens == 0) return;
        CodeDocument chunk;
        chunk.id = "chunk-" + std::to_string(chunks.size());
        chunk.path = chunk.id;
        chunk.content = std::move(current);
        chunks.push_back(std::move(chunk));
        current.clear();
        current_tokens = 0;
    };
    for (std::size_t i : order) {
        for (std::string_view tok : whitespace_tokens(docs[i].content)) {
            if (!current.empty()) current += ' ';
            current += tok;
            if (++current_tokens == static_cast<std::size_t>(chunk_tokens)) flush();
        }
    }
    flush();
    return chunks;
}

std::vector<StrategyRow> compare_strategies(const std::vector<CodeDocument>& docs,
                                            const FuzzyParams& params) {
    params.validate();
    const std::uint64_t rows_in = docs.size();

    auto run_level = [&](const std::vector<CodeDocument>& input, DedupLevel level) {
        std::vector<CodeDocument> out;
        if (level == DedupLevel::chunk) {
            out = fuzzy_dedup(input, DedupLevel::chunk, params).retained;
        } else {
            out = exact_dedup(input, level).retained;
            out = fuzzy_dedup(out, level, params).retained;
        }
        return out;
    };

    std::vector<StrategyRow> rows;
    auto add = [&](const std::string& name, const std::vector<CodeDocument>& out) {
        rows.push_back({name, rows_in, out.size(), tokens_of(out)});
    };

    add("file", run_level(docs, DedupLevel::file));
    add("repo", run_level(docs, DedupLevel::repo));
    add("chunk", run_level(docs, DedupLevel::chunk));
    add("repo+chunk", run_level(run_level(docs, DedupLevel::repo), DedupLevel::chunk));
    add("file+chunk", run_level(run_level(docs, DedupLevel::file), DedupLevel::chunk));
    add("repo-then-file", run_level(run_level(docs, DedupLevel::repo), DedupLevel::file));
    return rows;
}

std::string format_strategy_table(const std::vector<StrategyRow>& rows) {
    std::ostringstream out;
    out << "strategy        rows_in   rows_out  tokens_out\n";
    for (const auto& r : rows) {
        out << r.strategy;
        for (std::size_t i = r.strategy.size(); i < 16; ++i) out << ' ';
        std::string a = std::to_string(r.rows_in);
        std::string b = std::to_string(r.rows_out);
        std::string c = std::to_string(r.tokens_out);
        for (std::size_t i = a.size(); i < 7; ++i) out << ' ';
        out << a << "  ";
        for (std::size_t i = b.size(); i < 8; ++i) out << ' ';
        out << b << "  ";
        for (std::size_t i = c.size(); i < 10; ++i) out << ' ';
        out << c << '\n';
    }
    return out.str();
}

std::string group_report_jsonl(const DedupResult& result) {
    std::string out;
    for (const auto& g : result.groups) {
        nlohmann::json j;
        j["representative_id"] = g.representative;
        j["member_ids"] = g.members;
        j["level"] = result.level;
        j["kind"] = result.kind;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace codesift
