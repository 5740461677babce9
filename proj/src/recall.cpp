#include "codesift/recall.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codesift/hashing.hpp"
#include "codesift/parallel.hpp"
#include "codesift/registry.hpp"

namespace codesift {

namespace {

using nlohmann::json;

// Salt for n-gram bucket hashing, offset by the gram order so a unigram
// and a bigram with the same bytes land in independent buckets.
constexpr std::uint64_t kNgramSalt = 0x6d4e7a21c35bf841ULL;

// ---------------------------------------------------------------------------
// BPE
// ---------------------------------------------------------------------------

// Alternating maximal non-whitespace / whitespace runs. Concatenating the
// pieces reproduces the text exactly, which is what makes decode == concat
// a true inverse.
std::vector<std::string> split_pieces(std::string_view text) {
    std::vector<std::string> pieces;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool ws = std::isspace(static_cast<unsigned char>(text[i])) != 0;
        std::size_t j = i;
        while (j < text.size() && (std::isspace(static_cast<unsigned char>(text[j])) != 0) == ws)
            ++j;
        pieces.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return pieces;
}

std::vector<std::string> to_symbols(const std::string& piece) {
    std::vector<std::string> symbols;
    symbols.reserve(piece.size());
    for (char c : piece) symbols.emplace_back(1, c);
    return symbols;
}

// One left-to-right merge pass; after a merge the new symbol may combine
// with the following one, so the scan does not skip ahead.
void apply_merge(std::vector<std::string>& symbols, const std::string& first,
                 const std::string& second, const std::string& joined) {
    std::size_t i = 0;
    while (i + 1 < symbols.size()) {
        if (symbols[i] == first && symbols[i + 1] == second) {
            symbols[i] = joined;
            symbols.erase(symbols.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        } else {
            ++i;
        }
    }
}

}  // namespace

BpeModel train_bpe(const std::vector<std::string>& corpus, std::size_t vocab_size) {
    if (vocab_size < 256)
        throw ConfigError("recall: BPE vocab_size must cover the 256-byte base alphabet");

    // Piece frequency table; merging operates on distinct pieces weighted
    // by their counts.
    std::map<std::string, std::size_t> piece_counts;
    for (const auto& text : corpus)
        for (auto& piece : split_pieces(text)) ++piece_counts[piece];

    std::vector<std::pair<std::vector<std::string>, std::size_t>> pieces;
    pieces.reserve(piece_counts.size());
    for (const auto& [piece, count] : piece_counts) pieces.emplace_back(to_symbols(piece), count);

    BpeModel model;
    const std::size_t target_merges = vocab_size - 256;
    while (model.merges.size() < target_merges) {
        std::map<std::pair<std::string, std::string>, std::size_t> pair_counts;
        for (const auto& [symbols, count] : pieces)
            for (std::size_t i = 0; i + 1 < symbols.size(); ++i)
                pair_counts[{symbols[i], symbols[i + 1]}] += count;
        if (pair_counts.empty()) break;  // every piece is a single symbol

        // Highest count wins; the map's lexicographic key order makes the
        // first maximal entry the smallest pair, the documented tie-break.
        auto best = pair_counts.begin();
        for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it)
            if (it->second > best->second) best = it;

        const auto [first, second] = best->first;
        const std::string joined = first + second;
        for (auto& [symbols, count] : pieces) apply_merge(symbols, first, second, joined);
        model.merges.emplace_back(first, second);
    }
    return model;
}

std::vector<std::string> BpeModel::encode(const std::string& text) const {
    std::vector<std::string> tokens;
    for (const auto& piece : split_pieces(text)) {
        auto symbols = to_symbols(piece);
        for (const auto& [first, second] : merges)
            apply_merge(symbols, first, second, first + second);
        tokens.insert(tokens.end(), symbols.begin(), symbols.end());
    }
    return tokens;
}

std::string BpeModel::decode(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& token : tokens) out += token;
    return out;
}

// ---------------------------------------------------------------------------
// Classifier
// ---------------------------------------------------------------------------

void RecallModelConfig::validate() const {
    if (dim == 0) throw ConfigError("recall: dim must be >= 1");
    if (buckets == 0) throw ConfigError("recall: buckets must be >= 1");
    if (max_ngram < 1) throw ConfigError("recall: max_ngram must be >= 1");
    if (epochs < 1) throw ConfigError("recall: epochs must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("recall: lr must be positive");
    if (bpe_vocab < 256) throw ConfigError("recall: bpe_vocab must be >= 256");
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
        throw ConfigError("recall: holdout_fraction must be in [0,1)");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw ConfigError("recall: threshold must be in (0,1)");
}

namespace {

// Hashed bucket ids for all 1..max_ngram token grams of `text`.
std::vector<std::size_t> ngram_buckets(const BpeModel& bpe, const std::string& text, int max_ngram,
                                       std::size_t buckets) {
    const auto tokens = bpe.encode(text);
    std::vector<std::size_t> out;
    std::string joined;
    for (int n = 1; n <= max_ngram; ++n) {
        if (tokens.size() < static_cast<std::size_t>(n)) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            joined.clear();
            for (int j = 0; j < n; ++j) {
                if (j > 0) joined += '\x1f';
                joined += tokens[i + j];
            }
            out.push_back(hash_bytes(joined, kNgramSalt + static_cast<std::uint64_t>(n)) % buckets);
        }
    }
    return out;
}

double score_buckets(const RecallModel& model, const std::vector<std::size_t>& bucket_ids) {
    if (bucket_ids.empty()) return 0.5;  // defined neutral prior
    const std::size_t d = model.config.dim;
    std::vector<double> hidden(d, 0.0);
    for (std::size_t b : bucket_ids) {
        const float* row = model.embeddings.data() + b * d;
        for (std::size_t j = 0; j < d; ++j) hidden[j] += row[j];
    }
    double z = model.bias;
    const auto m = static_cast<double>(bucket_ids.size());
    for (std::size_t j = 0; j < d; ++j) z += model.output[j] * (hidden[j] / m);
    return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

double RecallModel::score(const std::string& text) const {
    return score_buckets(*this, ngram_buckets(bpe, text, config.max_ngram, config.buckets));
}

RecallModel train_classifier(const std::vector<SeedExample>& seeds,
                             const RecallModelConfig& config) {
    config.validate();

    // Deterministic held-out slice: every k-th example.
    std::size_t holdout_every = 0;
    if (config.holdout_fraction > 0.0)
        holdout_every = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::llround(1.0 / config.holdout_fraction)));
    std::vector<std::size_t> train_idx, held_idx;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (holdout_every != 0 && (i + 1) % holdout_every == 0)
            held_idx.push_back(i);
        else
            train_idx.push_back(i);
    }

    auto has_both_labels = [&](const std::vector<std::size_t>& idx) {
        bool pos = false, neg = false;
        for (std::size_t i : idx) (seeds[i].label ? pos : neg) = true;
        return pos && neg;
    };
    if (!has_both_labels(train_idx))
        throw StageError("degenerate-labels: training slice needs both labels");

    RecallModel model;
    model.config = config;

    std::vector<std::string> train_texts;
    train_texts.reserve(train_idx.size());
    for (std::size_t i : train_idx) train_texts.push_back(seeds[i].text);
    model.bpe = train_bpe(train_texts, config.bpe_vocab);

    const std::size_t d = config.dim;
    model.embeddings.resize(config.buckets * d);
    std::uint64_t rng = config.seed;
    const double scale = 1.0 / static_cast<double>(d);
    for (auto& w : model.embeddings) {
        const double u = static_cast<double>(splitmix64(rng) >> 11) * 0x1.0p-53;  // [0,1)
        w = static_cast<float>((2.0 * u - 1.0) * scale);
    }
    model.output.assign(d, 0.0f);
    model.bias = 0.0f;

    // Bucket lists are identical every epoch; compute once.
    std::vector<std::vector<std::size_t>> train_buckets(train_idx.size());
    for (std::size_t t = 0; t < train_idx.size(); ++t)
        train_buckets[t] =
            ngram_buckets(model.bpe, seeds[train_idx[t]].text, config.max_ngram, config.buckets);

    // Plain sequential SGD, lr decayed linearly by global step. No
    // shuffling: the visit order is part of the determinism contract (a
    // duplicated corpus with halved epochs replays the identical step
    // sequence).
    const std::size_t total_steps = static_cast<std::size_t>(config.epochs) * train_idx.size();
    std::size_t step = 0;
    std::vector<double> hidden(d);
    std::vector<double> input_grad(d);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t t = 0; t < train_idx.size(); ++t, ++step) {
            const auto& bucket_ids = train_buckets[t];
            if (bucket_ids.empty()) continue;
            const double lr_t =
                config.lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
            const auto m = static_cast<double>(bucket_ids.size());

            std::fill(hidden.begin(), hidden.end(), 0.0);
            for (std::size_t b : bucket_ids) {
                const float* row = model.embeddings.data() + b * d;
                for (std::size_t j = 0; j < d; ++j) hidden[j] += row[j];
            }
            double z = model.bias;
            for (std::size_t j = 0; j < d; ++j) {
                hidden[j] /= m;
                z += model.output[j] * hidden[j];
            }
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double y = seeds[train_idx[t]].label ? 1.0 : 0.0;
            const double g = (p - y) * lr_t;

            // Input gradient uses the pre-update output weights.
            for (std::size_t j = 0; j < d; ++j) input_grad[j] = g * model.output[j] / m;
            for (std::size_t j = 0; j < d; ++j)
                model.output[j] -= static_cast<float>(g * hidden[j]);
            model.bias -= static_cast<float>(g);
            for (std::size_t b : bucket_ids) {
                float* row = model.embeddings.data() + b * d;
                for (std::size_t j = 0; j < d; ++j) row[j] -= static_cast<float>(input_grad[j]);
            }
        }
    }

    // Reported accuracy: held-out slice, or the training slice when no
    // example was held out.
    const auto& eval_idx = held_idx.empty() ? train_idx : held_idx;
    std::size_t correct = 0;
    for (std::size_t i : eval_idx) {
        const double s = model.score(seeds[i].text);
        if ((s > 0.5) == seeds[i].label) ++correct;
    }
    model.held_out_accuracy =
        eval_idx.empty() ? 0.0
                         : static_cast<double>(correct) / static_cast<double>(eval_idx.size());
    return model;
}

// ---------------------------------------------------------------------------
// Model serialization (versioned little-endian binary)
// ---------------------------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'C', 'S', 'R', 'M'};
constexpr std::uint32_t kModelVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
void put_str(std::string& out, const std::string& s) {
    put_u64(out, s.size());
    out += s;
}

class Reader {
public:
    explicit Reader(std::string_view data) : data_(data) {}

    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint64_t n = u64();
        require(n);
        std::string s(data_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    void require(std::uint64_t n) const {
        if (pos_ + n > data_.size()) throw ConfigError("recall: model file truncated");
    }
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace

void RecallModel::save(const std::string& path) const {
    std::string out;
    out.append(kModelMagic, 4);
    put_u32(out, kModelVersion);
    put_u64(out, config.dim);
    put_u64(out, config.buckets);
    put_u32(out, static_cast<std::uint32_t>(config.max_ngram));
    put_u32(out, static_cast<std::uint32_t>(config.epochs));
    put_f64(out, config.lr);
    put_u64(out, config.bpe_vocab);
    put_u64(out, config.seed);
    put_f64(out, config.holdout_fraction);
    put_f64(out, config.threshold);
    put_u64(out, bpe.merges.size());
    for (const auto& [first, second] : bpe.merges) {
        put_str(out, first);
        put_str(out, second);
    }
    put_u64(out, embeddings.size());
    for (float w : embeddings) put_f32(out, w);
    put_u64(out, output.size());
    for (float w : output) put_f32(out, w);
    put_f32(out, bias);
    put_f64(out, held_out_accuracy);

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file || !file.write(out.data(), static_cast<std::streamsize>(out.size())))
        throw StageError("recall: cannot write model file " + path);
}

RecallModel RecallModel::load(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ConfigError("recall: cannot open model file " + path);
    std::ostringstream buf;
    buf << file.rdbuf();
    const std::string data = buf.str();
    if (data.size() < 8 || std::memcmp(data.data(), kModelMagic, 4) != 0)
        throw ConfigError("recall: " + path + " is not a recall model file");

    Reader r(std::string_view(data).substr(4));
    const std::uint32_t version = r.u32();
    if (version != kModelVersion)
        throw ConfigError("recall: unsupported model version " + std::to_string(version));

    RecallModel model;
    model.config.dim = r.u64();
    model.config.buckets = r.u64();
    model.config.max_ngram = static_cast<int>(r.u32());
    model.config.epochs = static_cast<int>(r.u32());
    model.config.lr = r.f64();
    model.config.bpe_vocab = r.u64();
    model.config.seed = r.u64();
    model.config.holdout_fraction = r.f64();
    model.config.threshold = r.f64();
    const std::uint64_t merges = r.u64();
    model.bpe.merges.reserve(merges);
    for (std::uint64_t i = 0; i < merges; ++i) {
        std::string first = r.str();
        std::string second = r.str();
        model.bpe.merges.emplace_back(std::move(first), std::move(second));
    }
    model.embeddings.resize(r.u64());
    for (auto& w : model.embeddings) w = r.f32();
    model.output.resize(r.u64());
    for (auto& w : model.output) w = r.f32();
    model.bias = r.f32();
    model.held_out_accuracy = r.f64();
    if (!r.done()) throw ConfigError("recall: trailing bytes in model file " + path);
    if (model.embeddings.size() != model.config.buckets * model.config.dim ||
        model.output.size() != model.config.dim)
        throw ConfigError("recall: model file " + path + " has inconsistent shapes");
    return model;
}

// ---------------------------------------------------------------------------
// Web pages
// ---------------------------------------------------------------------------

std::vector<WebPage> read_web_pages(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("recall: cannot open web-page file " + path);
    std::vector<WebPage> pages;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object())
            throw StageError("recall: bad JSON at " + path + ":" + std::to_string(lineno));
        WebPage page;
        page.url = obj.value("url", std::string());
        page.content = obj.value("content", std::string());
        pages.push_back(std::move(page));
    }
    return pages;
}

void write_web_pages(const std::string& path, const std::vector<WebPage>& pages) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("recall: cannot write web-page file " + path);
    for (const auto& page : pages) {
        json obj;
        obj["url"] = page.url;
        obj["content"] = page.content;
        out << obj.dump() << '\n';
    }
}

RecallOutput recall_pages(const RecallModel& model, const std::vector<WebPage>& corpus,
                          double threshold, int workers) {
    RecallOutput out;
    std::vector<char> keep(corpus.size(), 0);
    parallel_for(corpus.size(), resolve_workers(workers), [&](std::size_t i) {
        if (corpus[i].content.empty()) return;  // noted below, never scored
        if (model.score(corpus[i].content) >= threshold) keep[i] = 1;
    });
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (corpus[i].content.empty())
            out.notes.push_back("empty-content: " + corpus[i].url);
        else if (keep[i])
            out.recalled.push_back(corpus[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

namespace {

// Common two-level public suffixes, so "bbs.example.ac.cn" groups under
// "example.ac.cn" rather than "ac.cn". An approximation of the full public
// suffix list, adequate for grouping; unlisted suffixes fall back to the
// last two labels.
const std::set<std::string>& two_level_suffixes() {
    static const std::set<std::string> kSuffixes = {
        "co.uk",  "org.uk", "ac.uk",  "gov.uk", "net.uk", "me.uk",  "com.cn", "net.cn",
        "org.cn", "gov.cn", "edu.cn", "ac.cn",  "com.au", "net.au", "org.au", "edu.au",
        "gov.au", "co.jp",  "or.jp",  "ne.jp",  "ac.jp",  "go.jp",  "co.kr",  "or.kr",
        "com.br", "net.br", "org.br", "com.mx", "org.mx", "co.in",  "net.in", "org.in",
        "co.nz",  "net.nz", "org.nz", "com.sg", "com.my", "com.hk", "com.tw", "org.tw",
        "edu.tw", "co.za",  "org.za", "com.ar", "com.co", "com.tr", "com.ua", "co.il",
        "org.il", "com.vn", "com.ph", "co.th",  "ac.th",  "com.eg", "com.sa", "com.pk",
    };
    return kSuffixes;
}

}  // namespace

std::string base_url(const std::string& url) {
    std::string_view s = url;
    if (const auto scheme = s.find("://"); scheme != std::string_view::npos)
        s = s.substr(scheme + 3);
    if (const auto cut = s.find_first_of("/?#"); cut != std::string_view::npos)
        s = s.substr(0, cut);
    if (const auto at = s.rfind('@'); at != std::string_view::npos) s = s.substr(at + 1);
    if (const auto colon = s.find(':'); colon != std::string_view::npos) s = s.substr(0, colon);

    std::string host;
    host.reserve(s.size());
    for (char c : s) host.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));

    auto valid = [&] {
        if (host.empty() || host.front() == '.' || host.back() == '.') return false;
        if (host.find("..") != std::string::npos) return false;
        for (unsigned char c : host)
            if (std::isalnum(c) == 0 && c != '.' && c != '-') return false;
        return true;
    };
    if (!valid()) return "invalid-url";

    std::vector<std::string> labels;
    std::size_t start = 0;
    while (true) {
        const auto dot = host.find('.', start);
        if (dot == std::string::npos) {
            labels.push_back(host.substr(start));
            break;
        }
        labels.push_back(host.substr(start, dot - start));
        start = dot + 1;
    }
    if (labels.size() <= 2) return host;

    const bool numeric = std::all_of(
        host.begin(), host.end(), [](unsigned char c) { return std::isdigit(c) != 0 || c == '.'; });
    if (numeric) return host;  // IPv4 literal, keep whole

    const std::string last_two = labels[labels.size() - 2] + "." + labels.back();
    const std::size_t take = two_level_suffixes().count(last_two) ? 3 : 2;
    std::string out;
    for (std::size_t i = labels.size() - take; i < labels.size(); ++i) {
        if (!out.empty()) out += '.';
        out += labels[i];
    }
    return out;
}

std::vector<DomainStat> discover_domains(const std::vector<WebPage>& recalled,
                                         const std::map<std::string, std::size_t>& totals) {
    std::map<std::string, std::size_t> code_counts;
    for (const auto& page : recalled) ++code_counts[base_url(page.url)];

    std::map<std::string, DomainStat> stats;
    for (const auto& [domain, pages] : totals) {
        DomainStat& stat = stats[domain];
        stat.domain = domain;
        stat.pages = pages;
    }
    for (const auto& [domain, code_pages] : code_counts) {
        DomainStat& stat = stats[domain];
        stat.domain = domain;
        stat.code_pages = code_pages;
        // Totals missing or undercounting a recalled domain: clamp so the
        // fraction stays a valid ratio.
        stat.pages = std::max(stat.pages, code_pages);
    }

    std::vector<DomainStat> out;
    out.reserve(stats.size());
    for (auto& [domain, stat] : stats) {
        stat.code_fraction = stat.pages == 0 ? 0.0
                                             : static_cast<double>(stat.code_pages) /
                                                   static_cast<double>(stat.pages);
        stat.flagged = stat.code_fraction > 0.10;
        out.push_back(std::move(stat));
    }
    return out;  // map order: sorted by domain
}

// ---------------------------------------------------------------------------
// URL patterns
// ---------------------------------------------------------------------------

bool url_matches(const std::string& url, const std::string& pattern) {
    std::vector<std::string> segments;
    std::string current;
    for (char c : pattern) {
        if (c == '%') {
            if (!current.empty()) segments.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) segments.push_back(current);
    const bool anchored_front = !pattern.empty() && pattern.front() != '%';
    const bool anchored_back = !pattern.empty() && pattern.back() != '%';

    if (segments.empty()) return !pattern.empty();  // pure-wildcard pattern

    std::size_t pos = 0;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const std::string& seg = segments[k];
        const bool last = k + 1 == segments.size();
        if (k == 0 && anchored_front) {
            if (url.compare(0, seg.size(), seg) != 0) return false;
            pos = seg.size();
            if (last && anchored_back) return pos == url.size();
            continue;
        }
        if (last && anchored_back) {
            if (url.size() < seg.size()) return false;
            const std::size_t suffix_at = url.size() - seg.size();
            return suffix_at >= pos && url.compare(suffix_at, seg.size(), seg) == 0;
        }
        const std::size_t found = url.find(seg, pos);
        if (found == std::string::npos) return false;
        pos = found + seg.size();
    }
    return true;
}

std::vector<UrlPattern> load_url_patterns(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("recall: cannot open URL pattern file " + path);
    std::vector<UrlPattern> patterns;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view view = line;
        while (!view.empty() && std::isspace(static_cast<unsigned char>(view.front())))
            view.remove_prefix(1);
        if (view.empty() || view.front() == '#') continue;

        std::istringstream fields{std::string(view)};
        UrlPattern entry;
        std::string extra;
        if (!(fields >> entry.pattern >> entry.tag) || (fields >> extra))
            throw ConfigError("recall: malformed pattern line at " + path + ":" +
                              std::to_string(lineno) + " (want: pattern tag)");
        if (entry.pattern.find_first_not_of('%') == std::string::npos)
            throw ConfigError("recall: pattern with no literal characters at " + path + ":" +
                              std::to_string(lineno));
        patterns.push_back(std::move(entry));
    }
    return patterns;
}

const std::vector<UrlPattern>& builtin_url_patterns() {
    static const std::vector<UrlPattern> patterns =
        load_url_patterns(default_data_file("url_patterns.txt"));
    return patterns;
}

std::vector<UrlPattern> patterns_with_tag(const std::vector<UrlPattern>& patterns,
                                          const std::string& tag) {
    std::vector<UrlPattern> out;
    for (const auto& pattern : patterns)
        if (pattern.tag == tag) out.push_back(pattern);
    return out;
}

std::vector<WebPage> annotate_urls(const std::vector<WebPage>& pages,
                                   const std::vector<UrlPattern>& patterns,
                                   const RecallModel& model, double threshold) {
    std::vector<WebPage> additions;
    for (const auto& page : pages) {
        if (page.content.empty()) continue;  // never scored, never a seed
        bool matched = false;
        for (const auto& pattern : patterns)
            if (url_matches(page.url, pattern.pattern)) {
                matched = true;
                break;
            }
        if (matched && model.score(page.content) < threshold) additions.push_back(page);
    }
    return additions;
}

// ---------------------------------------------------------------------------
// Iteration
// ---------------------------------------------------------------------------

IterateResult iterate(std::vector<SeedExample> seeds, const std::vector<WebPage>& corpus,
                      int rounds, const RecallModelConfig& config,
                      const std::vector<UrlPattern>& patterns, double threshold, int workers) {
    if (rounds < 1) throw ConfigError("recall: rounds must be >= 1");

    IterateResult result;
    result.seeds = std::move(seeds);
    std::set<std::string> seeded_urls;

    for (int round = 1; round <= rounds; ++round) {
        RecallModelConfig round_config = config;
        round_config.seed = config.seed + static_cast<std::uint64_t>(round - 1);

        const std::size_t seed_size = result.seeds.size();
        const RecallModel model = train_classifier(result.seeds, round_config);
        RecallOutput recall = recall_pages(model, corpus, threshold, workers);
        for (const auto& note : recall.notes)
            result.notes.push_back("round " + std::to_string(round) + ": " + note);

        const auto additions = annotate_urls(corpus, patterns, model, threshold);
        std::size_t added = 0;
        for (const auto& page : additions) {
            if (!seeded_urls.insert(page.url).second) continue;  // already a seed
            result.seeds.push_back({page.content, true});
            ++added;
        }

        result.rounds.push_back(
            {round, seed_size, recall.recalled.size(), added, model.held_out_accuracy});
        result.recalled = std::move(recall.recalled);

        if (added == 0 && round < rounds) {
            result.notes.push_back("round " + std::to_string(round) +
                                   " added no new seeds; stopping early");
            break;
        }
    }
    return result;
}

}  // namespace codesift
