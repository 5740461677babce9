#include "codesift/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "codesift/notebook.hpp"

namespace fs = std::filesystem;

namespace codesift {
namespace {

ScanResult scan_tree(const fs::path& root) {
    ScanResult result;
    struct Entry {
        std::string rel;
        fs::path abs;
        bool readable;
    };
    std::vector<Entry> entries;
    for (auto it =
             fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied);
         it != fs::recursive_directory_iterator(); ++it) {
        const fs::directory_entry& entry = *it;
        std::error_code ec;
        fs::file_status st = entry.status(ec);
        if (!ec && fs::is_regular_file(st)) {
            entries.push_back(
                {fs::relative(entry.path(), root).generic_string(), entry.path(), true});
        } else if (entry.is_symlink() ||
                   (ec && entry.symlink_status().type() != fs::file_type::not_found)) {
            // Dangling symlink or stat failure: the walk saw it but cannot read it.
            entries.push_back(
                {fs::relative(entry.path(), root).generic_string(), entry.path(), false});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.rel < b.rel; });

    for (auto& e : entries) {
        if (!e.readable) {
            result.skipped.push_back({e.rel, "unreadable"});
            continue;
        }
        std::ifstream in(e.abs, std::ios::binary);
        if (!in) {
            result.skipped.push_back({e.rel, "unreadable"});
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        if (in.bad()) {
            result.skipped.push_back({e.rel, "unreadable"});
            continue;
        }
        RawRecord rec;
        rec.id = e.rel;
        rec.path = e.rel;
        rec.content = buf.str();
        rec.byte_length = rec.content.size();
        result.records.push_back(std::move(rec));
    }
    return result;
}

ScanResult scan_dump(const fs::path& dump) {
    ScanResult result;
    std::ifstream in(dump, std::ios::binary);
    if (!in) throw StageError("cannot open record dump: " + dump.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        auto bad = [&]() {
            result.skipped.push_back(
                {dump.filename().string() + ":" + std::to_string(lineno), "bad-record"});
        };
        if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j.contains("path") ||
            !j.contains("content") || !j.at("id").is_string() || !j.at("path").is_string() ||
            !j.at("content").is_string()) {
            bad();
            continue;
        }
        RawRecord rec;
        rec.id = j.at("id").get<std::string>();
        rec.path = j.at("path").get<std::string>();
        rec.content = j.at("content").get<std::string>();
        rec.byte_length = rec.content.size();
        rec.repo = j.value("repo", std::string());
        rec.url = j.value("url", std::string());
        if (j.contains("stars")) {
            if (!j.at("stars").is_number_integer() || j.at("stars").get<std::int64_t>() < 0) {
                bad();
                continue;
            }
            rec.stars = j.at("stars").get<std::int64_t>();
        }
        if (j.contains("commit_time")) {
            if (!j.at("commit_time").is_number_integer()) {
                bad();
                continue;
            }
            rec.commit_time = j.at("commit_time").get<std::int64_t>();
        }
        if (j.contains("source")) {
            if (!j.at("source").is_string()) {
                bad();
                continue;
            }
            try {
                rec.source = source_from_string(j.at("source").get<std::string>());
            } catch (const ConfigError&) {
                bad();
                continue;
            }
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace

ScanResult scan_source(const std::string& root) {
    fs::path p(root);
    std::error_code ec;
    fs::file_status st = fs::status(p, ec);
    if (ec || st.type() == fs::file_type::not_found)
        throw StageError("scan root does not exist: " + root);
    if (fs::is_directory(st)) return scan_tree(p);
    if (fs::is_regular_file(st)) return scan_dump(p);
    throw StageError("scan root is neither directory nor file: " + root);
}

bool is_valid_utf8(const std::string& bytes) {
    const unsigned char* s = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t n = bytes.size();
    std::size_t i = 0;
    while (i < n) {
        unsigned char c = s[i];
        if (c == 0x00) return false;  // NUL marks binary content
        if (c < 0x80) {
            ++i;
        } else if ((c >> 5) == 0x6) {  // 110xxxxx
            if (i + 1 >= n || (s[i + 1] >> 6) != 0x2) return false;
            unsigned cp = ((c & 0x1Fu) << 6) | (s[i + 1] & 0x3Fu);
            if (cp < 0x80) return false;  // overlong
            i += 2;
        } else if ((c >> 4) == 0xE) {  // 1110xxxx
            if (i + 2 >= n || (s[i + 1] >> 6) != 0x2 || (s[i + 2] >> 6) != 0x2) return false;
            unsigned cp = ((c & 0x0Fu) << 12) | ((s[i + 1] & 0x3Fu) << 6) | (s[i + 2] & 0x3Fu);
            if (cp < 0x800) return false;                    // overlong
            if (cp >= 0xD800 && cp <= 0xDFFF) return false;  // surrogate
            i += 3;
        } else if ((c >> 3) == 0x1E) {  // 11110xxx
            if (i + 3 >= n || (s[i + 1] >> 6) != 0x2 || (s[i + 2] >> 6) != 0x2 ||
                (s[i + 3] >> 6) != 0x2)
                return false;
            unsigned cp = ((c & 0x07u) << 18) | ((s[i + 1] & 0x3Fu) << 12) |
                          ((s[i + 2] & 0x3Fu) << 6) | (s[i + 3] & 0x3Fu);
            if (cp < 0x10000 || cp > 0x10FFFF) return false;  // overlong / out of range
            i += 4;
        } else {
            return false;
        }
    }
    return true;
}

PreprocessResult preprocess(const RawRecord& record, const LanguageRegistry& registry) {
    if (record.byte_length > kMaxContentBytes) return {std::nullopt, "oversize"};

    const std::string ext = path_extension(record.path);
    const auto entry = registry.lookup_extension(ext);
    if (!entry || !entry->included) return {std::nullopt, "excluded-language"};

    if (!is_valid_utf8(record.content)) return {std::nullopt, "decode-failure"};

    CodeDocument doc;
    doc.id = record.id.empty() ? record.path : record.id;
    doc.path = record.path;
    doc.repo = record.repo;
    doc.language = entry->name;
    doc.category = entry->category;
    doc.stars = record.stars;
    doc.commit_time = record.commit_time;
    doc.source = record.source;
    doc.url = record.url;

    if (ext == ".ipynb") {
        auto triplets = convert_jupyter(record.content);
        if (!triplets) return {std::nullopt, "notebook-parse"};
        if (triplets->empty()) return {std::nullopt, "notebook-empty"};
        doc.content = render_triplets(*triplets);
    } else {
        doc.content = record.content;
    }
    return {std::move(doc), std::string()};
}

bool recall_text_file(const CodeDocument& doc, const TextScorer& scorer, double threshold) {
    const std::string filename = path_filename_lower(doc.path);
    if (filename.find("requirement") != std::string::npos) return true;
    static const char* kKeepStems[] = {"readme", "notes", "todo", "description", "cmakelists"};
    const std::string stem = path_stem_lower(doc.path);
    for (const char* keep : kKeepStems)
        if (stem == keep) return true;
    if (scorer) return scorer(doc.content) > threshold;
    return false;
}

}  // namespace codesift
