// Shared helpers for the test suites: temp directories and corpus builders.
#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "codesift/document.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("codesift-test-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline codesift::CodeDocument make_doc(std::string id, std::string content,
                                       std::string language = "Python", std::string repo = "",
                                       std::int64_t stars = 0, std::int64_t commit_time = 0) {
    codesift::CodeDocument doc;
    doc.id = id;
    doc.path = id;
    doc.repo = std::move(repo);
    doc.content = std::move(content);
    doc.language = std::move(language);
    doc.stars = stars;
    doc.commit_time = commit_time;
    return doc;
}

/// Deterministic pseudo-random "code-like" text with `tokens` whitespace
/// tokens, for corpus-scale tests.
inline std::string random_text(std::mt19937_64& rng, std::size_t tokens) {
    static const char* words[] = {"int",    "return", "for",  "while", "vector", "size",
                                  "data",   "value",  "node", "index", "count",  "buffer",
                                  "result", "status", "temp", "left",  "right",  "next"};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(words) - 1);
    std::string out;
    for (std::size_t i = 0; i < tokens; ++i) {
        if (i) out += (i % 12 == 0) ? '\n' : ' ';
        out += words[pick(rng)];
        out += std::to_string(pick(rng));
    }
    return out;
}

}  // namespace testutil
