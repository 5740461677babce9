#include "codesift/registry.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#ifndef CODESIFT_DEFAULT_DATA_DIR
#define CODESIFT_DEFAULT_DATA_DIR "data"
#endif

namespace codesift {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::string default_data_file(const std::string& filename) {
    if (const char* env = std::getenv("CODESIFT_DATA")) {
        return (std::filesystem::path(env) / filename).string();
    }
    return (std::filesystem::path(CODESIFT_DEFAULT_DATA_DIR) / filename).string();
}

std::string path_extension(const std::string& path) {
    return lower(std::filesystem::path(path).extension().string());
}

std::string path_stem_lower(const std::string& path) {
    return lower(std::filesystem::path(path).stem().string());
}

std::string path_filename_lower(const std::string& path) {
    return lower(std::filesystem::path(path).filename().string());
}

LanguageRegistry LanguageRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open language registry: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed language registry " + path + ": " + e.what());
    }

    LanguageRegistry reg;
    std::vector<std::string> priority = j.value("collision_priority", std::vector<std::string>{});

    for (const auto& je : j.at("entries")) {
        LanguageRegistryEntry entry;
        entry.name = je.at("name").get<std::string>();
        entry.category = category_from_string(je.at("category").get<std::string>());
        entry.included = je.at("included").get<bool>();
        for (const auto& ext : je.value("extensions", std::vector<std::string>{})) {
            entry.extensions.push_back(lower(ext));
        }
        if (reg.by_name_.count(entry.name)) {
            throw ConfigError("duplicate language entry: " + entry.name);
        }
        reg.by_name_[entry.name] = reg.entries_.size();
        if (entry.included) ++reg.included_count_;
        reg.entries_.push_back(std::move(entry));
    }

    // Extension maps. Collisions among included entries must be resolved by
    // the priority list or the registry is rejected.
    std::unordered_map<std::string, std::vector<std::size_t>> claims;
    for (std::size_t i = 0; i < reg.entries_.size(); ++i) {
        const auto& entry = reg.entries_[i];
        for (const auto& ext : entry.extensions) {
            if (entry.included) {
                claims[ext].push_back(i);
            } else {
                reg.exclude_by_ext_.emplace(ext, i);
            }
        }
    }
    for (auto& [ext, owners] : claims) {
        std::size_t winner = owners.front();
        if (owners.size() > 1) {
            auto it = std::find_if(priority.begin(), priority.end(), [&](const std::string& name) {
                return std::any_of(owners.begin(), owners.end(),
                                   [&](std::size_t i) { return reg.entries_[i].name == name; });
            });
            if (it == priority.end()) {
                throw ConfigError("extension " + ext +
                                  " claimed by multiple included languages "
                                  "with no collision_priority winner");
            }
            winner = *std::find_if(owners.begin(), owners.end(),
                                   [&](std::size_t i) { return reg.entries_[i].name == *it; });
        }
        reg.include_by_ext_[ext] = winner;
    }
    return reg;
}

const LanguageRegistry& LanguageRegistry::builtin() {
    static LanguageRegistry instance = load(default_data_file("languages.json"));
    return instance;
}

std::optional<LanguageRegistryEntry> LanguageRegistry::lookup_extension(
    std::string extension) const {
    auto it = include_by_ext_.find(lower(std::move(extension)));
    if (it == include_by_ext_.end()) return std::nullopt;
    return entries_[it->second];
}

bool LanguageRegistry::is_excluded_extension(std::string extension) const {
    return exclude_by_ext_.count(lower(std::move(extension))) > 0;
}

const LanguageRegistryEntry* LanguageRegistry::language_entry(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return nullptr;
    return &entries_[it->second];
}

}  // namespace codesift
