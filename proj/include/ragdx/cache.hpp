#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include <json.hpp>

namespace ragdx {

/// Content-addressed key/value store backed by an append-only JSONL file
/// ({"key": ..., "value": ...} per line). Reads take a shared lock; writes
/// are serialized and flushed line by line, so a crash loses at most the
/// entry being written. Without a path the cache is memory-only.
class KeyValueCache {
public:
    explicit KeyValueCache(std::optional<std::filesystem::path> path = std::nullopt);

    std::optional<nlohmann::json> get(const std::string& key) const;
    bool contains(const std::string& key) const;
    void put(const std::string& key, const nlohmann::json& value);
    std::size_t size() const;

    const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

private:
    std::optional<std::filesystem::path> path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, nlohmann::json> entries_;
};

}  // namespace ragdx
