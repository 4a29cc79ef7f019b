#include "ragdx/cache.hpp"

#include <fstream>

#include "ragdx/errors.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

KeyValueCache::KeyValueCache(std::optional<std::filesystem::path> path) : path_(std::move(path)) {
    if (!path_ || !std::filesystem::exists(*path_)) return;
    std::ifstream in(*path_);
    if (!in) throw ConfigError("cannot read cache file '" + path_->string() + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            entries_[j.at("key").get<std::string>()] = j.at("value");
        } catch (const nlohmann::json::exception&) {
            // a torn trailing write is tolerated; anything earlier is corruption
            if (in.peek() != std::char_traits<char>::eof()) {
                throw ConfigError("corrupt cache file '" + path_->string() + "' at line " + std::to_string(lineno));
            }
        }
    }
}

std::optional<nlohmann::json> KeyValueCache::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

bool KeyValueCache::contains(const std::string& key) const {
    std::shared_lock lock(mutex_);
    return entries_.count(key) != 0;
}

void KeyValueCache::put(const std::string& key, const nlohmann::json& value) {
    std::unique_lock lock(mutex_);
    entries_.insert_or_assign(key, value);
    if (!path_) return;
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
    std::ofstream out(*path_, std::ios::app);
    if (!out) throw Error("cannot append to cache file '" + path_->string() + "'");
    out << nlohmann::json{{"key", key}, {"value", value}}.dump() << '\n';
    out.flush();
}

std::size_t KeyValueCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

}  // namespace ragdx
