#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ragdx {

/// Base class for every error the toolkit throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating evaluation data. Carries the offending
/// line numbers (1-based) when the input came from a file.
class DatasetError : public Error {
public:
    DatasetError(const std::string& message, std::vector<std::size_t> lines = {})
        : Error(message), lines_(std::move(lines)) {}

    const std::vector<std::size_t>& lines() const noexcept { return lines_; }

private:
    std::vector<std::size_t> lines_;
};

/// Bad normalization rules, report rules or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Embedding or judge provider failure: network, timeout, bad payload.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// Raised in offline mode when a request is not served by the cache.
class CacheMissError : public ProviderError {
public:
    CacheMissError(const std::string& what_kind, std::vector<std::string> keys)
        : ProviderError(format(what_kind, keys)), keys_(std::move(keys)) {}

    const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
    static std::string format(const std::string& what_kind, const std::vector<std::string>& keys) {
        std::string msg = "offline mode: " + std::to_string(keys.size()) + " uncached " + what_kind +
                          " request(s):";
        for (const auto& k : keys) {
            msg += "\n  " + k;
        }
        return msg;
    }

    std::vector<std::string> keys_;
};

/// Precondition violation on a metric or scoring call (empty text, bad dims).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace ragdx
