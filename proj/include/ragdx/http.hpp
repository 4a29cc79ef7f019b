#pragma once

#include <chrono>
#include <map>
#include <string>

namespace ragdx::http {

struct Response {
    int status = 0;
    std::string body;
};

/// Blocking JSON POST to an absolute http(s) URL. Transport failures
/// (connection refused, timeout) throw ProviderError; HTTP error statuses are
/// returned to the caller.
Response post_json(const std::string& url, const std::string& body,
                   const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout);

/// Bearer header from the named environment variable, empty when unset.
std::map<std::string, std::string> auth_headers(const std::string& api_key_env);

/// 408, 429 and 5xx are worth retrying.
inline bool is_retryable_status(int status) noexcept {
    return status == 408 || status == 429 || status >= 500;
}

}  // namespace ragdx::http
