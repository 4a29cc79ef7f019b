#include "ragdx/http.hpp"

#include <httplib.h>

#include <cstdlib>

#include "ragdx/errors.hpp"

namespace ragdx::http {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ProviderError("endpoint URL '" + url + "' has no scheme");
    }
    const auto scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw ProviderError("endpoint URL '" + url + "' must use http or https");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Response post_json(const std::string& url, const std::string& body,
                   const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout) {
    const auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);

    auto res = client.Post(path, hdrs, body, "application/json");
    if (!res) {
        throw ProviderError("POST " + url + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
}

std::map<std::string, std::string> auth_headers(const std::string& api_key_env) {
    std::map<std::string, std::string> h;
    if (api_key_env.empty()) return h;
    if (const char* key = std::getenv(api_key_env.c_str()); key && *key) {
        h.emplace("Authorization", std::string("Bearer ") + key);
    }
    return h;
}

}  // namespace ragdx::http
