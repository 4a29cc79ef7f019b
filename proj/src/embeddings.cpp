#include "ragdx/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "ragdx/errors.hpp"
#include "ragdx/http.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw InvalidArgument("embedding vector must have dim > 0");
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvalidArgument("embedding vector has a non-finite entry");
    }
}

double EmbeddingVector::norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw InvalidArgument("cosine_similarity: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    const auto& x = a.values();
    const auto& y = b.values();
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * y[i];
        na += x[i] * x[i];
        nb += y[i] * y[i];
    }
    if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine_similarity: zero-norm vector");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void EmbeddingProviderConfig::validate() const {
    if (batch_size < 1) throw ConfigError("embedding batch_size must be >= 1");
    if (timeout.count() <= 0) throw ConfigError("embedding timeout must be > 0");
    if (max_in_flight < 1) throw ConfigError("embedding max_in_flight must be >= 1");
    if (max_retries < 0) throw ConfigError("embedding max_retries must be >= 0");
}

std::vector<EmbeddingVector> embed_batch(Embedder& embedder, std::span<const std::string> texts) {
    for (const auto& t : texts) {
        if (t.empty()) throw InvalidArgument("empty text for embedding");
    }
    return embedder.embed(texts);
}

namespace {

std::string preview(const std::string& s) {
    constexpr std::size_t kMax = 48;
    if (s.size() <= kMax) return s;
    return s.substr(0, kMax) + "...";
}

void check_inputs(std::span<const std::string> texts) {
    if (texts.empty()) throw InvalidArgument("embed: at least one text is required");
    for (const auto& t : texts) {
        if (t.empty()) throw InvalidArgument("empty text for embedding");
    }
}

}  // namespace

HttpEmbedder::HttpEmbedder(EmbeddingProviderConfig cfg) : cfg_(std::move(cfg)), cache_(cfg_.cache_path) {
    cfg_.validate();
}

std::string HttpEmbedder::cache_key(const std::string& text) const {
    std::string material = cfg_.model_id;
    material.push_back('\0');
    material += text;
    return "emb:" + text::sha256_hex(material);
}

std::vector<std::string> HttpEmbedder::uncached(std::span<const std::string> texts) const {
    std::vector<std::string> missing;
    std::unordered_map<std::string, bool> seen;
    for (const auto& t : texts) {
        auto key = cache_key(t);
        if (cache_.contains(key) || !seen.emplace(key, true).second) continue;
        missing.push_back(key + " \"" + preview(t) + "\"");
    }
    return missing;
}

std::vector<EmbeddingVector> HttpEmbedder::request_batch(const std::vector<std::string>& batch) {
    const nlohmann::json body = {{"model", cfg_.model_id}, {"input", batch}};
    const auto payload = body.dump();
    const auto headers = http::auth_headers(cfg_.api_key_env);

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(cfg_.retry_backoff * (1 << (attempt - 1)));
        ++requests_;
        http::Response res;
        try {
            res = http::post_json(cfg_.endpoint_url, payload, headers, cfg_.timeout);
        } catch (const ProviderError& e) {
            last_error = e.what();
            continue;
        }
        if (res.status < 200 || res.status >= 300) {
            last_error = "embedding provider returned HTTP " + std::to_string(res.status);
            if (http::is_retryable_status(res.status)) continue;
            throw ProviderError(last_error + ": " + preview(res.body));
        }

        // Well-formed HTTP but wrong payload is a provider bug; not retried.
        nlohmann::json reply;
        try {
            reply = nlohmann::json::parse(res.body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProviderError(std::string("embedding provider returned malformed JSON: ") + e.what());
        }
        if (!reply.contains("data") || !reply["data"].is_array()) {
            throw ProviderError("embedding provider reply has no 'data' array");
        }
        const auto& data = reply["data"];
        if (data.size() != batch.size()) {
            throw ProviderError("embedding provider returned " + std::to_string(data.size()) + " vectors for " +
                                std::to_string(batch.size()) + " texts");
        }
        std::vector<std::optional<EmbeddingVector>> slots(batch.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& item = data[i];
            std::size_t index = i;
            if (item.contains("index")) {
                if (!item["index"].is_number_integer()) throw ProviderError("embedding 'index' must be an integer");
                index = item["index"].get<std::size_t>();
            }
            if (index >= slots.size() || slots[index]) {
                throw ProviderError("embedding provider returned a bad or duplicate index " + std::to_string(index));
            }
            if (!item.contains("embedding") || !item["embedding"].is_array()) {
                throw ProviderError("embedding provider item lacks an 'embedding' array");
            }
            try {
                slots[index] = EmbeddingVector(item["embedding"].get<std::vector<double>>());
            } catch (const nlohmann::json::exception&) {
                throw ProviderError("embedding provider returned non-numeric values");
            } catch (const InvalidArgument& e) {
                throw ProviderError(std::string("embedding provider returned an invalid vector: ") + e.what());
            }
        }
        std::vector<EmbeddingVector> out;
        out.reserve(slots.size());
        for (auto& s : slots) out.push_back(std::move(*s));
        return out;
    }
    throw ProviderError("embedding request failed after " + std::to_string(cfg_.max_retries + 1) +
                        " attempt(s): " + last_error);
}

std::vector<EmbeddingVector> HttpEmbedder::embed(std::span<const std::string> texts) {
    check_inputs(texts);

    std::vector<std::string> keys;
    keys.reserve(texts.size());
    for (const auto& t : texts) keys.push_back(cache_key(t));

    // Unique cache misses, in first-occurrence order.
    std::vector<std::string> miss_texts;
    std::vector<std::string> miss_keys;
    {
        std::unordered_map<std::string, bool> queued;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (cache_.contains(keys[i]) || !queued.emplace(keys[i], true).second) continue;
            miss_texts.push_back(texts[i]);
            miss_keys.push_back(keys[i]);
        }
    }
    if (!miss_texts.empty() && cfg_.offline) {
        throw CacheMissError("embedding", uncached(texts));
    }

    if (!miss_texts.empty()) {
        std::vector<std::vector<std::string>> batches;
        for (std::size_t i = 0; i < miss_texts.size(); i += cfg_.batch_size) {
            const auto end = std::min(miss_texts.size(), i + cfg_.batch_size);
            batches.emplace_back(miss_texts.begin() + static_cast<std::ptrdiff_t>(i),
                                 miss_texts.begin() + static_cast<std::ptrdiff_t>(end));
        }
        std::vector<std::vector<EmbeddingVector>> results(batches.size());
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t b = next++; b < batches.size(); b = next++) {
                try {
                    results[b] = request_batch(batches[b]);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        const auto n_workers = std::min(cfg_.max_in_flight, batches.size());
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        }
        if (failure) std::rethrow_exception(failure);

        std::size_t dim = 0;
        std::size_t pos = 0;
        for (const auto& batch_result : results) {
            for (const auto& v : batch_result) {
                if (dim == 0) dim = v.dim();
                if (v.dim() != dim) {
                    throw ProviderError("embedding dimension mismatch across batch (" + std::to_string(dim) +
                                        " vs " + std::to_string(v.dim()) + ")");
                }
                cache_.put(miss_keys[pos++], v.values());
            }
        }
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& key : keys) {
        auto hit = cache_.get(key);
        if (!hit) throw ProviderError("embedding cache lost key " + key);
        out.emplace_back(hit->get<std::vector<double>>());
        if (out.back().dim() != out.front().dim()) {
            throw ProviderError("embedding dimension mismatch between cached and fresh vectors");
        }
    }
    return out;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ < 2) throw ConfigError("hashing embedder needs dim >= 2");
}

std::string HashingEmbedder::model_id() const { return "hashing-" + std::to_string(dim_); }

EmbeddingVector HashingEmbedder::embed_one(std::string_view s) const {
    std::vector<double> v(dim_, 0.0);
    v[0] = 1e-2;  // bias
    const auto tokens = text::tokenize(text::fold_case(s));
    auto add = [&](std::string_view feature, double weight) {
        const auto h = fnv1a(feature);
        const auto bucket = 1 + static_cast<std::size_t>(h % (dim_ - 1));
        v[bucket] += (h >> 63) ? -weight : weight;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        add(tokens[i], 1.0);
        if (i + 1 < tokens.size()) add(tokens[i] + ' ' + tokens[i + 1], 0.5);
    }
    return EmbeddingVector(std::move(v));
}

std::vector<EmbeddingVector> HashingEmbedder::embed(std::span<const std::string> texts) {
    check_inputs(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

}  // namespace ragdx
