#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ragdx/cache.hpp"

namespace ragdx {

/// Fixed-length vector of finite reals; construction enforces the invariants.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    /// Throws InvalidArgument on an empty vector or non-finite entries.
    explicit EmbeddingVector(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double norm() const noexcept;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

/// dot(a,b) / (|a| |b|), clamped to [-1, 1]. Throws InvalidArgument on a
/// dimension mismatch or a zero-norm vector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Anything that can turn texts into vectors: the HTTP provider, the local
/// hashing baseline, or a test double.
class Embedder {
public:
    virtual ~Embedder() = default;

    /// One vector per input, order preserved, all of one dimension.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
    virtual std::string model_id() const = 0;

    /// Keys of the inputs that would need a provider call. Local embedders
    /// never miss.
    virtual std::vector<std::string> uncached(std::span<const std::string> /*texts*/) const { return {}; }
};

struct EmbeddingProviderConfig {
    std::string endpoint_url;
    std::string model_id;
    std::size_t batch_size = 32;
    std::chrono::milliseconds timeout{30000};
    std::optional<std::filesystem::path> cache_path;
    std::string api_key_env = "RAGDX_EMBEDDING_API_KEY";
    std::size_t max_in_flight = 4;
    int max_retries = 2;
    std::chrono::milliseconds retry_backoff{200};
    bool offline = false;

    /// Throws ConfigError when batch_size < 1, timeout <= 0 or
    /// max_in_flight < 1.
    void validate() const;
};

/// Client for {model, input:[...]} -> {data:[{index, embedding}]} providers,
/// with batching, bounded concurrency and a persistent content-addressed
/// cache keyed by (model_id, exact text bytes).
class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(EmbeddingProviderConfig cfg);

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::string model_id() const override { return cfg_.model_id; }
    std::vector<std::string> uncached(std::span<const std::string> texts) const override;

    /// Provider requests issued so far (including retries).
    std::size_t request_count() const noexcept { return requests_.load(); }
    std::string cache_key(const std::string& text) const;

private:
    std::vector<EmbeddingVector> request_batch(const std::vector<std::string>& batch);

    EmbeddingProviderConfig cfg_;
    KeyValueCache cache_;
    std::atomic<std::size_t> requests_{0};
};

/// Deterministic local embedder: signed feature hashing of lowercase word
/// tokens and adjacent-token bigrams into `dim` buckets, plus a constant
/// bias component so no vector has zero norm. A lexical baseline for
/// offline runs; it has no notion of synonymy.
class HashingEmbedder final : public Embedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256);

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    std::string model_id() const override;

    EmbeddingVector embed_one(std::string_view text) const;

private:
    std::size_t dim_;
};

/// Convenience wrapper: embed exactly the given texts, throwing
/// InvalidArgument("empty text for embedding") on an empty string.
std::vector<EmbeddingVector> embed_batch(Embedder& embedder, std::span<const std::string> texts);

}  // namespace ragdx
