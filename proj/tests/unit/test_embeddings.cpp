#include <catch_amalgamated.hpp>

#include <cmath>

#include "fixtures.hpp"
#include "ragdx/embeddings.hpp"
#include "ragdx/errors.hpp"

using namespace ragdx;
using namespace ragdx::testing;

namespace {

EmbeddingProviderConfig config_for(const MockServer& s) {
    EmbeddingProviderConfig c;
    c.endpoint_url = s.url();
    c.model_id = "mock-embed";
    c.retry_backoff = std::chrono::milliseconds{1};
    return c;
}

}  // namespace

TEST_CASE("cosine similarity", "[embeddings]") {
    const EmbeddingVector x({1, 0}), y({0, 1}), a({1, 2}), b({2, 1});
    CHECK(cosine_similarity(x, x) == Catch::Approx(1.0));
    CHECK(cosine_similarity(x, y) == Catch::Approx(0.0));
    CHECK(cosine_similarity(a, b) == Catch::Approx(0.8));
    CHECK_THROWS_AS(cosine_similarity(x, EmbeddingVector({1, 0, 0})), InvalidArgument);
    CHECK_THROWS_AS(cosine_similarity(x, EmbeddingVector({0, 0})), InvalidArgument);
    CHECK_THROWS_AS(EmbeddingVector(std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(EmbeddingVector({1, NAN}), InvalidArgument);
}

TEST_CASE("hashing embedder is deterministic and lexical", "[embeddings]") {
    HashingEmbedder h(128);
    const auto a = h.embed_one("annual blood pressure screening");
    CHECK(a == h.embed_one("Annual blood pressure screening"));
    CHECK(a.dim() == 128);
    CHECK(cosine_similarity(a, h.embed_one("annual blood pressure screening")) == Catch::Approx(1.0));
    CHECK(cosine_similarity(a, h.embed_one("parking permits")) < 0.3);
    const std::vector<std::string> empty{""};
    CHECK_THROWS_AS(embed_batch(h, empty), InvalidArgument);
}

TEST_CASE("http embedder batches in order", "[embeddings]") {
    MockEmbeddingServer s(16);
    auto cfg = config_for(s);
    cfg.batch_size = 2;
    HttpEmbedder e(cfg);
    const std::vector<std::string> texts = {"a", "b", "c", "d", "e"};
    const auto v = e.embed(texts);
    CHECK(s.calls() == 3);
    HashingEmbedder local(16);
    for (std::size_t i = 0; i < texts.size(); ++i) CHECK(v[i] == local.embed_one(texts[i]));
}

TEST_CASE("http embedder cache hits and offline misses", "[embeddings]") {
    MockEmbeddingServer s(8);
    TempDir tmp;
    auto cfg = config_for(s);
    cfg.cache_path = tmp / "cache.jsonl";
    const std::vector<std::string> one = {"a"};
    {
        HttpEmbedder e(cfg);
        e.embed(one);
        e.embed(one);
        CHECK(s.calls() == 1);
    }
    cfg.offline = true;
    HttpEmbedder offline(cfg);
    CHECK(offline.uncached(one).empty());
    CHECK_NOTHROW(offline.embed(one));
    const std::vector<std::string> miss = {"a", "b", "c"};
    CHECK(offline.uncached(miss).size() == 2);
    try {
        offline.embed(miss);
        FAIL("expected CacheMissError");
    } catch (const CacheMissError& err) {
        CHECK(err.keys().size() == 2);
    }
    CHECK(s.calls() == 1);
}

TEST_CASE("http embedder retries transient failures only", "[embeddings]") {
    MockEmbeddingServer s(8);
    const std::vector<std::string> one = {"x"};
    s.fail_next = 2;
    HttpEmbedder e(config_for(s));
    CHECK_NOTHROW(e.embed(one));
    CHECK(s.calls() == 3);

    s.reset_counters();
    s.fail_next = 1;
    s.fail_status = 400;
    HttpEmbedder fatal(config_for(s));
    CHECK_THROWS_AS(fatal.embed(one), ProviderError);
    CHECK(s.calls() == 1);
}

TEST_CASE("http embedder rejects count mismatch", "[embeddings]") {
    class Short final : public MockServer {
    public:
        Short() : MockServer("/v1/embeddings") { start(); }
        Reply handle(const std::string&) override {
            return {200, R"({"data":[{"index":0,"embedding":[1,0]},{"index":1,"embedding":[0,1]}]})"};
        }
    } s;
    auto cfg = config_for(s);
    cfg.max_retries = 0;
    HttpEmbedder e(cfg);
    const std::vector<std::string> three = {"a", "b", "c"};
    CHECK_THROWS_AS(e.embed(three), ProviderError);
}

TEST_CASE("provider config validation", "[embeddings]") {
    EmbeddingProviderConfig c;
    c.endpoint_url = "http://127.0.0.1:1/v1/embeddings";
    c.model_id = "m";
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.batch_size = 1;
    c.max_in_flight = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("unreachable provider is a provider error", "[embeddings]") {
    EmbeddingProviderConfig c;
    c.endpoint_url = "http://127.0.0.1:1/v1/embeddings";
    c.model_id = "m";
    c.max_retries = 0;
    c.timeout = std::chrono::milliseconds{500};
    HttpEmbedder e(c);
    const std::vector<std::string> one = {"x"};
    CHECK_THROWS_AS(e.embed(one), ProviderError);
}
