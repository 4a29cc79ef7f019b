#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "ragdx/config.hpp"
#include "ragdx/errors.hpp"

using namespace ragdx;
using namespace ragdx::testing;

TEST_CASE("defaults", "[config]") {
    const auto c = run_config_from_json(nlohmann::json::object());
    CHECK(c.embedding.backend == EmbeddingBackend::none);
    CHECK_FALSE(c.metrics.judged);
    CHECK(c.relevance.token_overlap_min == 0.80);
    CHECK(c.relevance.semantic_min == 0.75);
    CHECK(c.adherence_threshold == 0.7);
    CHECK(c.fusion.rrf_k == 60);
    CHECK(c.fusion.top_k == 3);
    CHECK(c.chunking.chunk_size == 1024);
    CHECK(c.chunking.overlap == 100);
    CHECK(make_embedder(c.embedding, false) == nullptr);
}

TEST_CASE("full config parses and resolves paths", "[config]") {
    const auto j = nlohmann::json::parse(R"({
        "dataset": "data/eval.jsonl",
        "output_dir": "/abs/out",
        "parallelism": 2,
        "thresholds": {"token_overlap_min": 0.9, "semantic_min": 0.8, "adherence": 0.6,
                       "accuracy_list_f1": 0.75, "accuracy_semantic": 0.85},
        "metrics": {"judged": true, "text_overlap_redundancy": false},
        "embedding": {"backend": "http", "endpoint_url": "http://e", "model_id": "em", "batch_size": 8},
        "judge": {"endpoint_url": "http://j", "model_id": "jm", "cache_path": "cache/j.jsonl", "max_in_flight": 2},
        "chunking": {"chunk_size": 256, "overlap": 32},
        "fusion": {"alpha": 0.3, "top_k": 5}
    })");
    const auto c = run_config_from_json(j, "/base");
    CHECK(c.dataset == "/base/data/eval.jsonl");
    CHECK(c.output_dir == "/abs/out");
    CHECK(c.relevance.token_overlap_min == 0.9);
    CHECK(c.adherence_threshold == 0.6);
    CHECK(c.accuracy.list_f1_min == 0.75);
    CHECK(c.accuracy.semantic_min == 0.85);
    CHECK(c.metrics.judged);
    CHECK_FALSE(c.metrics.text_overlap_redundancy);
    CHECK(c.embedding.backend == EmbeddingBackend::http);
    CHECK(c.embedding.provider.batch_size == 8);
    REQUIRE(c.judge);
    CHECK(c.judge->cache_path == std::filesystem::path("/base/cache/j.jsonl"));
    CHECK(c.judge->max_in_flight == 2);
    CHECK(c.chunking.chunk_size == 256);
    CHECK(c.fusion.alpha == 0.3);
    CHECK(c.fusion.top_k == 5);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("invalid configs", "[config]") {
    auto bad = [](const char* s) { return run_config_from_json(nlohmann::json::parse(s)); };
    CHECK_THROWS_AS(bad(R"({"unknown": 1})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"fusion": {"alpha": "high"}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"embedding": {"backend": "magic"}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"thresholds": {"nope": 1}})"), ConfigError);
    CHECK_THROWS_AS(bad(R"({"metrics": {"judged": true}})").validate(), ConfigError);
    CHECK_THROWS_AS(bad(R"({"thresholds": {"adherence": 2}})").validate(), ConfigError);
    CHECK_THROWS_AS(bad(R"({"embedding": {"backend": "http"}})").validate(), ConfigError);
    CHECK_THROWS_AS(bad(R"({"chunking": {"chunk_size": 10, "overlap": 10}})").validate(), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ConfigError);
    TempDir tmp;
    write_file(tmp / "c.json", "{oops");
    CHECK_THROWS_AS(load_run_config(tmp / "c.json"), ConfigError);
}

TEST_CASE("load from file resolves against the file directory", "[config]") {
    TempDir tmp;
    write_file(tmp / "conf/run.json", R"({"dataset": "eval.jsonl", "embedding": {"backend": "hashing", "dim": 32}})");
    const auto c = load_run_config(tmp / "conf/run.json");
    CHECK(c.dataset == tmp / "conf/eval.jsonl");
    auto e = make_embedder(c.embedding, false);
    REQUIRE(e);
    const std::vector<std::string> t = {"x"};
    CHECK(e->embed(t)[0].dim() == 32);
}

TEST_CASE("snapshot is stable", "[config]") {
    const auto c = run_config_from_json(nlohmann::json::parse(R"({"dataset": "/d.jsonl"})"));
    CHECK(to_json(c) == to_json(run_config_from_json(nlohmann::json::parse(R"({"dataset": "/d.jsonl"})"))));
    CHECK(to_json(c).dump() != to_json(run_config_from_json(nlohmann::json::parse(R"({"dataset": "/e.jsonl"})"))).dump());
}
