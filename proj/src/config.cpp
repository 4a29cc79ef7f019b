#include "ragdx/config.hpp"

#include <fstream>
#include <set>

#include "ragdx/errors.hpp"

namespace ragdx {

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(EmbeddingBackend b) noexcept {
    switch (b) {
        case EmbeddingBackend::none:
            return "none";
        case EmbeddingBackend::hashing:
            return "hashing";
        case EmbeddingBackend::http:
            return "http";
    }
    return "none";
}

void RunConfig::validate() const {
    relevance.validate();
    accuracy.validate();
    if (!(adherence_threshold >= 0.0 && adherence_threshold <= 1.0)) {
        throw ConfigError("adherence threshold must lie in [0, 1]");
    }
    if (parallelism < 0) throw ConfigError("parallelism must be >= 0");
    chunking.validate();
    fusion.validate();
    if (embedding.backend == EmbeddingBackend::http) {
        if (embedding.provider.endpoint_url.empty()) throw ConfigError("embedding.endpoint_url is required");
        if (embedding.provider.model_id.empty()) throw ConfigError("embedding.model_id is required");
        embedding.provider.validate();
    }
    if (embedding.backend == EmbeddingBackend::hashing && embedding.hashing_dim < 2) {
        throw ConfigError("embedding.dim must be >= 2");
    }
    if (metrics.judged && !judge) throw ConfigError("judged metrics are enabled but no judge is configured");
    if (judge) {
        if (judge->endpoint_url.empty()) throw ConfigError("judge.endpoint_url is required");
        if (judge->model_id.empty()) throw ConfigError("judge.model_id is required");
        judge->validate();
    }
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
    }
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        dst = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
    }
}

void read_ms(const json& j, const char* key, std::chrono::milliseconds& dst, const std::string& where) {
    long long ms = dst.count();
    read(j, key, ms, where);
    dst = std::chrono::milliseconds(ms);
}

std::optional<fs::path> read_path(const json& j, const char* key, const fs::path& base, const std::string& where) {
    std::string s;
    read(j, key, s, where);
    if (s.empty()) return std::nullopt;
    fs::path p(s);
    return p.is_relative() && !base.empty() ? base / p : p;
}

EmbeddingBackend backend_from_string(const std::string& s) {
    if (s == "none") return EmbeddingBackend::none;
    if (s == "hashing") return EmbeddingBackend::hashing;
    if (s == "http") return EmbeddingBackend::http;
    throw ConfigError("embedding.backend must be one of none, hashing, http");
}

ojson path_json(const std::optional<fs::path>& p) { return p ? ojson(p->string()) : ojson(nullptr); }

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base) {
    check_keys(j,
               {"dataset", "normalization_rules", "report_rules", "output_dir", "parallelism", "offline", "thresholds",
                "metrics", "embedding", "judge", "chunking", "fusion", "annotations"},
               "config");
    RunConfig c;
    if (auto p = read_path(j, "dataset", base, "config")) c.dataset = *p;
    c.normalization_rules = read_path(j, "normalization_rules", base, "config");
    c.report_rules = read_path(j, "report_rules", base, "config");
    if (auto p = read_path(j, "output_dir", base, "config")) c.output_dir = *p;
    read(j, "parallelism", c.parallelism, "config");
    read(j, "offline", c.offline, "config");
    read(j, "annotations", c.annotations, "config");

    if (auto t = j.find("thresholds"); t != j.end()) {
        check_keys(*t, {"token_overlap_min", "semantic_min", "adherence", "accuracy_list_f1", "accuracy_semantic"},
                   "thresholds");
        read(*t, "token_overlap_min", c.relevance.token_overlap_min, "thresholds");
        read(*t, "semantic_min", c.relevance.semantic_min, "thresholds");
        read(*t, "adherence", c.adherence_threshold, "thresholds");
        read(*t, "accuracy_list_f1", c.accuracy.list_f1_min, "thresholds");
        read(*t, "accuracy_semantic", c.accuracy.semantic_min, "thresholds");
    }
    if (auto m = j.find("metrics"); m != j.end()) {
        check_keys(*m, {"judged", "text_overlap_redundancy"}, "metrics");
        read(*m, "judged", c.metrics.judged, "metrics");
        read(*m, "text_overlap_redundancy", c.metrics.text_overlap_redundancy, "metrics");
    }
    if (auto e = j.find("embedding"); e != j.end()) {
        check_keys(*e,
                   {"backend", "endpoint_url", "model_id", "batch_size", "timeout_ms", "cache_path", "api_key_env",
                    "max_in_flight", "max_retries", "retry_backoff_ms", "dim"},
                   "embedding");
        std::string backend = "none";
        read(*e, "backend", backend, "embedding");
        c.embedding.backend = backend_from_string(backend);
        auto& p = c.embedding.provider;
        read(*e, "endpoint_url", p.endpoint_url, "embedding");
        read(*e, "model_id", p.model_id, "embedding");
        read(*e, "batch_size", p.batch_size, "embedding");
        read_ms(*e, "timeout_ms", p.timeout, "embedding");
        p.cache_path = read_path(*e, "cache_path", base, "embedding");
        read(*e, "api_key_env", p.api_key_env, "embedding");
        read(*e, "max_in_flight", p.max_in_flight, "embedding");
        read(*e, "max_retries", p.max_retries, "embedding");
        read_ms(*e, "retry_backoff_ms", p.retry_backoff, "embedding");
        read(*e, "dim", c.embedding.hashing_dim, "embedding");
    }
    if (auto g = j.find("judge"); g != j.end() && !g->is_null()) {
        check_keys(*g,
                   {"endpoint_url", "model_id", "temperature", "max_retries", "timeout_ms", "cache_path",
                    "api_key_env", "max_in_flight", "requests_per_second", "retry_backoff_ms", "prompt_dir"},
                   "judge");
        JudgeConfig jc;
        read(*g, "endpoint_url", jc.endpoint_url, "judge");
        read(*g, "model_id", jc.model_id, "judge");
        read(*g, "temperature", jc.temperature, "judge");
        read(*g, "max_retries", jc.max_retries, "judge");
        read_ms(*g, "timeout_ms", jc.timeout, "judge");
        jc.cache_path = read_path(*g, "cache_path", base, "judge");
        read(*g, "api_key_env", jc.api_key_env, "judge");
        read(*g, "max_in_flight", jc.max_in_flight, "judge");
        read(*g, "requests_per_second", jc.requests_per_second, "judge");
        read_ms(*g, "retry_backoff_ms", jc.retry_backoff, "judge");
        jc.prompt_dir = read_path(*g, "prompt_dir", base, "judge");
        c.judge = std::move(jc);
    }
    if (auto ch = j.find("chunking"); ch != j.end()) {
        check_keys(*ch, {"chunk_size", "overlap"}, "chunking");
        read(*ch, "chunk_size", c.chunking.chunk_size, "chunking");
        read(*ch, "overlap", c.chunking.overlap, "chunking");
    }
    if (auto f = j.find("fusion"); f != j.end()) {
        check_keys(*f, {"alpha", "rrf_k", "top_k", "candidate_pool", "k1", "b"}, "fusion");
        read(*f, "alpha", c.fusion.alpha, "fusion");
        read(*f, "rrf_k", c.fusion.rrf_k, "fusion");
        read(*f, "top_k", c.fusion.top_k, "fusion");
        read(*f, "candidate_pool", c.fusion.candidate_pool, "fusion");
        read(*f, "k1", c.fusion.bm25.k1, "fusion");
        read(*f, "b", c.fusion.bm25.b, "fusion");
    }
    if (c.judge) c.judge->adherence_threshold = c.adherence_threshold;
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

ojson to_json(const RunConfig& c) {
    ojson j;
    j["dataset"] = c.dataset.string();
    j["normalization_rules"] = path_json(c.normalization_rules);
    j["report_rules"] = path_json(c.report_rules);
    j["output_dir"] = c.output_dir.string();
    j["parallelism"] = c.parallelism;
    j["offline"] = c.offline;
    j["thresholds"] = {{"token_overlap_min", c.relevance.token_overlap_min},
                       {"semantic_min", c.relevance.semantic_min},
                       {"adherence", c.adherence_threshold},
                       {"accuracy_list_f1", c.accuracy.list_f1_min},
                       {"accuracy_semantic", c.accuracy.semantic_min}};
    j["metrics"] = {{"judged", c.metrics.judged}, {"text_overlap_redundancy", c.metrics.text_overlap_redundancy}};
    const auto& p = c.embedding.provider;
    ojson e;
    e["backend"] = to_string(c.embedding.backend);
    if (c.embedding.backend == EmbeddingBackend::http) {
        e["endpoint_url"] = p.endpoint_url;
        e["model_id"] = p.model_id;
        e["batch_size"] = p.batch_size;
        e["timeout_ms"] = p.timeout.count();
        e["cache_path"] = path_json(p.cache_path);
        e["api_key_env"] = p.api_key_env;
        e["max_in_flight"] = p.max_in_flight;
        e["max_retries"] = p.max_retries;
        e["retry_backoff_ms"] = p.retry_backoff.count();
    } else if (c.embedding.backend == EmbeddingBackend::hashing) {
        e["dim"] = c.embedding.hashing_dim;
    }
    j["embedding"] = e;
    if (c.judge) {
        const auto& g = *c.judge;
        j["judge"] = {{"endpoint_url", g.endpoint_url},
                      {"model_id", g.model_id},
                      {"temperature", g.temperature},
                      {"max_retries", g.max_retries},
                      {"timeout_ms", g.timeout.count()},
                      {"cache_path", path_json(g.cache_path)},
                      {"api_key_env", g.api_key_env},
                      {"max_in_flight", g.max_in_flight},
                      {"requests_per_second", g.requests_per_second},
                      {"retry_backoff_ms", g.retry_backoff.count()},
                      {"prompt_dir", path_json(g.prompt_dir)}};
    } else {
        j["judge"] = nullptr;
    }
    j["chunking"] = {{"chunk_size", c.chunking.chunk_size}, {"overlap", c.chunking.overlap}};
    j["fusion"] = {{"alpha", c.fusion.alpha},         {"rrf_k", c.fusion.rrf_k}, {"top_k", c.fusion.top_k},
                   {"candidate_pool", c.fusion.candidate_pool}, {"k1", c.fusion.bm25.k1}, {"b", c.fusion.bm25.b}};
    j["annotations"] = c.annotations;
    return j;
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingSettings& s, bool offline) {
    switch (s.backend) {
        case EmbeddingBackend::none:
            return nullptr;
        case EmbeddingBackend::hashing:
            return std::make_unique<HashingEmbedder>(s.hashing_dim);
        case EmbeddingBackend::http: {
            auto cfg = s.provider;
            cfg.offline = cfg.offline || offline;
            return std::make_unique<HttpEmbedder>(std::move(cfg));
        }
    }
    return nullptr;
}

}  // namespace ragdx
