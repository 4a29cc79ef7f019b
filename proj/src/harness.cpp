#include "ragdx/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "parallel.hpp"
#include "ragdx/errors.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

void ChunkingConfig::validate() const {
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (overlap >= chunk_size) throw ConfigError("overlap must be smaller than chunk_size");
}

void Bm25Params::validate() const {
    if (!(k1 >= 0.0) || !std::isfinite(k1)) throw ConfigError("bm25 k1 must be >= 0");
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("bm25 b must lie in [0, 1]");
}

void FusionConfig::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
    if (rrf_k < 1) throw ConfigError("rrf_k must be >= 1");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (candidate_pool < top_k) throw ConfigError("candidate_pool must be >= top_k");
    bm25.validate();
}

std::vector<std::string> index_terms(std::string_view text) { return text::tokenize(text::fold_case(text)); }

Corpus::Corpus(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {
    tf_.resize(chunks_.size());
    length_.resize(chunks_.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        if (!by_id_.emplace(chunks_[i].chunk_id, i).second) {
            throw InvalidArgument("duplicate chunk id '" + chunks_[i].chunk_id + "'");
        }
        const auto terms = index_terms(chunks_[i].text);
        for (const auto& t : terms) ++tf_[i][t];
        for (const auto& [t, _] : tf_[i]) ++df_[t];
        length_[i] = terms.size();
        total += terms.size();
    }
    avgdl_ = chunks_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(chunks_.size());
}

const Chunk* Corpus::find(std::string_view chunk_id) const {
    auto it = by_id_.find(chunk_id);
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

std::size_t Corpus::document_frequency(const std::string& term) const {
    auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
}

Corpus chunk_documents(const std::vector<Document>& docs, const ChunkingConfig& cfg) {
    cfg.validate();
    std::vector<Chunk> chunks;
    std::vector<std::string> warnings;
    const auto stride = cfg.chunk_size - cfg.overlap;
    for (const auto& doc : docs) {
        const auto tokens = text::split_whitespace(doc.text);
        if (tokens.empty()) {
            warnings.push_back("document '" + doc.doc_id + "' is empty and produced no chunks");
            continue;
        }
        std::size_t index = 0;
        for (std::size_t start = 0;; start += stride) {
            const auto end = std::min(start + cfg.chunk_size, tokens.size());
            Chunk c;
            char id[16];
            std::snprintf(id, sizeof id, "#%04zu", index++);
            c.chunk_id = doc.doc_id + id;
            c.doc_id = doc.doc_id;
            c.start_token = start;
            c.token_count = end - start;
            for (std::size_t t = start; t < end; ++t) {
                if (t > start) c.text += ' ';
                c.text += tokens[t];
            }
            chunks.push_back(std::move(c));
            if (end == tokens.size()) break;
        }
    }
    Corpus corpus(std::move(chunks));
    corpus.warnings = std::move(warnings);
    return corpus;
}

double bm25_idf(std::size_t n_chunks, std::size_t df) {
    const auto n = static_cast<double>(n_chunks);
    const auto d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

namespace {

bool ranked_before(const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk_id < b.chunk_id;
}

std::vector<Ranked> top_n_of(std::vector<Ranked> all, std::size_t top_n) {
    const auto n = std::min(top_n, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), ranked_before);
    all.resize(n);
    return all;
}

struct QueryTerms {
    std::vector<std::string> terms;
    std::vector<double> idf;
};

QueryTerms query_terms(std::string_view query, const Corpus& corpus) {
    QueryTerms q;
    const auto toks = index_terms(query);
    const std::set<std::string> unique(toks.begin(), toks.end());
    for (const auto& t : unique) {
        const auto df = corpus.document_frequency(t);
        if (df == 0) continue;
        q.terms.push_back(t);
        q.idf.push_back(bm25_idf(corpus.size(), df));
    }
    return q;
}

double bm25_score(const QueryTerms& q, const Corpus& corpus, std::size_t i, const Bm25Params& p) {
    const auto& tf = corpus.term_frequencies(i);
    const double avgdl = corpus.average_length();
    const double norm = avgdl > 0.0 ? static_cast<double>(corpus.length(i)) / avgdl : 0.0;
    double score = 0.0;
    for (std::size_t t = 0; t < q.terms.size(); ++t) {
        auto it = tf.find(q.terms[t]);
        if (it == tf.end()) continue;
        const auto f = static_cast<double>(it->second);
        score += q.idf[t] * f * (p.k1 + 1.0) / (f + p.k1 * (1.0 - p.b + p.b * norm));
    }
    return score;
}

}  // namespace

std::vector<Ranked> bm25_rank(std::string_view query, const Corpus& corpus, std::size_t top_n,
                              const Bm25Params& params, int parallelism) {
    params.validate();
    const auto q = query_terms(query, corpus);
    if (q.terms.empty()) return {};
    std::vector<double> scores(corpus.size(), 0.0);
    const int threads = detail::thread_count(parallelism);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(corpus.size()); ++i) {
        scores[static_cast<std::size_t>(i)] = bm25_score(q, corpus, static_cast<std::size_t>(i), params);
    }
    std::vector<Ranked> all;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > 0.0) all.push_back({corpus.chunks()[i].chunk_id, scores[i]});
    }
    return top_n_of(std::move(all), top_n);
}

DenseIndex::DenseIndex(const Corpus& corpus, Embedder& embedder) : corpus_(&corpus) {
    std::vector<std::string> texts;
    texts.reserve(corpus.size());
    for (const auto& c : corpus.chunks()) texts.push_back(c.text);
    if (!texts.empty()) vectors_ = embed_batch(embedder, texts);
}

std::vector<Ranked> dense_rank(const EmbeddingVector& query, const DenseIndex& index, std::size_t top_n,
                               int parallelism) {
    const auto& vecs = index.vectors();
    std::vector<Ranked> all(vecs.size());
    detail::ErrorSlot errors;
    const int threads = detail::thread_count(parallelism);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(vecs.size()); ++i) {
        errors.run([&, i = static_cast<std::size_t>(i)] {
            all[i] = {index.corpus().chunks()[i].chunk_id, cosine_similarity(query, vecs[i])};
        });
    }
    errors.rethrow();
    return top_n_of(std::move(all), top_n);
}

std::vector<Ranked> dense_rank(std::string_view query, const Corpus& corpus, Embedder& embedder,
                               std::size_t top_n) {
    if (corpus.size() == 0) return {};
    const DenseIndex index(corpus, embedder);
    const std::vector<std::string> q{std::string(query)};
    return dense_rank(embed_batch(embedder, q).front(), index, top_n);
}

std::vector<Fused> rrf_fuse_all(const std::vector<Ranked>& sparse, const std::vector<Ranked>& dense,
                                const FusionConfig& cfg) {
    cfg.validate();
    std::unordered_map<std::string, Fused> by_id;
    const double k = cfg.rrf_k;
    for (std::size_t r = 0; r < sparse.size(); ++r) {
        auto& f = by_id[sparse[r].chunk_id];
        f.chunk_id = sparse[r].chunk_id;
        if (f.sparse_rank) continue;
        f.sparse_rank = r + 1;
    }
    for (std::size_t r = 0; r < dense.size(); ++r) {
        auto& f = by_id[dense[r].chunk_id];
        f.chunk_id = dense[r].chunk_id;
        if (f.dense_rank) continue;
        f.dense_rank = r + 1;
    }
    std::vector<Fused> out;
    out.reserve(by_id.size());
    for (auto& [_, f] : by_id) {
        const double s = f.sparse_rank ? 1.0 / (k + static_cast<double>(*f.sparse_rank)) : 0.0;
        const double d = f.dense_rank ? 1.0 / (k + static_cast<double>(*f.dense_rank)) : 0.0;
        f.score = (1.0 - cfg.alpha) * s + cfg.alpha * d;
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), [](const Fused& a, const Fused& b) {
        if (a.score != b.score) return a.score > b.score;
        const auto ad = a.dense_rank.value_or(SIZE_MAX), bd = b.dense_rank.value_or(SIZE_MAX);
        if (ad != bd) return ad < bd;
        return a.chunk_id < b.chunk_id;
    });
    return out;
}

std::vector<Fused> rrf_fuse(const std::vector<Ranked>& sparse, const std::vector<Ranked>& dense,
                            const FusionConfig& cfg) {
    auto all = rrf_fuse_all(sparse, dense, cfg);
    if (all.size() > cfg.top_k) all.resize(cfg.top_k);
    return all;
}

namespace {

RetrievalResult finish(std::vector<Fused> fused, const Corpus& corpus, const FusionConfig& cfg) {
    RetrievalResult res;
    res.fused = std::move(fused);
    for (std::size_t i = 0; i < res.fused.size(); ++i) {
        const auto* chunk = corpus.find(res.fused[i].chunk_id);
        res.contexts.push_back({static_cast<int>(i + 1), chunk->text, res.fused[i].score});
    }
    if (res.contexts.size() < cfg.top_k) {
        res.warnings.push_back("short context list: " + std::to_string(res.contexts.size()) + " of top_k=" +
                               std::to_string(cfg.top_k));
    }
    return res;
}

std::vector<Ranked> dense_list(std::string_view query, const FusionConfig& cfg, Embedder* embedder,
                               const DenseIndex* index, int parallelism) {
    if (cfg.alpha == 0.0 || index == nullptr || embedder == nullptr || index->vectors().empty()) return {};
    const std::vector<std::string> q{std::string(query)};
    return dense_rank(embed_batch(*embedder, q).front(), *index, cfg.candidate_pool, parallelism);
}

}  // namespace

RetrievalResult retrieve(std::string_view query, const Corpus& corpus, const FusionConfig& cfg, Embedder* embedder,
                         const DenseIndex* index, int parallelism) {
    cfg.validate();
    if (cfg.alpha > 0.0 && (embedder == nullptr || index == nullptr)) {
        throw ConfigError("alpha > 0 needs an embedder and a dense index");
    }
    const auto sparse = bm25_rank(query, corpus, cfg.candidate_pool, cfg.bm25, parallelism);
    const auto dense = dense_list(query, cfg, embedder, index, parallelism);
    return finish(rrf_fuse(sparse, dense, cfg), corpus, cfg);
}

std::vector<RetrievalResult> sweep_alpha(std::string_view query, const Corpus& corpus, FusionConfig cfg,
                                         const std::vector<double>& alphas, Embedder* embedder,
                                         const DenseIndex* index) {
    const bool need_dense = std::any_of(alphas.begin(), alphas.end(), [](double a) { return a > 0.0; });
    if (need_dense && (embedder == nullptr || index == nullptr)) {
        throw ConfigError("alpha > 0 needs an embedder and a dense index");
    }
    const auto sparse = bm25_rank(query, corpus, cfg.candidate_pool, cfg.bm25);
    FusionConfig dense_cfg = cfg;
    dense_cfg.alpha = need_dense ? 1.0 : 0.0;
    const auto dense = dense_list(query, dense_cfg, embedder, index, 0);
    std::vector<RetrievalResult> out;
    for (double a : alphas) {
        cfg.alpha = a;
        out.push_back(finish(rrf_fuse(sparse, dense, cfg), corpus, cfg));
    }
    return out;
}

std::vector<Document> load_documents(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw ConfigError("corpus path '" + path.string() + "' does not exist");
    std::vector<Document> docs;
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ConfigError("cannot read '" + p.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) docs.push_back({f.filename().string(), slurp(f)});
        return docs;
    }
    std::istringstream in(slurp(path));
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (text::trim(raw).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(raw);
            docs.push_back({j.at("doc_id").get<std::string>(), j.at("text").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path.string() + ": line " + std::to_string(line) + ": " + e.what());
        }
    }
    return docs;
}

std::vector<EvalRecord> load_queries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read queries file '" + path.string() + "'");
    std::vector<EvalRecord> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (text::trim(raw).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error& e) {
            throw DatasetError(path.string() + ": line " + std::to_string(line) + ": malformed JSON: " + e.what(),
                               {line});
        }
        if (j.is_object()) {
            if (!j.contains("ground_truth")) j["ground_truth"] = "";
            if (!j.contains("answer")) j["answer"] = "";
            if (!j.contains("contexts")) j["contexts"] = nlohmann::json::array();
        }
        try {
            out.push_back(record_from_json(j, line));
        } catch (const DatasetError& e) {
            throw DatasetError(path.string() + ": " + e.what(), e.lines());
        }
    }
    return out;
}

namespace ref {

std::vector<Ranked> bm25_rank_serial(std::string_view query, const Corpus& corpus, std::size_t top_n,
                                     const Bm25Params& params) {
    params.validate();
    const auto q = query_terms(query, corpus);
    std::vector<Ranked> all;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const double s = bm25_score(q, corpus, i, params);
        if (s > 0.0) all.push_back({corpus.chunks()[i].chunk_id, s});
    }
    std::stable_sort(all.begin(), all.end(), ranked_before);
    if (all.size() > top_n) all.resize(top_n);
    return all;
}

std::vector<Ranked> dense_rank_serial(const EmbeddingVector& query, const DenseIndex& index, std::size_t top_n) {
    std::vector<Ranked> all;
    for (std::size_t i = 0; i < index.vectors().size(); ++i) {
        all.push_back({index.corpus().chunks()[i].chunk_id, cosine_similarity(query, index.vectors()[i])});
    }
    std::stable_sort(all.begin(), all.end(), ranked_before);
    if (all.size() > top_n) all.resize(top_n);
    return all;
}

}  // namespace ref

}  // namespace ragdx
