#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragdx/dataset.hpp"
#include "ragdx/embeddings.hpp"

namespace ragdx {

struct ChunkingConfig {
    std::size_t chunk_size = 1024;  ///< whitespace tokens
    std::size_t overlap = 100;

    void validate() const;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const;
};

struct FusionConfig {
    double alpha = 0.5;  ///< weight of the dense list; 0 = pure BM25
    int rrf_k = 60;
    std::size_t top_k = 3;
    std::size_t candidate_pool = 50;  ///< depth taken from each list before fusion
    Bm25Params bm25;

    void validate() const;
};

struct Document {
    std::string doc_id;
    std::string text;
};

struct Chunk {
    std::string chunk_id;  ///< "<doc_id>#0000"
    std::string doc_id;
    std::string text;
    std::size_t start_token = 0;
    std::size_t token_count = 0;
};

/// Chunks plus the BM25 statistics over them. Immutable once built.
class Corpus {
public:
    Corpus() = default;
    /// Throws InvalidArgument on duplicate chunk ids.
    explicit Corpus(std::vector<Chunk> chunks);

    const std::vector<Chunk>& chunks() const noexcept { return chunks_; }
    std::size_t size() const noexcept { return chunks_.size(); }
    const Chunk* find(std::string_view chunk_id) const;

    const std::map<std::string, std::size_t>& term_frequencies(std::size_t i) const { return tf_[i]; }
    std::size_t length(std::size_t i) const { return length_[i]; }
    std::size_t document_frequency(const std::string& term) const;
    double average_length() const noexcept { return avgdl_; }

    std::vector<std::string> warnings;

private:
    std::vector<Chunk> chunks_;
    std::vector<std::map<std::string, std::size_t>> tf_;
    std::vector<std::size_t> length_;
    std::map<std::string, std::size_t> df_;
    std::map<std::string, std::size_t, std::less<>> by_id_;
    double avgdl_ = 0.0;
};

/// Case-folded word tokens as indexed by BM25.
std::vector<std::string> index_terms(std::string_view text);

/// Sliding windows of chunk_size whitespace tokens advancing by
/// chunk_size - overlap; the last window may be shorter. Empty documents
/// produce no chunks and a warning.
Corpus chunk_documents(const std::vector<Document>& docs, const ChunkingConfig& cfg = {});

struct Ranked {
    std::string chunk_id;
    double score = 0.0;

    bool operator==(const Ranked&) const = default;
};

/// log(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_idf(std::size_t n_chunks, std::size_t df);

/// Chunks with a positive BM25 score, descending, ties by chunk_id.
std::vector<Ranked> bm25_rank(std::string_view query, const Corpus& corpus, std::size_t top_n,
                              const Bm25Params& params = {}, int parallelism = 0);

/// Chunk embeddings for a corpus, computed in one batched call.
class DenseIndex {
public:
    DenseIndex(const Corpus& corpus, Embedder& embedder);

    const std::vector<EmbeddingVector>& vectors() const noexcept { return vectors_; }
    const Corpus& corpus() const noexcept { return *corpus_; }

private:
    const Corpus* corpus_;
    std::vector<EmbeddingVector> vectors_;
};

/// Exhaustive cosine scan, descending, ties by chunk_id.
std::vector<Ranked> dense_rank(const EmbeddingVector& query, const DenseIndex& index, std::size_t top_n,
                               int parallelism = 0);
std::vector<Ranked> dense_rank(std::string_view query, const Corpus& corpus, Embedder& embedder,
                               std::size_t top_n);

struct Fused {
    std::string chunk_id;
    double score = 0.0;
    std::optional<std::size_t> sparse_rank;
    std::optional<std::size_t> dense_rank;
};

/// (1 - alpha) * 1/(rrf_k + sparse rank) + alpha * 1/(rrf_k + dense rank),
/// a missing list contributing 0. Top top_k by score, ties by dense rank
/// (absent last) then chunk_id.
std::vector<Fused> rrf_fuse(const std::vector<Ranked>& sparse, const std::vector<Ranked>& dense,
                            const FusionConfig& cfg);

/// Same fusion over the whole union without truncation.
std::vector<Fused> rrf_fuse_all(const std::vector<Ranked>& sparse, const std::vector<Ranked>& dense,
                                const FusionConfig& cfg);

struct RetrievalResult {
    std::vector<RetrievedContext> contexts;  ///< ranks 1..n, retriever_score = fused score
    std::vector<Fused> fused;
    std::vector<std::string> warnings;
};

/// BM25 and dense ranking over candidate_pool, fused and cut to top_k.
/// `index` may be null when alpha == 0, in which case no embedding is done.
RetrievalResult retrieve(std::string_view query, const Corpus& corpus, const FusionConfig& cfg,
                         Embedder* embedder, const DenseIndex* index, int parallelism = 0);

/// retrieve() once per alpha, reusing both ranked lists.
std::vector<RetrievalResult> sweep_alpha(std::string_view query, const Corpus& corpus, FusionConfig cfg,
                                         const std::vector<double>& alphas, Embedder* embedder,
                                         const DenseIndex* index);

/// Directory of text files (doc_id = file name, sorted) or a JSONL file of
/// {doc_id, text}. Throws ConfigError when the path is missing.
std::vector<Document> load_documents(const std::filesystem::path& path);

/// JSONL queries {query_id, question, ground_truth?, task_type?, metadata?}.
std::vector<EvalRecord> load_queries(const std::filesystem::path& path);

namespace ref {

std::vector<Ranked> bm25_rank_serial(std::string_view query, const Corpus& corpus, std::size_t top_n,
                                     const Bm25Params& params = {});
std::vector<Ranked> dense_rank_serial(const EmbeddingVector& query, const DenseIndex& index, std::size_t top_n);

}  // namespace ref

}  // namespace ragdx
