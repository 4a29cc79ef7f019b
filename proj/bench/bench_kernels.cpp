/// Serial reference vs parallel kernel timings.

#include <random>

#include <benchmark/benchmark.h>

#include "ragdx/harness.hpp"
#include "ragdx/relevance.hpp"
#include "ragdx/retrieval_metrics.hpp"

using namespace ragdx;

namespace {

EvalSet synthetic_set(std::size_t n) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> w(0, 500);
    auto phrase = [&](int len) {
        std::string s;
        for (int i = 0; i < len; ++i) s += "term" + std::to_string(w(rng)) + " ";
        return s;
    };
    EvalSet set;
    for (std::size_t i = 0; i < n; ++i) {
        EvalRecord r;
        r.query_id = "q" + std::to_string(i);
        r.question = phrase(8);
        r.ground_truth = phrase(3);
        r.answer = phrase(6);
        for (int k = 1; k <= 5; ++k) {
            auto text = phrase(60) + ". " + phrase(40);
            if (w(rng) % 4 == 0) text += r.ground_truth;
            r.contexts.push_back({k, text, {}});
        }
        set.records.push_back(std::move(r));
    }
    refresh_k(set);
    return set;
}

Corpus synthetic_corpus(std::size_t docs) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> w(0, 2000);
    std::vector<Document> d;
    for (std::size_t i = 0; i < docs; ++i) {
        std::string t;
        for (int j = 0; j < 300; ++j) t += "w" + std::to_string(w(rng)) + " ";
        d.push_back({"doc" + std::to_string(i), t});
    }
    return chunk_documents(d, {128, 16});
}

HitMatrix synthetic_hits(std::size_t n) {
    std::mt19937_64 rng(3);
    std::bernoulli_distribution hit(0.3);
    std::vector<std::vector<bool>> rows(n, std::vector<bool>(5));
    for (auto& r : rows) {
        for (std::size_t i = 0; i < 5; ++i) r[i] = hit(rng);
    }
    return HitMatrix::from_bools(rows, 5);
}

void BM_HitMatrixSerial(benchmark::State& st) {
    const auto set = synthetic_set(static_cast<std::size_t>(st.range(0)));
    HashingEmbedder emb(128);
    for (auto _ : st) benchmark::DoNotOptimize(ref::build_hit_matrix_serial(set, {}, default_rules(), &emb));
}

void BM_HitMatrixParallel(benchmark::State& st) {
    const auto set = synthetic_set(static_cast<std::size_t>(st.range(0)));
    HashingEmbedder emb(128);
    for (auto _ : st) benchmark::DoNotOptimize(build_hit_matrix(set, {}, default_rules(), &emb));
}

void BM_RetrievalReportSerial(benchmark::State& st) {
    const auto hits = synthetic_hits(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(ref::retrieval_report_serial(hits));
}

void BM_RetrievalReportParallel(benchmark::State& st) {
    const auto hits = synthetic_hits(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(retrieval_report(hits));
}

void BM_Bm25Serial(benchmark::State& st) {
    const auto corpus = synthetic_corpus(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(ref::bm25_rank_serial("w1 w20 w300 w1999", corpus, 50));
}

void BM_Bm25Parallel(benchmark::State& st) {
    const auto corpus = synthetic_corpus(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(bm25_rank("w1 w20 w300 w1999", corpus, 50));
}

void BM_DenseSerial(benchmark::State& st) {
    const auto corpus = synthetic_corpus(static_cast<std::size_t>(st.range(0)));
    HashingEmbedder emb(256);
    const DenseIndex index(corpus, emb);
    const auto q = emb.embed_one("w1 w20 w300");
    for (auto _ : st) benchmark::DoNotOptimize(ref::dense_rank_serial(q, index, 50));
}

void BM_DenseParallel(benchmark::State& st) {
    const auto corpus = synthetic_corpus(static_cast<std::size_t>(st.range(0)));
    HashingEmbedder emb(256);
    const DenseIndex index(corpus, emb);
    const auto q = emb.embed_one("w1 w20 w300");
    for (auto _ : st) benchmark::DoNotOptimize(dense_rank(q, index, 50));
}

}  // namespace

BENCHMARK(BM_HitMatrixSerial)->Arg(200);
BENCHMARK(BM_HitMatrixParallel)->Arg(200);
BENCHMARK(BM_RetrievalReportSerial)->Arg(10000);
BENCHMARK(BM_RetrievalReportParallel)->Arg(10000);
BENCHMARK(BM_Bm25Serial)->Arg(500);
BENCHMARK(BM_Bm25Parallel)->Arg(500);
BENCHMARK(BM_DenseSerial)->Arg(500);
BENCHMARK(BM_DenseParallel)->Arg(500);

BENCHMARK_MAIN();
