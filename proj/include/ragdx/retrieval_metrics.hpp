#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ragdx/dataset.hpp"
#include "ragdx/normalize.hpp"
#include "ragdx/relevance.hpp"

namespace ragdx {

using Matrix = std::vector<std::vector<double>>;

struct RetrievalReport {
    double recall_at_k = 0.0;
    double mrr = 0.0;
    double map = 0.0;
    double ndcg = 0.0;
    std::vector<double> context_hit_rate;    ///< index i is rank i+1
    double no_hit_rate = 0.0;
    std::vector<double> exclusive_hit_rate;  ///< index i is rank i+1
    Matrix pairwise_redundancy;              ///< k x k, diagonal = context_hit_rate
    std::optional<Matrix> pairwise_text_overlap;
    std::optional<double> mean_context_relevancy;
    std::size_t query_count = 0;
    std::size_t k = 0;

    double any_hit_rate() const noexcept { return 1.0 - no_hit_rate; }
};

double recall_at_k(const HitMatrix& hits, std::size_t k);
double mrr(const HitMatrix& hits);
double mean_average_precision(const HitMatrix& hits);
double ndcg(const HitMatrix& hits);
std::vector<double> context_k_hit_rate(const HitMatrix& hits);
double no_hit_rate(const HitMatrix& hits);
std::vector<double> exclusive_hit_rate(const HitMatrix& hits);
/// Fraction of queries where ranks i and j (1-based) are both hits.
double pairwise_redundancy(const HitMatrix& hits, std::size_t i, std::size_t j);

/// Per-query AP, reciprocal rank and nDCG; 0 for a query with no hits.
double average_precision(const HitRow& row);
double reciprocal_rank(const HitRow& row);
double ndcg_row(const HitRow& row, std::size_t k);

/// Mean token Jaccard between the normalized texts at ranks i and j,
/// averaged over queries that have both ranks.
Matrix pairwise_text_overlap(const EvalSet& set, const NormalizationRules& rules);

/// Every metric in a single parallel pass over the rows.
RetrievalReport retrieval_report(const HitMatrix& hits, int parallelism = 0);

nlohmann::ordered_json to_json(const RetrievalReport& r);
RetrievalReport retrieval_report_from_json(const nlohmann::json& j);

namespace ref {

/// Serial reference built from the individual metric functions.
RetrievalReport retrieval_report_serial(const HitMatrix& hits);

}  // namespace ref

}  // namespace ragdx
