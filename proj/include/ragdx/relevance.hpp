#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ragdx/dataset.hpp"
#include "ragdx/embeddings.hpp"
#include "ragdx/normalize.hpp"

namespace ragdx {

struct RelevanceThresholds {
    double token_overlap_min = 0.80;
    double semantic_min = 0.75;

    /// Both must lie in (0, 1]; throws ConfigError otherwise.
    void validate() const;
};

enum class RelevanceLevel { exact_substring, token_overlap, semantic, none };

std::string_view to_string(RelevanceLevel level) noexcept;
RelevanceLevel relevance_level_from_string(std::string_view name);

struct RelevanceVerdict {
    bool hit = false;
    RelevanceLevel level = RelevanceLevel::none;
    /// 1.0 for exact, overlap ratio for token, cosine for semantic; for a miss
    /// the largest score observed by the stages that ran.
    double score = 0.0;

    bool operator==(const RelevanceVerdict&) const = default;
};

/// |unique tokens(gt) ∩ unique tokens(context)| / |unique tokens(gt)|, or 0
/// when the ground truth has no tokens. Inputs are expected normalized.
double token_overlap(std::string_view ground_truth, std::string_view context);

/// A context ready for the cascade: the normalized whole text for the
/// substring and overlap stages, and normalized sentences for the semantic
/// stage (split before normalization strips the punctuation).
struct PreparedContext {
    std::string normalized;
    std::vector<std::string> sentences;
};

PreparedContext prepare_context(std::string_view raw_context, const NormalizationRules& rules);

/// Stages 1 and 2 only. Returns nullopt when the semantic stage must decide.
std::optional<RelevanceVerdict> lexical_relevance(std::string_view normalized_context,
                                                  std::string_view normalized_ground_truth,
                                                  const RelevanceThresholds& thresholds);

/// Full cascade on already-normalized inputs: substring, then token overlap,
/// then the best sentence cosine. `embedder` may be null, in which case the
/// semantic stage is skipped and undecided contexts are misses scored by
/// their overlap ratio.
RelevanceVerdict relevance(std::string_view context, std::string_view ground_truth,
                           const RelevanceThresholds& thresholds, Embedder* embedder);

RelevanceVerdict relevance(const PreparedContext& context, std::string_view normalized_ground_truth,
                           const RelevanceThresholds& thresholds, Embedder* embedder);

struct HitRow {
    std::string query_id;
    std::vector<std::uint8_t> hits;          ///< hits[i] for rank i+1; may be shorter than k
    std::vector<RelevanceVerdict> verdicts;  ///< empty for synthetic matrices

    bool hit_at(std::size_t rank) const noexcept { return rank >= 1 && rank <= hits.size() && hits[rank - 1]; }
    bool any_hit() const noexcept;
};

/// R(context, ground truth) materialized over every (query, rank).
struct HitMatrix {
    std::vector<HitRow> rows;
    std::size_t k = 0;
    bool semantic_stage = true;  ///< false when no embedder was configured

    std::size_t query_count() const noexcept { return rows.size(); }
    const HitRow* find(std::string_view query_id) const;

    /// Synthetic matrix for tests and oracles; ids are "q0", "q1", ...
    static HitMatrix from_bools(const std::vector<std::vector<bool>>& rows, std::size_t k);
};

struct HitMatrixOptions {
    int parallelism = 0;  ///< OpenMP threads; 0 = runtime default
};

/// Normalizes every ground truth and context, runs the lexical stages in
/// parallel, embeds all undecided (ground truth, sentence) texts in one
/// batched call, then scores the semantic stage in parallel.
HitMatrix build_hit_matrix(const EvalSet& set, const RelevanceThresholds& thresholds,
                           const NormalizationRules& rules, Embedder* embedder, const HitMatrixOptions& opts = {});

namespace ref {

/// Serial reference: one relevance() call per cell, no batching.
HitMatrix build_hit_matrix_serial(const EvalSet& set, const RelevanceThresholds& thresholds,
                                  const NormalizationRules& rules, Embedder* embedder);

}  // namespace ref

}  // namespace ragdx
