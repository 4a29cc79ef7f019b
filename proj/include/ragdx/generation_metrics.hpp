#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ragdx/dataset.hpp"
#include "ragdx/embeddings.hpp"
#include "ragdx/normalize.hpp"

namespace ragdx {

struct AccuracyThresholds {
    double list_f1_min = 0.7;
    double semantic_min = 0.7;

    void validate() const;
};

struct GenerationScores {
    std::string query_id;
    TaskType task_type = TaskType::short_answer;
    bool exact_match = false;
    bool fuzzy_match = false;
    double token_f1 = 0.0;
    double rouge_l = 0.0;
    std::optional<double> list_f1;              ///< extraction tasks only
    std::optional<double> semantic_similarity;  ///< absent without an embedder
    bool accuracy = false;
    std::optional<double> answer_relevancy;
    std::optional<double> context_adherence;
};

// Inputs below are expected to be normalized already, except where noted.

bool exact_match(std::string_view answer, std::string_view ground_truth);
/// Either side contains the other; false when exactly one side is empty.
bool fuzzy_match(std::string_view answer, std::string_view ground_truth);
/// Multiset token F1; 1 when both sides are empty, 0 when one is.
double token_f1(std::string_view answer, std::string_view ground_truth);
/// Token LCS F-measure; 1 when both sides are empty, 0 when one is.
double rouge_l(std::string_view answer, std::string_view ground_truth);
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Splits raw text into list items on commas, semicolons, newlines,
/// bullet markers and a standalone "and", then normalizes each item.
std::vector<std::string> split_list_items(std::string_view raw, const NormalizationRules& rules);

/// F1 over a greedy one-to-one matching of list items; items match when one
/// contains the other. Takes raw texts.
double list_component_f1(std::string_view raw_answer, std::string_view raw_ground_truth,
                         const NormalizationRules& rules);

/// Cosine of the two normalized texts, clamped to [0, 1]. Throws
/// InvalidArgument("empty text for embedding") when either side is empty.
double semantic_similarity(std::string_view answer, std::string_view ground_truth, Embedder& embedder);

bool composite_accuracy(const GenerationScores& s, const AccuracyThresholds& t = {});

/// All surface metrics plus (optionally) semantic similarity for one record.
GenerationScores score_record(const EvalRecord& record, const NormalizationRules& rules, Embedder* embedder,
                              const AccuracyThresholds& t = {});

struct GenerationOptions {
    AccuracyThresholds thresholds;
    int parallelism = 0;
};

/// Scores every record: answers and ground truths are embedded in one
/// batched call and the per-record metrics run in parallel. Records with an
/// empty answer get semantic similarity 0 instead of an embedding call.
std::vector<GenerationScores> score_generation(const EvalSet& set, const NormalizationRules& rules,
                                               Embedder* embedder, const GenerationOptions& opts = {});

struct GenerationSummary {
    std::size_t query_count = 0;
    double accuracy = 0.0;
    double exact_match_rate = 0.0;
    double fuzzy_match_rate = 0.0;
    double mean_token_f1 = 0.0;
    double mean_rouge_l = 0.0;
    std::optional<double> mean_list_f1;
    std::optional<double> mean_semantic_similarity;
    std::optional<double> mean_answer_relevancy;
    std::optional<double> mean_context_adherence;
};

GenerationSummary summarize(const std::vector<GenerationScores>& scores);

nlohmann::ordered_json to_json(const GenerationScores& s);
nlohmann::ordered_json to_json(const GenerationSummary& s);
GenerationScores generation_scores_from_json(const nlohmann::json& j);
GenerationSummary generation_summary_from_json(const nlohmann::json& j);

namespace ref {

/// Serial reference: score_record per record, one embed call each.
std::vector<GenerationScores> score_generation_serial(const EvalSet& set, const NormalizationRules& rules,
                                                      Embedder* embedder, const AccuracyThresholds& t = {});

}  // namespace ref

}  // namespace ragdx
