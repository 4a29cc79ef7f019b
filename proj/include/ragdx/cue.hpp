#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ragdx/generation_metrics.hpp"
#include "ragdx/relevance.hpp"

namespace ragdx {

enum class CueQuadrant { effective_use, information_blindness, lucky_guess, correct_rejection, residual };

std::string_view to_string(CueQuadrant q) noexcept;

/// "hit/correct/adherent" style label of the (hit, correct, adherent) cell.
std::string cell_signature(bool hit, bool correct, bool adherent);

/// Context utilization quadrant of one query. When the retriever found the
/// answer, the quadrant depends on whether the generator stayed with the
/// evidence (adherence >= threshold): effective use or information
/// blindness. Otherwise correctness decides: a correct answer is a lucky
/// guess, an incorrect one with low adherence a correct rejection, and an
/// incorrect but adherent answer is residual. Throws InvalidArgument when
/// adherence or threshold lies outside [0, 1].
CueQuadrant classify_query(bool retrieval_hit, bool answer_correct, double adherence, double threshold);

struct CueQueryResult {
    std::string query_id;
    bool hit = false;
    bool correct = false;
    double adherence = 0.0;
    CueQuadrant quadrant = CueQuadrant::residual;
    std::string signature;
};

struct CueReport {
    std::vector<CueQueryResult> queries;
    std::map<CueQuadrant, std::size_t> counts;
    std::map<std::string, double> residual_cells;  ///< signature -> proportion
    double effective_use = 0.0;
    double information_blindness = 0.0;
    double lucky_guess = 0.0;
    double correct_rejection = 0.0;
    double residual = 0.0;
    double accuracy = 0.0;
    double any_hit_rate = 0.0;
    double accuracy_fallacy_gap = 0.0;
    double adherence_threshold = 0.7;

    double proportion(CueQuadrant q) const noexcept;
};

/// Classifies every query. The three inputs must cover the same query ids;
/// otherwise InvalidArgument lists the ids missing from each side.
CueReport cue_report(const HitMatrix& hits, const std::vector<GenerationScores>& generation,
                     const std::map<std::string, double>& adherence, double threshold);

nlohmann::ordered_json to_json(const CueReport& r);
CueReport cue_report_from_json(const nlohmann::json& j);

}  // namespace ragdx
