#include "ragdx/cue.hpp"

#include <cmath>
#include <set>

#include "ragdx/errors.hpp"

namespace ragdx {

std::string_view to_string(CueQuadrant q) noexcept {
    switch (q) {
        case CueQuadrant::effective_use:
            return "effective_use";
        case CueQuadrant::information_blindness:
            return "information_blindness";
        case CueQuadrant::lucky_guess:
            return "lucky_guess";
        case CueQuadrant::correct_rejection:
            return "correct_rejection";
        case CueQuadrant::residual:
            return "residual";
    }
    return "residual";
}

namespace {

CueQuadrant quadrant_from_string(std::string_view s) {
    for (auto q : {CueQuadrant::effective_use, CueQuadrant::information_blindness, CueQuadrant::lucky_guess,
                   CueQuadrant::correct_rejection, CueQuadrant::residual}) {
        if (to_string(q) == s) return q;
    }
    throw InvalidArgument("unknown CUE quadrant '" + std::string(s) + "'");
}

void check_unit(double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw InvalidArgument(std::string(what) + " " + std::to_string(v) + " is outside [0, 1]");
    }
}

}  // namespace

std::string cell_signature(bool hit, bool correct, bool adherent) {
    return std::string(hit ? "hit" : "no_hit") + (correct ? "/correct" : "/incorrect") +
           (adherent ? "/adherent" : "/non_adherent");
}

CueQuadrant classify_query(bool retrieval_hit, bool answer_correct, double adherence, double threshold) {
    check_unit(adherence, "adherence");
    check_unit(threshold, "adherence threshold");
    const bool adherent = adherence >= threshold;
    if (retrieval_hit) return adherent ? CueQuadrant::effective_use : CueQuadrant::information_blindness;
    if (answer_correct) return CueQuadrant::lucky_guess;
    return adherent ? CueQuadrant::residual : CueQuadrant::correct_rejection;
}

double CueReport::proportion(CueQuadrant q) const noexcept {
    switch (q) {
        case CueQuadrant::effective_use:
            return effective_use;
        case CueQuadrant::information_blindness:
            return information_blindness;
        case CueQuadrant::lucky_guess:
            return lucky_guess;
        case CueQuadrant::correct_rejection:
            return correct_rejection;
        case CueQuadrant::residual:
            return residual;
    }
    return 0.0;
}

CueReport cue_report(const HitMatrix& hits, const std::vector<GenerationScores>& generation,
                     const std::map<std::string, double>& adherence, double threshold) {
    check_unit(threshold, "adherence threshold");
    std::map<std::string, const GenerationScores*> gen;
    for (const auto& g : generation) gen.emplace(g.query_id, &g);
    std::set<std::string> hit_ids;
    for (const auto& r : hits.rows) hit_ids.insert(r.query_id);

    std::set<std::string> all = hit_ids;
    for (const auto& [id, _] : gen) all.insert(id);
    for (const auto& [id, _] : adherence) all.insert(id);
    std::string mismatch;
    for (const auto& id : all) {
        std::string missing;
        if (!hit_ids.count(id)) missing += " retrieval";
        if (!gen.count(id)) missing += " generation";
        if (!adherence.count(id)) missing += " adherence";
        if (!missing.empty()) mismatch += "\n  " + id + ": missing from" + missing;
    }
    if (!mismatch.empty() || gen.size() != generation.size()) {
        throw InvalidArgument("CUE inputs cover different query sets:" +
                              (mismatch.empty() ? std::string(" duplicate generation ids") : mismatch));
    }

    CueReport r;
    r.adherence_threshold = threshold;
    std::size_t correct = 0, any_hit = 0;
    std::map<std::string, std::size_t> residual_counts;
    for (const auto& row : hits.rows) {
        CueQueryResult q;
        q.query_id = row.query_id;
        q.hit = row.any_hit();
        q.correct = gen.at(row.query_id)->accuracy;
        q.adherence = adherence.at(row.query_id);
        try {
            q.quadrant = classify_query(q.hit, q.correct, q.adherence, threshold);
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("query '" + q.query_id + "': " + e.what());
        }
        q.signature = cell_signature(q.hit, q.correct, q.adherence >= threshold);
        ++r.counts[q.quadrant];
        if (q.quadrant == CueQuadrant::residual) ++residual_counts[q.signature];
        correct += q.correct ? 1 : 0;
        any_hit += q.hit ? 1 : 0;
        r.queries.push_back(std::move(q));
    }
    const auto n = static_cast<double>(r.queries.size());
    if (n == 0) return r;
    auto frac = [&](std::size_t c) { return static_cast<double>(c) / n; };
    auto count = [&](CueQuadrant q) { return r.counts.count(q) ? r.counts.at(q) : std::size_t{0}; };
    r.effective_use = frac(count(CueQuadrant::effective_use));
    r.information_blindness = frac(count(CueQuadrant::information_blindness));
    r.lucky_guess = frac(count(CueQuadrant::lucky_guess));
    r.correct_rejection = frac(count(CueQuadrant::correct_rejection));
    r.residual = frac(count(CueQuadrant::residual));
    for (const auto& [sig, c] : residual_counts) r.residual_cells[sig] = frac(c);
    r.accuracy = frac(correct);
    r.any_hit_rate = frac(any_hit);
    r.accuracy_fallacy_gap = r.accuracy - r.any_hit_rate;
    return r;
}

nlohmann::ordered_json to_json(const CueReport& r) {
    nlohmann::ordered_json j;
    j["effective_use"] = r.effective_use;
    j["information_blindness"] = r.information_blindness;
    j["lucky_guess"] = r.lucky_guess;
    j["correct_rejection"] = r.correct_rejection;
    nlohmann::ordered_json cells = nlohmann::ordered_json::object();
    for (const auto& [sig, p] : r.residual_cells) cells[sig] = p;
    j["residual_cells"] = cells;
    j["accuracy"] = r.accuracy;
    j["context_hit_rate"] = r.any_hit_rate;
    j["accuracy_fallacy_gap"] = r.accuracy_fallacy_gap;
    j["adherence_threshold"] = r.adherence_threshold;
    nlohmann::ordered_json queries = nlohmann::ordered_json::array();
    for (const auto& q : r.queries) {
        queries.push_back({{"query_id", q.query_id},
                           {"hit", q.hit},
                           {"correct", q.correct},
                           {"adherence", q.adherence},
                           {"quadrant", to_string(q.quadrant)},
                           {"cell", q.signature}});
    }
    j["queries"] = queries;
    return j;
}

CueReport cue_report_from_json(const nlohmann::json& j) {
    CueReport r;
    r.effective_use = j.at("effective_use").get<double>();
    r.information_blindness = j.at("information_blindness").get<double>();
    r.lucky_guess = j.at("lucky_guess").get<double>();
    r.correct_rejection = j.at("correct_rejection").get<double>();
    for (const auto& [sig, p] : j.at("residual_cells").items()) {
        r.residual_cells[sig] = p.get<double>();
        r.residual += p.get<double>();
    }
    r.accuracy = j.at("accuracy").get<double>();
    r.any_hit_rate = j.at("context_hit_rate").get<double>();
    r.accuracy_fallacy_gap = j.at("accuracy_fallacy_gap").get<double>();
    r.adherence_threshold = j.at("adherence_threshold").get<double>();
    for (const auto& q : j.value("queries", nlohmann::json::array())) {
        CueQueryResult res;
        res.query_id = q.at("query_id").get<std::string>();
        res.hit = q.at("hit").get<bool>();
        res.correct = q.at("correct").get<bool>();
        res.adherence = q.at("adherence").get<double>();
        res.quadrant = quadrant_from_string(q.at("quadrant").get<std::string>());
        res.signature = q.at("cell").get<std::string>();
        ++r.counts[res.quadrant];
        r.queries.push_back(std::move(res));
    }
    return r;
}

}  // namespace ragdx
