#include <catch_amalgamated.hpp>

#include <random>

#include "ragdx/cue.hpp"
#include "ragdx/errors.hpp"

using namespace ragdx;

namespace {

struct Case {
    bool hit;
    bool correct;
    double adherence;
};

CueReport report_for(const std::vector<Case>& cases, double threshold) {
    std::vector<std::vector<bool>> rows;
    std::vector<GenerationScores> gen;
    std::map<std::string, double> adh;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        rows.push_back({cases[i].hit});
        GenerationScores s;
        s.query_id = "q" + std::to_string(i);
        s.accuracy = cases[i].correct;
        gen.push_back(s);
        adh[s.query_id] = cases[i].adherence;
    }
    return cue_report(HitMatrix::from_bools(rows, 1), gen, adh, threshold);
}

}  // namespace

TEST_CASE("quadrant definitions", "[cue]") {
    CHECK(classify_query(true, true, 0.9, 0.7) == CueQuadrant::effective_use);
    CHECK(classify_query(true, false, 0.9, 0.7) == CueQuadrant::effective_use);
    CHECK(classify_query(true, true, 0.7, 0.7) == CueQuadrant::effective_use);
    CHECK(classify_query(true, false, 0.69, 0.7) == CueQuadrant::information_blindness);
    CHECK(classify_query(false, true, 0.1, 0.7) == CueQuadrant::lucky_guess);
    CHECK(classify_query(false, true, 0.95, 0.7) == CueQuadrant::lucky_guess);
    CHECK(classify_query(false, false, 0.2, 0.7) == CueQuadrant::correct_rejection);
    CHECK(classify_query(false, false, 0.8, 0.7) == CueQuadrant::residual);
    CHECK_THROWS_AS(classify_query(true, true, 1.1, 0.7), InvalidArgument);
    CHECK_THROWS_AS(classify_query(true, true, 0.5, -0.1), InvalidArgument);
    CHECK(cell_signature(false, false, true) == "no_hit/incorrect/adherent");
}

TEST_CASE("case-study proportions", "[cue]") {
    std::vector<Case> cases;
    for (int i = 0; i < 29; ++i) cases.push_back({true, i < 22, 0.95});
    for (int i = 0; i < 5; ++i) cases.push_back({true, false, 0.40});
    for (int i = 0; i < 20; ++i) cases.push_back({false, true, 0.92});
    for (int i = 0; i < 5; ++i) cases.push_back({false, false, 0.32});
    const auto r = report_for(cases, 0.7);
    CHECK(r.effective_use == Catch::Approx(29.0 / 59.0));
    CHECK(r.lucky_guess == Catch::Approx(20.0 / 59.0));
    CHECK(r.information_blindness == Catch::Approx(5.0 / 59.0));
    CHECK(r.correct_rejection == Catch::Approx(5.0 / 59.0));
    CHECK(r.residual == 0.0);
    CHECK(r.accuracy == Catch::Approx(42.0 / 59.0));
    CHECK(r.any_hit_rate == Catch::Approx(34.0 / 59.0));
    CHECK(r.accuracy_fallacy_gap == Catch::Approx(8.0 / 59.0));
    CHECK(r.proportion(CueQuadrant::lucky_guess) == r.lucky_guess);
}

TEST_CASE("residual cells are reported", "[cue]") {
    const auto r = report_for({{false, false, 0.9}, {false, false, 0.1}, {true, true, 1.0}, {false, false, 0.8}}, 0.7);
    CHECK(r.counts.at(CueQuadrant::residual) == 2);
    CHECK(r.residual == 0.5);
    CHECK(r.residual_cells.at("no_hit/incorrect/adherent") == 0.5);
    CHECK(r.queries[0].signature == "no_hit/incorrect/adherent");
}

TEST_CASE("mismatched ids list both sides", "[cue]") {
    const auto hits = HitMatrix::from_bools({{true}, {false}}, 1);
    std::vector<GenerationScores> gen(2);
    gen[0].query_id = "q0";
    gen[1].query_id = "q9";
    try {
        cue_report(hits, gen, {{"q0", 0.5}, {"q1", 0.5}}, 0.7);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("q1") != std::string::npos);
        CHECK(msg.find("q9") != std::string::npos);
    }
}

TEST_CASE("algebra on random assignments", "[cue]") {
    std::mt19937_64 rng(17);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Case> cases;
    for (int i = 0; i < 400; ++i) cases.push_back({coin(rng), coin(rng), u(rng)});
    std::size_t prev_eu = cases.size() + 1;
    std::optional<double> lucky;
    for (double t : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        const auto r = report_for(cases, t);
        std::size_t total = 0;
        for (const auto& [q, n] : r.counts) total += n;
        CHECK(total == cases.size());
        CHECK(r.effective_use + r.information_blindness + r.lucky_guess + r.correct_rejection + r.residual ==
              Catch::Approx(1.0));
        if (!lucky) lucky = r.lucky_guess;
        CHECK(r.lucky_guess == *lucky);
        const auto eu = r.counts.count(CueQuadrant::effective_use) ? r.counts.at(CueQuadrant::effective_use) : 0;
        CHECK(eu <= prev_eu);
        prev_eu = eu;
    }
}

TEST_CASE("report JSON round-trip", "[cue]") {
    const auto r = report_for({{true, true, 0.9}, {false, false, 0.9}, {false, true, 0.1}}, 0.7);
    const auto j = to_json(r);
    for (const auto* key : {"effective_use", "information_blindness", "lucky_guess", "correct_rejection",
                            "residual_cells", "accuracy", "context_hit_rate", "accuracy_fallacy_gap"}) {
        CHECK(j.contains(key));
    }
    CHECK(to_json(cue_report_from_json(nlohmann::json::parse(j.dump()))) == j);
}
