#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "ragdx/errors.hpp"
#include "ragdx/normalize.hpp"

using namespace ragdx;

TEST_CASE("abbreviations expand after cleanup", "[normalize]") {
    CHECK(normalize_text("Screen for AAA in men", default_rules()) == "screen for abdominal aortic aneurysm in men");
    CHECK(normalize_text("", default_rules()).empty());
    CHECK(normalize_text("BP, BMI!", default_rules()) == "blood pressure body mass index");
}

TEST_CASE("age phrasings share one canonical form", "[normalize]") {
    const auto a = normalize_text("adults aged 65 years and older", default_rules());
    const auto b = normalize_text("adults \xE2\x89\xA5 65 years", default_rules());
    const auto c = normalize_text("Adults >= 65 yrs", default_rules());
    CHECK(a == "adults age >= 65 years");
    CHECK(b == a);
    CHECK(c == a);
    CHECK(normalize_text("children younger than 6 years", default_rules()) == "children age < 6 years");
}

TEST_CASE("gender synonyms unify", "[normalize]") {
    CHECK(normalize_text("Female patients", default_rules()) == "women patients");
    CHECK(normalize_text("a lady and a gentlemen", default_rules()) == "a women and a men");
}

TEST_CASE("general cleanup flags", "[normalize]") {
    CHECK(general_cleanup("  A,  b. ", {}) == "a b");
    CHECK(general_cleanup("A,  b", {false, false, false}) == "A,  b");
    CHECK(normalize_text("Keep, AS is", identity_rules()) == "Keep, AS is");
}

TEST_CASE("rule files", "[normalize]") {
    const auto r = rules_from_json(nlohmann::json::parse(R"({"abbreviations":{"AAA":"abdominal aortic aneurysm"}})"));
    CHECK(r.abbreviations().size() == 1);
    const auto empty = rules_from_json(nlohmann::json::object());
    CHECK(empty.abbreviations().empty());
    CHECK(empty.general() == GeneralCleanup{});
    CHECK_THROWS_AS(rules_from_json(nlohmann::json::parse(R"({"abbreviations":{"A":"B","B":"A"}})")), ConfigError);
    CHECK_THROWS_AS(rules_from_json(nlohmann::json::parse(R"({"abbreviations":{"ab":"x","AB":"y"}})")), ConfigError);
    CHECK_THROWS_AS(rules_from_json(nlohmann::json::parse(R"({"age_patterns":[{"pattern":"(","canonical":"x"}]})")),
                    ConfigError);
    CHECK(load_rules(std::nullopt) == default_rules());
    CHECK(load_rules(ragdx::testing::share_path("normalization_rules.json")) == default_rules());
    CHECK(rules_from_json(default_rules().to_json()) == default_rules());
}

TEST_CASE("normalization is idempotent on fragment soup", "[normalize]") {
    const std::vector<std::string> fragments = {
        "AAA", "bp", "Women", "female", "ladies", "aged 50 years and older", ">= 40 yrs", "under 18 years",
        "at least 21 years of age", "T2DM", "HbA1c", "COPD", "screening", "annual", ",", ".", "!", "  ",
        "(", ")", "-", "\xE2\x89\xA5 30 years", "men", "male", "USPSTF", "65", "years", "older", "<", "="};
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, fragments.size() - 1);
    std::uniform_int_distribution<int> len(0, 12);
    for (int i = 0; i < 500; ++i) {
        std::string s;
        const int n = len(rng);
        for (int j = 0; j < n; ++j) s += fragments[pick(rng)] + (rng() % 2 ? " " : "");
        const auto once = normalize_text(s, default_rules());
        INFO(s);
        CHECK(normalize_text(once, default_rules()) == once);
    }
}
