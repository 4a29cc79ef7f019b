#include <catch_amalgamated.hpp>

#include <sstream>

#include "fixtures.hpp"
#include "ragdx/dataset.hpp"
#include "ragdx/errors.hpp"

using namespace ragdx;
using namespace ragdx::testing;

namespace {

std::string line(const std::string& id, const std::string& contexts, const std::string& extra = "") {
    return R"({"query_id":")" + id + R"(","question":"q","ground_truth":"gt","answer":"a","contexts":)" + contexts +
           extra + "}\n";
}

EvalSet parse(const std::string& s) {
    std::istringstream in(s);
    return parse_eval_set(in, "mem.jsonl");
}

}  // namespace

TEST_CASE("parse a well-formed set", "[dataset]") {
    const auto set = parse(line("q1", R"([{"rank":2,"text":"b"},{"rank":1,"text":"a","score":0.5}])") + "\n" +
                           line("q2", R"([{"rank":1,"text":"c"}])", R"(,"task_type":"extraction","metadata":{"s":"x"})"));
    REQUIRE(set.records.size() == 2);
    CHECK(set.k == 2);
    CHECK(set.records[0].contexts[0].text == "a");
    CHECK(set.records[0].contexts[0].retriever_score == 0.5);
    CHECK(set.records[1].task_type == TaskType::extraction);
    CHECK(set.records[1].metadata.at("s") == "x");
    CHECK(set.records[1].line == 3);
    CHECK(set.find("q2") == &set.records[1]);
    CHECK(set.find("zz") == nullptr);
}

TEST_CASE("duplicate query ids report both lines", "[dataset]") {
    try {
        parse(line("q1", R"([{"rank":1,"text":"a"}])") + line("q1", R"([{"rank":1,"text":"a"}])"));
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(std::find(e.lines().begin(), e.lines().end(), 1) != e.lines().end());
        CHECK(std::find(e.lines().begin(), e.lines().end(), 2) != e.lines().end());
        CHECK(std::string(e.what()).find("duplicate query_id") != std::string::npos);
    }
}

TEST_CASE("schema and invariant violations are dataset errors", "[dataset]") {
    CHECK_THROWS_AS(parse("{not json}\n"), DatasetError);
    CHECK_THROWS_AS(parse(R"({"query_id":"q","question":"q","answer":"a","contexts":[]})" "\n"), DatasetError);
    CHECK_THROWS_AS(parse(line("q", R"([{"rank":1,"text":"a"},{"rank":3,"text":"b"}])")), DatasetError);
    CHECK_THROWS_AS(parse(line("q", R"([{"rank":1,"text":"a"},{"rank":1,"text":"b"}])")), DatasetError);
    CHECK_THROWS_AS(parse(line("q", R"([{"rank":1,"text":""}])")), DatasetError);
    CHECK_THROWS_AS(parse(line("q", R"([{"rank":1,"text":"a"}])", R"(,"task_type":"essay")")), DatasetError);
    CHECK_THROWS_AS(parse(""), DatasetError);
    try {
        parse(line("q1", R"([{"rank":1,"text":"a"}])") + "[1,2]\n");
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(e.lines() == std::vector<std::size_t>{2});
    }
}

TEST_CASE("validation warnings do not fail parsing", "[dataset]") {
    const auto set = parse(R"({"query_id":"q1","question":"q","ground_truth":"gt","answer":"","contexts":[{"rank":1,"text":"a"},{"rank":2,"text":"b"}]})"
                           "\n" + line("q2", R"([{"rank":1,"text":"c"}])"));
    const auto report = validate_eval_set(set);
    CHECK(report.valid());
    CHECK(report.warning_count() == 2);
    CHECK(validate_eval_set(set, {.generation_run = false}).warning_count() == 1);
    CHECK(report.to_text().find("empty answer") != std::string::npos);
}

TEST_CASE("validate reports an inconsistent k", "[dataset]") {
    EvalSet set;
    set.records.push_back({"q", "question", "gt", "a", {{1, "x", std::nullopt}}, TaskType::mcq, {}, 0});
    set.k = 4;
    CHECK_FALSE(validate_eval_set(set).valid());
    refresh_k(set);
    CHECK(validate_eval_set(set).valid());
}

TEST_CASE("write then parse round-trips", "[dataset]") {
    const auto set = load_eval_set(fixture_path("case_study.jsonl"));
    REQUIRE(set.records.size() == 59);
    std::ostringstream out;
    write_eval_set(set, out);
    CHECK(parse(out.str()) == set);
    TempDir tmp;
    save_eval_set(set, tmp / "copy.jsonl");
    CHECK(load_eval_set(tmp / "copy.jsonl") == set);
    CHECK_THROWS_AS(load_eval_set(tmp / "missing.jsonl"), DatasetError);
}
