#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "ragdx/judge.hpp"

using namespace ragdx;
using namespace ragdx::testing;

namespace {

JudgeConfig config_for(const MockServer& s) {
    JudgeConfig c;
    c.endpoint_url = s.url();
    c.model_id = "mock-judge";
    c.retry_backoff = std::chrono::milliseconds{1};
    return c;
}

MockJudgeServer::Handler constant(double v) {
    return [v](const ParsedPrompt&, std::size_t) -> MockJudgeServer::Answer { return {200, score_reply(v)}; };
}

}  // namespace

TEST_CASE("reply parsing", "[judge]") {
    CHECK(parse_judge_reply(R"({"score": 0.4})") == 0.4);
    const auto r = parse_judge_reply_full("Sure! {\"note\": {\"x\": 1}} then {\"score\": 1, \"rationale\": \"ok\"} end");
    CHECK(r.score == 1.0);
    CHECK(r.rationale == "ok");
    auto kind_of = [](std::string_view s) {
        try {
            parse_judge_reply(s);
        } catch (const JudgeReplyError& e) {
            return e.kind();
        }
        FAIL("reply accepted: " << s);
        return JudgeReplyError::Kind::no_json;
    };
    CHECK(kind_of("great context!") == JudgeReplyError::Kind::no_json);
    CHECK(kind_of(R"({"rating": 1})") == JudgeReplyError::Kind::missing_score);
    CHECK(kind_of(R"({"score": "high"})") == JudgeReplyError::Kind::not_numeric);
    CHECK(kind_of(R"({"score": 1.5})") == JudgeReplyError::Kind::out_of_range);
    CHECK(kind_of(R"({"score": -0.1})") == JudgeReplyError::Kind::out_of_range);
}

TEST_CASE("templates", "[judge]") {
    CHECK(render_template("Q: {{question}}", {{"question", "why"}}) == "Q: why");
    CHECK_THROWS_AS(render_template("{{nope}}", {{"question", "x"}}), ConfigError);
    const auto d = PromptTemplates::defaults();
    CHECK_NOTHROW(d.validate());
    CHECK(d.for_kind(JudgeKind::context_adherence).find("{{answer}}") != std::string::npos);
    TempDir tmp;
    write_file(tmp / "answer_relevancy.txt", "Q {{question}} A {{answer}}");
    const auto loaded = PromptTemplates::load(tmp.path());
    CHECK(loaded.answer_relevancy == "Q {{question}} A {{answer}}");
    CHECK(loaded.context_relevancy == d.context_relevancy);
    write_file(tmp / "context_relevancy.txt", "only {{question}}");
    CHECK_THROWS_AS(PromptTemplates::load(tmp.path()), ConfigError);
    const std::vector<std::string> ctx = {"one", "two"};
    CHECK(format_ranked_contexts(ctx) == "[Context 1]\none\n\n[Context 2]\ntwo");
}

TEST_CASE("retry then succeed", "[judge]") {
    MockJudgeServer s([](const ParsedPrompt&, std::size_t n) -> MockJudgeServer::Answer {
        return n < 2 ? MockJudgeServer::Answer{200, "great context!"} : MockJudgeServer::Answer{200, score_reply(0.4)};
    });
    JudgeClient j(config_for(s));
    const auto score = j.judge_context_relevancy("question", "context");
    CHECK(score.value == 0.4);
    CHECK(score.retry_count == 2);
    CHECK(score.judge_model == "mock-judge");
    CHECK(score.rationale == "mock");
    CHECK(s.calls() == 3);
    CHECK(j.call_count() == 3);
}

TEST_CASE("exhausted retries and fatal statuses", "[judge]") {
    MockJudgeServer s(constant(1.5));
    JudgeClient j(config_for(s));
    CHECK_THROWS_AS(j.judge_answer_relevancy("q", "a"), JudgeReplyError);
    CHECK(s.calls() == 3);

    s.reset_counters();
    s.set_handler([](const ParsedPrompt&, std::size_t) -> MockJudgeServer::Answer { return {401, ""}; });
    CHECK_THROWS_AS(j.judge_answer_relevancy("q", "b"), ProviderError);
    CHECK(s.calls() == 1);
}

TEST_CASE("empty inputs are rejected before any call", "[judge]") {
    MockJudgeServer s(constant(1.0));
    JudgeClient j(config_for(s));
    const std::vector<std::string> ctx = {"c"};
    CHECK_THROWS_WITH(j.judge_context_adherence("", ctx), Catch::Matchers::ContainsSubstring("empty answer"));
    CHECK_THROWS_AS(j.judge_answer_relevancy("", "a"), InvalidArgument);
    CHECK_THROWS_AS(j.judge_context_relevancy("q", ""), InvalidArgument);
    CHECK(s.calls() == 0);
}

TEST_CASE("prompts reach the judge with their fields", "[judge]") {
    std::vector<ParsedPrompt> seen;
    std::mutex m;
    MockJudgeServer s([&](const ParsedPrompt& p, std::size_t) -> MockJudgeServer::Answer {
        std::lock_guard lock(m);
        seen.push_back(p);
        return {200, score_reply(0.5)};
    });
    JudgeClient j(config_for(s));
    const std::vector<std::string> ctx = {"first", "second"};
    j.judge_context_adherence("the answer", ctx);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].kind == "context_adherence");
    CHECK(seen[0].answer == "the answer");
    CHECK(seen[0].context == "[Context 1]\nfirst\n\n[Context 2]\nsecond");
}

TEST_CASE("cache hits make no calls and offline misses are listed", "[judge]") {
    MockJudgeServer s(constant(0.7));
    TempDir tmp;
    auto cfg = config_for(s);
    cfg.cache_path = tmp / "judge.jsonl";
    std::vector<JudgeRequest> reqs = {JudgeClient::answer_relevancy_request("q", "a1"),
                                      JudgeClient::answer_relevancy_request("q", "a2")};
    JudgeScore first;
    {
        JudgeClient j(cfg);
        first = j.judge_many(reqs)[0];
    }
    CHECK(s.calls() == 2);
    s.reset_counters();
    cfg.offline = true;
    JudgeClient again(cfg);
    const auto cached = again.judge_many(reqs);
    CHECK(s.calls() == 0);
    CHECK(cached[0].from_cache);
    CHECK(cached[0].value == first.value);
    CHECK(cached[0].prompt_hash == first.prompt_hash);
    reqs.push_back(JudgeClient::answer_relevancy_request("q", "a3"));
    reqs.push_back(JudgeClient::answer_relevancy_request("q", "a4"));
    CHECK(again.uncached(reqs).size() == 2);
    try {
        again.judge_many(reqs);
        FAIL("expected CacheMissError");
    } catch (const CacheMissError& e) {
        CHECK(e.keys().size() == 2);
    }
    CHECK(s.calls() == 0);
}

TEST_CASE("prompt hash depends on model and temperature", "[judge]") {
    MockJudgeServer s(constant(0.1));
    auto cfg = config_for(s);
    JudgeClient a(cfg);
    cfg.temperature = 0.5;
    JudgeClient b(cfg);
    cfg.temperature = 0.0;
    cfg.model_id = "other";
    JudgeClient c(cfg);
    CHECK(a.prompt_hash("p") == a.prompt_hash("p"));
    CHECK(a.prompt_hash("p") != b.prompt_hash("p"));
    CHECK(a.prompt_hash("p") != c.prompt_hash("p"));
    CHECK(a.prompt_hash("p").size() == 64);
}

TEST_CASE("judge_many respects the in-flight limit and keeps order", "[judge]") {
    MockJudgeServer s([](const ParsedPrompt& p, std::size_t) -> MockJudgeServer::Answer {
        return {200, score_reply(static_cast<double>(p.answer.size()) / 100.0)};
    });
    s.set_delay(std::chrono::milliseconds{20});
    auto cfg = config_for(s);
    cfg.max_in_flight = 2;
    JudgeClient j(cfg);
    std::vector<JudgeRequest> reqs;
    for (int i = 1; i <= 8; ++i) reqs.push_back(JudgeClient::answer_relevancy_request("q", std::string(i, 'a')));
    const auto out = j.judge_many(reqs);
    for (int i = 0; i < 8; ++i) CHECK(out[i].value == Catch::Approx((i + 1) / 100.0));
    CHECK(s.peak_in_flight() <= 2);
}

TEST_CASE("config validation", "[judge]") {
    JudgeConfig c;
    c.endpoint_url = "http://x";
    c.model_id = "m";
    CHECK_NOTHROW(c.validate());
    c.adherence_threshold = 1.2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.adherence_threshold = 0.7;
    c.max_retries = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
