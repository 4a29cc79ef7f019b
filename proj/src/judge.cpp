#include "ragdx/judge.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "defaults.hpp"
#include "ragdx/http.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

void JudgeConfig::validate() const {
    if (!(adherence_threshold >= 0.0 && adherence_threshold <= 1.0)) {
        throw ConfigError("adherence_threshold must lie in [0, 1]");
    }
    if (max_retries < 0) throw ConfigError("judge max_retries must be >= 0");
    if (max_in_flight < 1) throw ConfigError("judge max_in_flight must be >= 1");
    if (timeout.count() <= 0) throw ConfigError("judge timeout must be > 0");
    if (requests_per_second < 0.0) throw ConfigError("judge requests_per_second must be >= 0");
}

namespace {

/// End of the balanced {...} starting at `open`, honoring JSON strings.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::nullopt;
}

/// An HTTP status that retrying cannot fix.
class FatalStatus : public ProviderError {
public:
    using ProviderError::ProviderError;
};

std::string clip(std::string_view s) {
    constexpr std::size_t kMax = 200;
    return std::string(s.substr(0, kMax)) + (s.size() > kMax ? "..." : "");
}

}  // namespace

JudgeReply parse_judge_reply_full(std::string_view raw) {
    using Kind = JudgeReplyError::Kind;
    bool saw_object = false;
    for (std::size_t open = raw.find('{'); open != std::string_view::npos; open = raw.find('{', open + 1)) {
        const auto close = matching_brace(raw, open);
        if (!close) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(raw.substr(open, *close - open + 1));
        } catch (const nlohmann::json::parse_error&) {
            continue;
        }
        if (!j.is_object()) continue;
        saw_object = true;
        auto it = j.find("score");
        if (it == j.end()) continue;
        if (!it->is_number()) {
            throw JudgeReplyError(Kind::not_numeric, "judge score is not numeric: " + it->dump(), std::string(raw));
        }
        const double v = it->get<double>();
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw JudgeReplyError(Kind::out_of_range, "judge score " + it->dump() + " is outside [0, 1]",
                                  std::string(raw));
        }
        JudgeReply reply{v, std::nullopt};
        if (auto r = j.find("rationale"); r != j.end() && r->is_string()) reply.rationale = r->get<std::string>();
        return reply;
    }
    if (saw_object) {
        throw JudgeReplyError(Kind::missing_score, "judge reply has no 'score' field: " + clip(raw),
                              std::string(raw));
    }
    throw JudgeReplyError(Kind::no_json, "judge reply contains no JSON object: " + clip(raw), std::string(raw));
}

double parse_judge_reply(std::string_view raw) { return parse_judge_reply_full(raw).score; }

std::string_view to_string(JudgeKind kind) noexcept {
    switch (kind) {
        case JudgeKind::context_relevancy:
            return "context_relevancy";
        case JudgeKind::answer_relevancy:
            return "answer_relevancy";
        case JudgeKind::context_adherence:
            return "context_adherence";
    }
    return "answer_relevancy";
}

namespace {

const std::set<std::string> kPlaceholders = {"question", "context", "answer"};

std::vector<std::string> placeholders_in(std::string_view tmpl) {
    std::vector<std::string> names;
    for (auto open = tmpl.find("{{"); open != std::string_view::npos; open = tmpl.find("{{", open + 2)) {
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) throw ConfigError("prompt template has an unterminated '{{'");
        names.emplace_back(text::trim(tmpl.substr(open + 2, close - open - 2)));
    }
    return names;
}

void require_placeholders(const std::string& tmpl, std::string_view name, std::initializer_list<const char*> needed) {
    const auto found = placeholders_in(tmpl);
    for (const auto& f : found) {
        if (!kPlaceholders.count(f)) {
            throw ConfigError("prompt template '" + std::string(name) + "' uses unknown placeholder {{" + f + "}}");
        }
    }
    for (const char* n : needed) {
        if (std::find(found.begin(), found.end(), n) == found.end()) {
            throw ConfigError("prompt template '" + std::string(name) + "' lacks {{" + n + "}}");
        }
    }
}

}  // namespace

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) break;
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) throw ConfigError("prompt template has an unterminated '{{'");
        out.append(tmpl.substr(pos, open - pos));
        const std::string name(text::trim(tmpl.substr(open + 2, close - open - 2)));
        auto it = vars.find(name);
        if (it == vars.end()) throw ConfigError("prompt template placeholder {{" + name + "}} has no value");
        out += it->second;
        pos = close + 2;
    }
    out.append(tmpl.substr(pos));
    return out;
}

std::string format_ranked_contexts(std::span<const std::string> contexts) {
    std::string out;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (i) out += "\n\n";
        out += "[Context " + std::to_string(i + 1) + "]\n" + contexts[i];
    }
    return out;
}

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.context_relevancy = std::string(defaults::context_relevancy_prompt());
    t.answer_relevancy = std::string(defaults::answer_relevancy_prompt());
    t.context_adherence = std::string(defaults::context_adherence_prompt());
    return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    auto t = defaults();
    auto read = [&](const char* name, std::string& dst) {
        const auto path = dir / (std::string(name) + ".txt");
        if (!std::filesystem::exists(path)) return;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read prompt template '" + path.string() + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        dst = ss.str();
    };
    read("context_relevancy", t.context_relevancy);
    read("answer_relevancy", t.answer_relevancy);
    read("context_adherence", t.context_adherence);
    t.validate();
    return t;
}

void PromptTemplates::validate() const {
    require_placeholders(context_relevancy, "context_relevancy", {"question", "context"});
    require_placeholders(answer_relevancy, "answer_relevancy", {"question", "answer"});
    require_placeholders(context_adherence, "context_adherence", {"context", "answer"});
}

const std::string& PromptTemplates::for_kind(JudgeKind kind) const {
    switch (kind) {
        case JudgeKind::context_relevancy:
            return context_relevancy;
        case JudgeKind::answer_relevancy:
            return answer_relevancy;
        case JudgeKind::context_adherence:
            return context_adherence;
    }
    return answer_relevancy;
}

JudgeClient::JudgeClient(JudgeConfig cfg, std::optional<PromptTemplates> templates)
    : cfg_(std::move(cfg)),
      templates_(templates ? std::move(*templates)
                           : (cfg_.prompt_dir ? PromptTemplates::load(*cfg_.prompt_dir) : PromptTemplates::defaults())),
      cache_(cfg_.cache_path) {
    cfg_.validate();
    templates_.validate();
}

JudgeRequest JudgeClient::context_relevancy_request(std::string question, std::string context) {
    if (text::trim(question).empty()) throw InvalidArgument("empty question");
    if (text::trim(context).empty()) throw InvalidArgument("empty context");
    return {JudgeKind::context_relevancy, std::move(question), std::move(context), {}};
}

JudgeRequest JudgeClient::answer_relevancy_request(std::string question, std::string answer) {
    if (text::trim(question).empty()) throw InvalidArgument("empty question");
    if (text::trim(answer).empty()) throw InvalidArgument("empty answer");
    return {JudgeKind::answer_relevancy, std::move(question), {}, std::move(answer)};
}

JudgeRequest JudgeClient::context_adherence_request(std::string answer, std::span<const std::string> contexts) {
    if (contexts.empty()) throw InvalidArgument("context adherence needs at least one context");
    if (text::trim(answer).empty()) throw InvalidArgument("empty answer");
    return {JudgeKind::context_adherence, {}, format_ranked_contexts(contexts), std::move(answer)};
}

std::string JudgeClient::render(const JudgeRequest& r) const {
    return render_template(templates_.for_kind(r.kind),
                           {{"question", r.question}, {"context", r.context}, {"answer", r.answer}});
}

std::string JudgeClient::prompt_hash(const std::string& prompt) const {
    std::ostringstream material;
    material << cfg_.model_id << '\0' << cfg_.temperature << '\0' << prompt;
    return text::sha256_hex(material.str());
}

std::vector<std::string> JudgeClient::uncached(std::span<const JudgeRequest> requests) const {
    std::vector<std::string> missing;
    std::set<std::string> seen;
    for (const auto& r : requests) {
        const auto h = prompt_hash(render(r));
        if (cache_.contains("judge:" + h) || !seen.insert(h).second) continue;
        missing.push_back("judge:" + h + " (" + std::string(to_string(r.kind)) + ")");
    }
    return missing;
}

void JudgeClient::throttle() {
    if (cfg_.requests_per_second <= 0.0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / cfg_.requests_per_second));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(throttle_mutex_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
}

std::string JudgeClient::complete(const std::string& prompt) {
    const nlohmann::json body = {
        {"model", cfg_.model_id},
        {"messages",
         nlohmann::json::array({{{"role", "system"},
                                 {"content", "You are a strict evaluation judge. Reply with JSON only."}},
                                {{"role", "user"}, {"content", prompt}}})},
        {"temperature", cfg_.temperature}};
    throttle();
    ++calls_;
    const auto res = http::post_json(cfg_.endpoint_url, body.dump(), http::auth_headers(cfg_.api_key_env), cfg_.timeout);
    if (res.status < 200 || res.status >= 300) {
        if (!http::is_retryable_status(res.status)) {
            throw FatalStatus("judge provider returned HTTP " + std::to_string(res.status) + ": " + clip(res.body));
        }
        throw ProviderError("judge provider returned HTTP " + std::to_string(res.status) + ": " + clip(res.body));
    }
    try {
        const auto reply = nlohmann::json::parse(res.body);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("judge provider reply is not a chat completion: ") + e.what());
    }
}

JudgeScore JudgeClient::judge(const JudgeRequest& request) {
    const auto prompt = render(request);
    const auto hash = prompt_hash(prompt);
    const auto key = "judge:" + hash;
    if (auto hit = cache_.get(key)) {
        JudgeScore s;
        s.value = hit->at("score").get<double>();
        if (hit->contains("rationale") && (*hit)["rationale"].is_string()) s.rationale = (*hit)["rationale"];
        s.judge_model = cfg_.model_id;
        s.prompt_hash = hash;
        s.from_cache = true;
        return s;
    }
    if (cfg_.offline) throw CacheMissError("judge", {key + " (" + std::string(to_string(request.kind)) + ")"});

    std::exception_ptr last;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(cfg_.retry_backoff * (1 << (attempt - 1)));
        try {
            const auto content = complete(prompt);
            const auto reply = parse_judge_reply_full(content);
            nlohmann::json entry = {{"score", reply.score}, {"model", cfg_.model_id}};
            if (reply.rationale) entry["rationale"] = *reply.rationale;
            cache_.put(key, entry);
            return JudgeScore{reply.score, reply.rationale, cfg_.model_id, hash, attempt, false};
        } catch (const FatalStatus& e) {
            throw ProviderError(e.what());
        } catch (const ProviderError&) {
            last = std::current_exception();
        }
    }
    try {
        std::rethrow_exception(last);
    } catch (const JudgeReplyError& e) {
        throw JudgeReplyError(e.kind(),
                              "judge " + std::string(to_string(request.kind)) + " failed after " +
                                  std::to_string(cfg_.max_retries + 1) + " attempt(s): " + e.what() +
                                  "\nraw reply: " + clip(e.raw_reply()),
                              e.raw_reply());
    } catch (const ProviderError& e) {
        throw ProviderError("judge " + std::string(to_string(request.kind)) + " failed after " +
                            std::to_string(cfg_.max_retries + 1) + " attempt(s): " + e.what());
    }
}

JudgeScore JudgeClient::judge_context_relevancy(const std::string& question, const std::string& context) {
    return judge(context_relevancy_request(question, context));
}

JudgeScore JudgeClient::judge_answer_relevancy(const std::string& question, const std::string& answer) {
    return judge(answer_relevancy_request(question, answer));
}

JudgeScore JudgeClient::judge_context_adherence(const std::string& answer, std::span<const std::string> contexts) {
    return judge(context_adherence_request(answer, contexts));
}

std::vector<JudgeScore> JudgeClient::judge_many(std::span<const JudgeRequest> requests) {
    if (cfg_.offline) {
        if (auto missing = uncached(requests); !missing.empty()) throw CacheMissError("judge", std::move(missing));
    }
    std::vector<JudgeScore> out(requests.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) {
            try {
                out[i] = judge(requests[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    const auto n_workers = std::min(cfg_.max_in_flight, requests.size());
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace ragdx
