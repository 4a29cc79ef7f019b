#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragdx/cache.hpp"
#include "ragdx/errors.hpp"

namespace ragdx {

struct JudgeConfig {
    std::string endpoint_url;
    std::string model_id;
    double temperature = 0.0;
    int max_retries = 2;
    double adherence_threshold = 0.7;
    std::optional<std::filesystem::path> cache_path;
    std::string api_key_env = "RAGDX_JUDGE_API_KEY";
    std::chrono::milliseconds timeout{60000};
    std::size_t max_in_flight = 4;
    double requests_per_second = 0.0;  ///< 0 disables rate limiting
    std::chrono::milliseconds retry_backoff{200};
    std::optional<std::filesystem::path> prompt_dir;
    bool offline = false;

    /// Throws ConfigError on thresholds outside [0,1] or negative retries.
    void validate() const;
};

struct JudgeScore {
    double value = 0.0;
    std::optional<std::string> rationale;
    std::string judge_model;
    std::string prompt_hash;
    int retry_count = 0;  ///< failed attempts before the accepted reply
    bool from_cache = false;
};

struct JudgeReply {
    double score = 0.0;
    std::optional<std::string> rationale;
};

/// A judge reply that could not be turned into a score.
class JudgeReplyError : public ProviderError {
public:
    enum class Kind { no_json, missing_score, not_numeric, out_of_range };

    JudgeReplyError(Kind kind, const std::string& message, std::string raw)
        : ProviderError(message), kind_(kind), raw_(std::move(raw)) {}

    Kind kind() const noexcept { return kind_; }
    const std::string& raw_reply() const noexcept { return raw_; }

private:
    Kind kind_;
    std::string raw_;
};

/// Extracts the first JSON object carrying a "score" field from free text
/// and validates it is a finite number in [0, 1].
JudgeReply parse_judge_reply_full(std::string_view raw);
double parse_judge_reply(std::string_view raw);

enum class JudgeKind { context_relevancy, answer_relevancy, context_adherence };

std::string_view to_string(JudgeKind kind) noexcept;

/// Prompt templates with {{question}}, {{context}} and {{answer}}
/// placeholders.
struct PromptTemplates {
    std::string context_relevancy;
    std::string answer_relevancy;
    std::string context_adherence;

    static PromptTemplates defaults();
    /// Reads <dir>/{context_relevancy,answer_relevancy,context_adherence}.txt;
    /// files that are absent keep their default. Throws ConfigError on
    /// unknown placeholders or a template missing a required one.
    static PromptTemplates load(const std::filesystem::path& dir);

    const std::string& for_kind(JudgeKind kind) const;
    void validate() const;
};

/// Substitutes {{name}} placeholders; unknown names throw ConfigError.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// "[Context 1]\n<text>\n\n[Context 2]\n..." as shown to the adherence judge.
std::string format_ranked_contexts(std::span<const std::string> contexts);

struct JudgeRequest {
    JudgeKind kind = JudgeKind::answer_relevancy;
    std::string question;
    std::string context;  ///< single context, or formatted ranked contexts for adherence
    std::string answer;
};

/// Chat-completion judge client: {model, messages, temperature} ->
/// {choices:[{message:{content}}]}. Replies are cached by prompt hash;
/// unparseable or out-of-range replies are retried up to max_retries times.
class JudgeClient {
public:
    explicit JudgeClient(JudgeConfig cfg, std::optional<PromptTemplates> templates = std::nullopt);

    JudgeScore judge_context_relevancy(const std::string& question, const std::string& context);
    JudgeScore judge_answer_relevancy(const std::string& question, const std::string& answer);
    JudgeScore judge_context_adherence(const std::string& answer, std::span<const std::string> contexts);

    /// Runs many judgments under the in-flight limit, results in input
    /// order. In offline mode every uncached prompt is listed in one
    /// CacheMissError before any work starts.
    std::vector<JudgeScore> judge_many(std::span<const JudgeRequest> requests);

    static JudgeRequest context_relevancy_request(std::string question, std::string context);
    static JudgeRequest answer_relevancy_request(std::string question, std::string answer);
    static JudgeRequest context_adherence_request(std::string answer, std::span<const std::string> contexts);

    std::string render(const JudgeRequest& request) const;
    std::string prompt_hash(const std::string& prompt) const;
    std::vector<std::string> uncached(std::span<const JudgeRequest> requests) const;

    const JudgeConfig& config() const noexcept { return cfg_; }
    /// Provider requests issued so far, including retries.
    std::size_t call_count() const noexcept { return calls_.load(); }

private:
    JudgeScore judge(const JudgeRequest& request);
    std::string complete(const std::string& prompt);
    void throttle();

    JudgeConfig cfg_;
    PromptTemplates templates_;
    KeyValueCache cache_;
    std::atomic<std::size_t> calls_{0};
    std::mutex throttle_mutex_;
    std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace ragdx
