#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>

namespace ragdx::testing {

/// httplib server on an ephemeral localhost port, serving one POST route,
/// counting calls and the peak number of concurrent requests.
class MockServer {
public:
    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;
    virtual ~MockServer();

    std::string url() const;
    std::size_t calls() const noexcept { return calls_.load(); }
    std::size_t peak_in_flight() const noexcept { return peak_.load(); }
    void reset_counters();
    void set_delay(std::chrono::milliseconds d) { delay_ = d; }

protected:
    struct Reply {
        int status = 200;
        std::string body;
    };

    explicit MockServer(std::string path);
    void start();
    virtual Reply handle(const std::string& body) = 0;

private:
    std::string path_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_{0};
    std::atomic<std::chrono::milliseconds> delay_{std::chrono::milliseconds{0}};
};

/// {model, input:[...]} -> {data:[{index, embedding}]} using the library's
/// hashing embedder, so vectors match HashingEmbedder exactly. The first
/// `fail_next` requests answer with `fail_status`.
class MockEmbeddingServer final : public MockServer {
public:
    explicit MockEmbeddingServer(std::size_t dim = 256);
    ~MockEmbeddingServer() override;

    std::size_t dim() const noexcept { return dim_; }
    std::atomic<int> fail_next{0};
    int fail_status = 503;
    /// Vectors returned for exact texts instead of the hashing ones.
    void pin(const std::string& text, std::vector<double> vec);
    std::size_t texts_embedded() const noexcept { return texts_.load(); }

private:
    Reply handle(const std::string& body) override;

    std::size_t dim_;
    std::mutex mutex_;
    std::map<std::string, std::vector<double>> pinned_;
    std::atomic<std::size_t> texts_{0};
};

/// Prompt fields recovered from the <question>/<context>/<answer> blocks.
struct ParsedPrompt {
    std::string kind;  ///< context_relevancy | answer_relevancy | context_adherence
    std::string question;
    std::string context;
    std::string answer;
    std::string raw;
};

ParsedPrompt parse_prompt(const std::string& prompt);

/// Chat-completion judge. The handler returns the message content, or a
/// non-200 status with an empty content to simulate provider errors.
class MockJudgeServer final : public MockServer {
public:
    struct Answer {
        int status = 200;
        std::string content;
    };
    using Handler = std::function<Answer(const ParsedPrompt&, std::size_t call_index)>;

    explicit MockJudgeServer(Handler handler);
    ~MockJudgeServer() override;

    void set_handler(Handler h);

private:
    Reply handle(const std::string& body) override;

    std::mutex mutex_;
    Handler handler_;
    std::atomic<std::size_t> index_{0};
};

/// Score-only JSON content: {"score": v, "rationale": "mock"}.
std::string score_reply(double v);

}  // namespace ragdx::testing
