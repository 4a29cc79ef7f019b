#include "mock_servers.hpp"

#include <json.hpp>

#include "ragdx/embeddings.hpp"

namespace ragdx::testing {

MockServer::MockServer(std::string path) : path_(std::move(path)) {}

void MockServer::start() {
    server_.Post(path_, [this](const httplib::Request& req, httplib::Response& res) {
        ++calls_;
        const auto now = ++in_flight_;
        auto peak = peak_.load();
        while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
        }
        if (const auto d = delay_.load(); d.count() > 0) std::this_thread::sleep_for(d);
        Reply r;
        try {
            r = handle(req.body);
        } catch (const std::exception& e) {
            r = {500, e.what()};
        }
        --in_flight_;
        res.status = r.status;
        res.set_content(r.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
}

MockServer::~MockServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
}

std::string MockServer::url() const { return "http://127.0.0.1:" + std::to_string(port_) + path_; }

void MockServer::reset_counters() {
    calls_ = 0;
    peak_ = 0;
}

MockEmbeddingServer::MockEmbeddingServer(std::size_t dim) : MockServer("/v1/embeddings"), dim_(dim) { start(); }

MockEmbeddingServer::~MockEmbeddingServer() = default;

void MockEmbeddingServer::pin(const std::string& text, std::vector<double> vec) {
    std::lock_guard lock(mutex_);
    pinned_[text] = std::move(vec);
}

MockServer::Reply MockEmbeddingServer::handle(const std::string& body) {
    if (fail_next.load() > 0) {
        --fail_next;
        return {fail_status, R"({"error":"mock failure"})"};
    }
    const auto req = nlohmann::json::parse(body);
    const HashingEmbedder hashing(dim_);
    nlohmann::json data = nlohmann::json::array();
    const auto& input = req.at("input");
    for (std::size_t i = 0; i < input.size(); ++i) {
        const auto text = input[i].get<std::string>();
        std::vector<double> v;
        {
            std::lock_guard lock(mutex_);
            if (auto it = pinned_.find(text); it != pinned_.end()) v = it->second;
        }
        if (v.empty()) v = hashing.embed_one(text).values();
        data.push_back({{"index", i}, {"embedding", v}});
        ++texts_;
    }
    return {200, nlohmann::json{{"data", data}, {"model", req.value("model", "")}}.dump()};
}

namespace {

std::string block(const std::string& prompt, const std::string& tag) {
    const auto open = "<" + tag + ">\n";
    const auto close = "\n</" + tag + ">";
    const auto a = prompt.find(open);
    if (a == std::string::npos) return {};
    const auto b = prompt.find(close, a + open.size());
    if (b == std::string::npos) return {};
    return prompt.substr(a + open.size(), b - a - open.size());
}

}  // namespace

ParsedPrompt parse_prompt(const std::string& prompt) {
    ParsedPrompt p;
    p.raw = prompt;
    p.question = block(prompt, "question");
    p.context = block(prompt, "context");
    p.answer = block(prompt, "answer");
    const bool q = prompt.find("<question>") != std::string::npos;
    const bool c = prompt.find("<context>") != std::string::npos;
    if (q && c) {
        p.kind = "context_relevancy";
    } else if (q) {
        p.kind = "answer_relevancy";
    } else {
        p.kind = "context_adherence";
    }
    return p;
}

MockJudgeServer::MockJudgeServer(Handler handler) : MockServer("/v1/chat/completions"), handler_(std::move(handler)) {
    start();
}

MockJudgeServer::~MockJudgeServer() = default;

void MockJudgeServer::set_handler(Handler h) {
    std::lock_guard lock(mutex_);
    handler_ = std::move(h);
}

MockServer::Reply MockJudgeServer::handle(const std::string& body) {
    const auto req = nlohmann::json::parse(body);
    const auto& messages = req.at("messages");
    const auto prompt = messages.back().at("content").get<std::string>();
    Handler h;
    {
        std::lock_guard lock(mutex_);
        h = handler_;
    }
    const auto answer = h(parse_prompt(prompt), index_++);
    if (answer.status != 200) return {answer.status, R"({"error":"mock failure"})"};
    nlohmann::json reply = {
        {"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", answer.content}}}}})}};
    return {200, reply.dump()};
}

std::string score_reply(double v) {
    return nlohmann::json{{"score", v}, {"rationale", "mock"}}.dump();
}

}  // namespace ragdx::testing
