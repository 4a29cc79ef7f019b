#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include <unistd.h>

#include "ragdx/text.hpp"

namespace ragdx::testing {

std::filesystem::path fixture_path(const std::string& name) { return std::filesystem::path(RAGDX_FIXTURE_DIR) / name; }

std::filesystem::path share_path(const std::string& name) { return std::filesystem::path(RAGDX_SHARE_DIR) / name; }

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ragdx-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, double> case_study_adherence() {
    const auto j = nlohmann::json::parse(read_file(fixture_path("case_study_adherence.json")));
    return j.get<std::map<std::string, double>>();
}

MockJudgeServer::Handler case_study_judge() {
    auto table = std::make_shared<const std::map<std::string, double>>(case_study_adherence());
    return [table](const ParsedPrompt& p, std::size_t) -> MockJudgeServer::Answer {
        if (p.kind == "context_adherence") {
            const auto it = table->find(p.answer);
            return {200, score_reply(it == table->end() ? 0.0 : it->second)};
        }
        if (p.kind == "answer_relevancy") return {200, score_reply(0.9)};
        bool on_topic = false;
        for (const auto* cue : {"guidance", "protocol", "bulletin"}) {
            on_topic = on_topic || p.context.find(cue) != std::string::npos;
        }
        return {200, score_reply(on_topic ? 0.85 : 0.1)};
    };
}

HitMatrix random_hit_matrix(std::mt19937_64& rng, std::size_t max_queries, std::size_t max_k) {
    std::uniform_int_distribution<std::size_t> nq(1, max_queries);
    std::uniform_int_distribution<std::size_t> nk(1, max_k);
    std::uniform_real_distribution<double> density(0.0, 1.0);
    const auto q = nq(rng);
    const auto k = nk(rng);
    const double p = density(rng);
    std::bernoulli_distribution hit(p);
    std::vector<std::vector<bool>> rows(q, std::vector<bool>(k));
    for (auto& r : rows) {
        for (std::size_t i = 0; i < k; ++i) r[i] = hit(rng);
    }
    return HitMatrix::from_bools(rows, k);
}

namespace oracle {

namespace {

bool cell(const HitMatrix& m, std::size_t q, std::size_t rank) {
    const auto& h = m.rows[q].hits;
    return rank >= 1 && rank <= h.size() && h[rank - 1] != 0;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double recall_at_k(const HitMatrix& m, std::size_t k) {
    std::vector<double> per;
    for (std::size_t q = 0; q < m.rows.size(); ++q) {
        bool any = false;
        for (std::size_t r = 1; r <= k; ++r) any = any || cell(m, q, r);
        per.push_back(any ? 1.0 : 0.0);
    }
    return mean(per);
}

double mrr(const HitMatrix& m) {
    std::vector<double> per;
    for (std::size_t q = 0; q < m.rows.size(); ++q) {
        std::optional<std::size_t> first;
        for (std::size_t r = m.k; r >= 1; --r) {
            if (cell(m, q, r)) first = r;
        }
        per.push_back(first ? 1.0 / static_cast<double>(*first) : 0.0);
    }
    return mean(per);
}

double map(const HitMatrix& m) {
    std::vector<double> per;
    for (std::size_t q = 0; q < m.rows.size(); ++q) {
        std::vector<double> precisions;
        for (std::size_t r = 1; r <= m.k; ++r) {
            if (!cell(m, q, r)) continue;
            std::size_t relevant_prefix = 0;
            for (std::size_t s = 1; s <= r; ++s) relevant_prefix += cell(m, q, s) ? 1 : 0;
            precisions.push_back(static_cast<double>(relevant_prefix) / static_cast<double>(r));
        }
        per.push_back(precisions.empty() ? 0.0 : mean(precisions));
    }
    return mean(per);
}

double ndcg(const HitMatrix& m) {
    std::vector<double> per;
    for (std::size_t q = 0; q < m.rows.size(); ++q) {
        std::vector<int> gains;
        for (std::size_t r = 1; r <= m.k; ++r) gains.push_back(cell(m, q, r) ? 1 : 0);
        auto dcg = [](const std::vector<int>& g) {
            double s = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) s += g[i] / std::log2(static_cast<double>(i) + 2.0);
            return s;
        };
        auto ideal = gains;
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        const double idcg = dcg(ideal);
        per.push_back(idcg == 0.0 ? 0.0 : dcg(gains) / idcg);
    }
    return mean(per);
}

std::vector<double> context_hit_rate(const HitMatrix& m) {
    std::vector<double> out;
    for (std::size_t r = 1; r <= m.k; ++r) {
        std::vector<double> per;
        for (std::size_t q = 0; q < m.rows.size(); ++q) per.push_back(cell(m, q, r) ? 1.0 : 0.0);
        out.push_back(mean(per));
    }
    return out;
}

double no_hit_rate(const HitMatrix& m) {
    std::vector<double> per;
    for (std::size_t q = 0; q < m.rows.size(); ++q) {
        bool none = true;
        for (std::size_t r = 1; r <= m.k; ++r) none = none && !cell(m, q, r);
        per.push_back(none ? 1.0 : 0.0);
    }
    return mean(per);
}

std::vector<double> exclusive_hit_rate(const HitMatrix& m) {
    std::vector<double> out;
    for (std::size_t r = 1; r <= m.k; ++r) {
        std::vector<double> per;
        for (std::size_t q = 0; q < m.rows.size(); ++q) {
            bool only = cell(m, q, r);
            for (std::size_t s = 1; s <= m.k; ++s) {
                if (s != r && cell(m, q, s)) only = false;
            }
            per.push_back(only ? 1.0 : 0.0);
        }
        out.push_back(mean(per));
    }
    return out;
}

double redundancy(const HitMatrix& m, std::size_t i, std::size_t j) {
    std::vector<double> per;
    for (std::size_t q = 0; q < m.rows.size(); ++q) per.push_back(cell(m, q, i) && cell(m, q, j) ? 1.0 : 0.0);
    return mean(per);
}

std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
        }
    }
    return t[a.size()][b.size()];
}

std::vector<FusedRef> rrf(const std::vector<Ranked>& sparse, const std::vector<Ranked>& dense, double alpha,
                          int rrf_k) {
    std::set<std::string> ids;
    for (const auto& r : sparse) ids.insert(r.chunk_id);
    for (const auto& r : dense) ids.insert(r.chunk_id);
    auto rank_in = [](const std::vector<Ranked>& list, const std::string& id) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].chunk_id == id) return i + 1;
        }
        return std::nullopt;
    };
    struct Row {
        FusedRef f;
        std::size_t dense_key;
    };
    std::vector<Row> rows;
    for (const auto& id : ids) {
        const auto rs = rank_in(sparse, id);
        const auto rd = rank_in(dense, id);
        double s = 0.0;
        if (rs) s += (1.0 - alpha) / static_cast<double>(rrf_k + static_cast<int>(*rs));
        if (rd) s += alpha / static_cast<double>(rrf_k + static_cast<int>(*rd));
        rows.push_back({{id, s}, rd.value_or(static_cast<std::size_t>(-1))});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.f.score != b.f.score) return a.f.score > b.f.score;
        if (a.dense_key != b.dense_key) return a.dense_key < b.dense_key;
        return a.f.chunk_id < b.f.chunk_id;
    });
    std::vector<FusedRef> out;
    for (auto& r : rows) out.push_back(r.f);
    return out;
}

}  // namespace oracle

}  // namespace ragdx::testing
