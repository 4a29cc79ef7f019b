#include "ragdx/retrieval_metrics.hpp"

#include <omp.h>

#include <cmath>
#include <set>

#include "parallel.hpp"
#include "ragdx/errors.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

namespace {

double fraction(std::size_t count, std::size_t total) {
    return total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total);
}

void check_rank(const HitMatrix& hits, std::size_t rank) {
    if (rank < 1 || rank > hits.k) {
        throw InvalidArgument("rank " + std::to_string(rank) + " is outside 1.." + std::to_string(hits.k));
    }
}

std::size_t hit_count(const HitRow& row) {
    std::size_t n = 0;
    for (auto h : row.hits) n += h ? 1 : 0;
    return n;
}

}  // namespace

double average_precision(const HitRow& row) {
    double sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < row.hits.size(); ++i) {
        if (!row.hits[i]) continue;
        ++seen;
        sum += static_cast<double>(seen) / static_cast<double>(i + 1);
    }
    return seen == 0 ? 0.0 : sum / static_cast<double>(seen);
}

double reciprocal_rank(const HitRow& row) {
    for (std::size_t i = 0; i < row.hits.size(); ++i) {
        if (row.hits[i]) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

double ndcg_row(const HitRow& row, std::size_t k) {
    const auto n = std::min(k, row.hits.size());
    double dcg = 0.0;
    std::size_t rel = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!row.hits[i]) continue;
        ++rel;
        dcg += 1.0 / std::log2(static_cast<double>(i + 2));
    }
    if (rel == 0) return 0.0;
    double idcg = 0.0;
    for (std::size_t i = 0; i < rel; ++i) idcg += 1.0 / std::log2(static_cast<double>(i + 2));
    return dcg / idcg;
}

double recall_at_k(const HitMatrix& hits, std::size_t k) {
    if (k > hits.k) {
        throw InvalidArgument("recall_at_k: k=" + std::to_string(k) + " exceeds matrix k=" + std::to_string(hits.k));
    }
    std::size_t n = 0;
    for (const auto& row : hits.rows) {
        for (std::size_t r = 1; r <= k; ++r) {
            if (row.hit_at(r)) {
                ++n;
                break;
            }
        }
    }
    return fraction(n, hits.query_count());
}

double mrr(const HitMatrix& hits) {
    if (hits.rows.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& row : hits.rows) sum += reciprocal_rank(row);
    return sum / static_cast<double>(hits.query_count());
}

double mean_average_precision(const HitMatrix& hits) {
    if (hits.rows.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& row : hits.rows) sum += average_precision(row);
    return sum / static_cast<double>(hits.query_count());
}

double ndcg(const HitMatrix& hits) {
    if (hits.rows.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& row : hits.rows) sum += ndcg_row(row, hits.k);
    return sum / static_cast<double>(hits.query_count());
}

std::vector<double> context_k_hit_rate(const HitMatrix& hits) {
    std::vector<std::size_t> counts(hits.k, 0);
    for (const auto& row : hits.rows) {
        for (std::size_t r = 1; r <= hits.k; ++r) counts[r - 1] += row.hit_at(r) ? 1 : 0;
    }
    std::vector<double> out(hits.k);
    for (std::size_t i = 0; i < hits.k; ++i) out[i] = fraction(counts[i], hits.query_count());
    return out;
}

double no_hit_rate(const HitMatrix& hits) {
    std::size_t n = 0;
    for (const auto& row : hits.rows) n += row.any_hit() ? 0 : 1;
    return fraction(n, hits.query_count());
}

std::vector<double> exclusive_hit_rate(const HitMatrix& hits) {
    std::vector<std::size_t> counts(hits.k, 0);
    for (const auto& row : hits.rows) {
        if (hit_count(row) != 1) continue;
        for (std::size_t r = 1; r <= hits.k; ++r) {
            if (row.hit_at(r)) ++counts[r - 1];
        }
    }
    std::vector<double> out(hits.k);
    for (std::size_t i = 0; i < hits.k; ++i) out[i] = fraction(counts[i], hits.query_count());
    return out;
}

double pairwise_redundancy(const HitMatrix& hits, std::size_t i, std::size_t j) {
    check_rank(hits, i);
    check_rank(hits, j);
    if (i == j) throw InvalidArgument("pairwise_redundancy needs two distinct ranks");
    std::size_t n = 0;
    for (const auto& row : hits.rows) n += (row.hit_at(i) && row.hit_at(j)) ? 1 : 0;
    return fraction(n, hits.query_count());
}

Matrix pairwise_text_overlap(const EvalSet& set, const NormalizationRules& rules) {
    const auto k = set.k;
    Matrix sum(k, std::vector<double>(k, 0.0));
    std::vector<std::vector<std::size_t>> count(k, std::vector<std::size_t>(k, 0));
    for (const auto& rec : set.records) {
        std::vector<std::set<std::string>> toks;
        for (const auto& c : rec.contexts) {
            const auto t = text::tokenize(normalize_text(c.text, rules));
            toks.emplace_back(t.begin(), t.end());
        }
        for (std::size_t a = 0; a < toks.size(); ++a) {
            for (std::size_t b = a; b < toks.size(); ++b) {
                std::size_t inter = 0;
                for (const auto& t : toks[a]) inter += toks[b].count(t);
                const auto uni = toks[a].size() + toks[b].size() - inter;
                const double jac = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
                sum[a][b] += jac;
                ++count[a][b];
            }
        }
    }
    Matrix out(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a; b < k; ++b) {
            out[a][b] = out[b][a] = count[a][b] ? sum[a][b] / static_cast<double>(count[a][b]) : 0.0;
        }
    }
    return out;
}

namespace {

struct Tally {
    std::size_t any = 0;
    double rr = 0.0;
    double ap = 0.0;
    double nd = 0.0;
    std::vector<std::size_t> at;
    std::vector<std::size_t> exclusive;
    std::vector<std::size_t> pair;  ///< k*k row-major

    explicit Tally(std::size_t k) : at(k, 0), exclusive(k, 0), pair(k * k, 0) {}

    void add(const HitRow& row, std::size_t k) {
        std::size_t n = 0;
        for (std::size_t r = 1; r <= k; ++r) {
            if (!row.hit_at(r)) continue;
            ++n;
            ++at[r - 1];
            for (std::size_t s = 1; s <= k; ++s) pair[(r - 1) * k + (s - 1)] += row.hit_at(s) ? 1 : 0;
        }
        if (n == 0) return;
        ++any;
        if (n == 1) {
            for (std::size_t r = 1; r <= k; ++r) exclusive[r - 1] += row.hit_at(r) ? 1 : 0;
        }
        rr += reciprocal_rank(row);
        ap += average_precision(row);
        nd += ndcg_row(row, k);
    }

    void merge(const Tally& o) {
        any += o.any;
        rr += o.rr;
        ap += o.ap;
        nd += o.nd;
        for (std::size_t i = 0; i < at.size(); ++i) at[i] += o.at[i];
        for (std::size_t i = 0; i < exclusive.size(); ++i) exclusive[i] += o.exclusive[i];
        for (std::size_t i = 0; i < pair.size(); ++i) pair[i] += o.pair[i];
    }
};

}  // namespace

RetrievalReport retrieval_report(const HitMatrix& hits, int parallelism) {
    const auto k = hits.k;
    const auto q = hits.query_count();
    Tally total(k);
    const int threads = detail::thread_count(parallelism);
#pragma omp parallel num_threads(threads)
    {
        Tally local(k);
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(q); ++i) {
            local.add(hits.rows[static_cast<std::size_t>(i)], k);
        }
#pragma omp critical(ragdx_retrieval_merge)
        total.merge(local);
    }

    RetrievalReport r;
    r.query_count = q;
    r.k = k;
    r.recall_at_k = fraction(total.any, q);
    r.no_hit_rate = q == 0 ? 0.0 : fraction(q - total.any, q);
    r.mrr = q == 0 ? 0.0 : total.rr / static_cast<double>(q);
    r.map = q == 0 ? 0.0 : total.ap / static_cast<double>(q);
    r.ndcg = q == 0 ? 0.0 : total.nd / static_cast<double>(q);
    r.context_hit_rate.resize(k);
    r.exclusive_hit_rate.resize(k);
    r.pairwise_redundancy.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        r.context_hit_rate[i] = fraction(total.at[i], q);
        r.exclusive_hit_rate[i] = fraction(total.exclusive[i], q);
        for (std::size_t j = 0; j < k; ++j) r.pairwise_redundancy[i][j] = fraction(total.pair[i * k + j], q);
    }
    return r;
}

namespace ref {

RetrievalReport retrieval_report_serial(const HitMatrix& hits) {
    RetrievalReport r;
    r.query_count = hits.query_count();
    r.k = hits.k;
    r.recall_at_k = recall_at_k(hits, hits.k);
    r.mrr = mrr(hits);
    r.map = mean_average_precision(hits);
    r.ndcg = ndcg(hits);
    r.context_hit_rate = context_k_hit_rate(hits);
    r.no_hit_rate = no_hit_rate(hits);
    r.exclusive_hit_rate = exclusive_hit_rate(hits);
    r.pairwise_redundancy.assign(hits.k, std::vector<double>(hits.k, 0.0));
    for (std::size_t i = 1; i <= hits.k; ++i) {
        for (std::size_t j = 1; j <= hits.k; ++j) {
            r.pairwise_redundancy[i - 1][j - 1] =
                i == j ? r.context_hit_rate[i - 1] : pairwise_redundancy(hits, i, j);
        }
    }
    return r;
}

}  // namespace ref

nlohmann::ordered_json to_json(const RetrievalReport& r) {
    nlohmann::ordered_json j;
    j["query_count"] = r.query_count;
    j["k"] = r.k;
    j["recall_at_k"] = r.recall_at_k;
    j["mrr"] = r.mrr;
    j["map"] = r.map;
    j["ndcg"] = r.ndcg;
    j["context_hit_rate"] = r.context_hit_rate;
    j["no_hit_rate"] = r.no_hit_rate;
    j["exclusive_hit_rate"] = r.exclusive_hit_rate;
    j["pairwise_redundancy"] = r.pairwise_redundancy;
    if (r.pairwise_text_overlap) j["pairwise_text_overlap"] = *r.pairwise_text_overlap;
    j["mean_context_relevancy"] = r.mean_context_relevancy ? nlohmann::ordered_json(*r.mean_context_relevancy)
                                                           : nlohmann::ordered_json(nullptr);
    return j;
}

RetrievalReport retrieval_report_from_json(const nlohmann::json& j) {
    RetrievalReport r;
    r.query_count = j.at("query_count").get<std::size_t>();
    r.k = j.at("k").get<std::size_t>();
    r.recall_at_k = j.at("recall_at_k").get<double>();
    r.mrr = j.at("mrr").get<double>();
    r.map = j.at("map").get<double>();
    r.ndcg = j.at("ndcg").get<double>();
    r.context_hit_rate = j.at("context_hit_rate").get<std::vector<double>>();
    r.no_hit_rate = j.at("no_hit_rate").get<double>();
    r.exclusive_hit_rate = j.at("exclusive_hit_rate").get<std::vector<double>>();
    r.pairwise_redundancy = j.at("pairwise_redundancy").get<Matrix>();
    if (j.contains("pairwise_text_overlap")) r.pairwise_text_overlap = j["pairwise_text_overlap"].get<Matrix>();
    if (j.contains("mean_context_relevancy") && !j["mean_context_relevancy"].is_null()) {
        r.mean_context_relevancy = j["mean_context_relevancy"].get<double>();
    }
    return r;
}

}  // namespace ragdx
