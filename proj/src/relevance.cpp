#include "ragdx/relevance.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "parallel.hpp"
#include "ragdx/errors.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

void RelevanceThresholds::validate() const {
    if (!(token_overlap_min > 0.0 && token_overlap_min <= 1.0)) {
        throw ConfigError("token_overlap_min must lie in (0, 1]");
    }
    if (!(semantic_min > 0.0 && semantic_min <= 1.0)) {
        throw ConfigError("semantic_min must lie in (0, 1]");
    }
}

std::string_view to_string(RelevanceLevel level) noexcept {
    switch (level) {
        case RelevanceLevel::exact_substring:
            return "exact_substring";
        case RelevanceLevel::token_overlap:
            return "token_overlap";
        case RelevanceLevel::semantic:
            return "semantic";
        case RelevanceLevel::none:
            return "none";
    }
    return "none";
}

RelevanceLevel relevance_level_from_string(std::string_view name) {
    if (name == "exact_substring") return RelevanceLevel::exact_substring;
    if (name == "token_overlap") return RelevanceLevel::token_overlap;
    if (name == "semantic") return RelevanceLevel::semantic;
    if (name == "none") return RelevanceLevel::none;
    throw InvalidArgument("unknown relevance level '" + std::string(name) + "'");
}

double token_overlap(std::string_view ground_truth, std::string_view context) {
    const auto gt_tokens = text::tokenize(ground_truth);
    const std::unordered_set<std::string> gt(gt_tokens.begin(), gt_tokens.end());
    if (gt.empty()) return 0.0;
    const auto ctx_tokens = text::tokenize(context);
    const std::unordered_set<std::string> ctx(ctx_tokens.begin(), ctx_tokens.end());
    std::size_t shared = 0;
    for (const auto& t : gt) shared += ctx.count(t);
    return static_cast<double>(shared) / static_cast<double>(gt.size());
}

PreparedContext prepare_context(std::string_view raw_context, const NormalizationRules& rules) {
    PreparedContext p;
    p.normalized = normalize_text(raw_context, rules);
    for (const auto& s : text::split_sentences(raw_context)) {
        auto n = normalize_text(s, rules);
        if (!text::trim(n).empty()) p.sentences.push_back(std::move(n));
    }
    return p;
}

std::optional<RelevanceVerdict> lexical_relevance(std::string_view context, std::string_view ground_truth,
                                                  const RelevanceThresholds& thresholds) {
    if (ground_truth.empty()) {
        return RelevanceVerdict{false, RelevanceLevel::none, 0.0};
    }
    if (context.find(ground_truth) != std::string_view::npos) {
        return RelevanceVerdict{true, RelevanceLevel::exact_substring, 1.0};
    }
    const double ratio = token_overlap(ground_truth, context);
    if (ratio >= thresholds.token_overlap_min) {
        return RelevanceVerdict{true, RelevanceLevel::token_overlap, ratio};
    }
    return std::nullopt;
}

namespace {

RelevanceVerdict semantic_verdict(double best_cosine, const RelevanceThresholds& thresholds) {
    if (best_cosine >= thresholds.semantic_min) {
        return {true, RelevanceLevel::semantic, best_cosine};
    }
    return {false, RelevanceLevel::none, best_cosine};
}

}  // namespace

RelevanceVerdict relevance(const PreparedContext& context, std::string_view ground_truth,
                           const RelevanceThresholds& thresholds, Embedder* embedder) {
    if (auto v = lexical_relevance(context.normalized, ground_truth, thresholds)) return *v;
    const double ratio = token_overlap(ground_truth, context.normalized);
    if (embedder == nullptr || context.sentences.empty()) {
        return {false, RelevanceLevel::none, ratio};
    }
    std::vector<std::string> texts;
    texts.reserve(context.sentences.size() + 1);
    texts.emplace_back(ground_truth);
    texts.insert(texts.end(), context.sentences.begin(), context.sentences.end());
    const auto vecs = embedder->embed(texts);
    double best = -1.0;
    for (std::size_t i = 1; i < vecs.size(); ++i) best = std::max(best, cosine_similarity(vecs[0], vecs[i]));
    return semantic_verdict(best, thresholds);
}

RelevanceVerdict relevance(std::string_view context, std::string_view ground_truth,
                           const RelevanceThresholds& thresholds, Embedder* embedder) {
    PreparedContext p;
    p.normalized = std::string(context);
    for (auto& s : text::split_sentences(context)) p.sentences.push_back(std::move(s));
    return relevance(p, ground_truth, thresholds, embedder);
}

bool HitRow::any_hit() const noexcept {
    return std::any_of(hits.begin(), hits.end(), [](std::uint8_t h) { return h != 0; });
}

const HitRow* HitMatrix::find(std::string_view query_id) const {
    for (const auto& r : rows) {
        if (r.query_id == query_id) return &r;
    }
    return nullptr;
}

HitMatrix HitMatrix::from_bools(const std::vector<std::vector<bool>>& rows, std::size_t k) {
    HitMatrix m;
    m.k = k;
    m.rows.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() > k) throw InvalidArgument("hit row longer than k");
        HitRow r;
        r.query_id = "q" + std::to_string(i);
        r.hits.assign(rows[i].begin(), rows[i].end());
        m.rows.push_back(std::move(r));
    }
    return m;
}

namespace {

std::string cell_label(const EvalRecord& r, std::size_t rank) {
    return "query '" + r.query_id + "' rank " + std::to_string(rank);
}

}  // namespace

HitMatrix build_hit_matrix(const EvalSet& set, const RelevanceThresholds& thresholds,
                           const NormalizationRules& rules, Embedder* embedder, const HitMatrixOptions& opts) {
    thresholds.validate();
    const auto n = set.records.size();

    HitMatrix m;
    m.k = set.k;
    m.semantic_stage = embedder != nullptr;
    m.rows.resize(n);

    std::vector<std::string> gts(n);
    std::vector<std::vector<PreparedContext>> prepared(n);
    detail::ErrorSlot errors;

    // Stage 1-2 per record.
    const int threads = detail::thread_count(opts.parallelism);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        errors.run([&] {
            const auto& rec = set.records[static_cast<std::size_t>(i)];
            auto& row = m.rows[static_cast<std::size_t>(i)];
            auto& gt = gts[static_cast<std::size_t>(i)];
            auto& prep = prepared[static_cast<std::size_t>(i)];
            row.query_id = rec.query_id;
            gt = normalize_text(rec.ground_truth, rules);
            row.hits.assign(rec.contexts.size(), 0);
            row.verdicts.assign(rec.contexts.size(), RelevanceVerdict{});
            prep.reserve(rec.contexts.size());
            for (std::size_t c = 0; c < rec.contexts.size(); ++c) {
                prep.push_back(prepare_context(rec.contexts[c].text, rules));
                if (auto v = lexical_relevance(prep.back().normalized, gt, thresholds)) {
                    row.verdicts[c] = *v;
                } else {
                    // provisional miss; the semantic stage may overwrite it
                    row.verdicts[c] = {false, RelevanceLevel::none, token_overlap(gt, prep.back().normalized)};
                }
                row.hits[c] = row.verdicts[c].hit ? 1 : 0;
            }
        });
    }
    errors.rethrow();

    if (embedder == nullptr) return m;

    struct Pending {
        std::size_t record;
        std::size_t context;
    };
    std::vector<Pending> pending;
    std::vector<std::string> texts;
    std::unordered_map<std::string, std::size_t> text_index;
    auto intern = [&](const std::string& t) {
        auto [it, inserted] = text_index.emplace(t, texts.size());
        if (inserted) texts.push_back(t);
        return it->second;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < prepared[i].size(); ++c) {
            const auto& v = m.rows[i].verdicts[c];
            if (v.hit || gts[i].empty() || prepared[i][c].sentences.empty()) continue;
            pending.push_back({i, c});
            intern(gts[i]);
            for (const auto& s : prepared[i][c].sentences) intern(s);
        }
    }
    if (pending.empty()) return m;

    std::vector<EmbeddingVector> vectors;
    try {
        vectors = embedder->embed(texts);
    } catch (const CacheMissError&) {
        throw;
    } catch (const ProviderError& e) {
        throw ProviderError(std::string("semantic relevance stage: ") + e.what());
    }
    if (vectors.size() != texts.size()) {
        throw ProviderError("semantic relevance stage: embedder returned " + std::to_string(vectors.size()) +
                            " vectors for " + std::to_string(texts.size()) + " texts");
    }

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(pending.size()); ++p) {
        const auto [i, c] = pending[static_cast<std::size_t>(p)];
        errors.run([&, i = i, c = c] {
            try {
                const auto& g = vectors[text_index.at(gts[i])];
                double best = -1.0;
                for (const auto& s : prepared[i][c].sentences) {
                    best = std::max(best, cosine_similarity(g, vectors[text_index.at(s)]));
                }
                m.rows[i].verdicts[c] = semantic_verdict(best, thresholds);
                m.rows[i].hits[c] = m.rows[i].verdicts[c].hit ? 1 : 0;
            } catch (const InvalidArgument& e) {
                throw InvalidArgument(cell_label(set.records[i], c + 1) + ": " + e.what());
            }
        });
    }
    errors.rethrow();
    return m;
}

namespace ref {

HitMatrix build_hit_matrix_serial(const EvalSet& set, const RelevanceThresholds& thresholds,
                                  const NormalizationRules& rules, Embedder* embedder) {
    thresholds.validate();
    HitMatrix m;
    m.k = set.k;
    m.semantic_stage = embedder != nullptr;
    for (const auto& rec : set.records) {
        HitRow row;
        row.query_id = rec.query_id;
        const auto gt = normalize_text(rec.ground_truth, rules);
        for (std::size_t c = 0; c < rec.contexts.size(); ++c) {
            try {
                const auto v = relevance(prepare_context(rec.contexts[c].text, rules), gt, thresholds, embedder);
                row.verdicts.push_back(v);
                row.hits.push_back(v.hit ? 1 : 0);
            } catch (const InvalidArgument& e) {
                throw InvalidArgument(cell_label(rec, c + 1) + ": " + e.what());
            }
        }
        m.rows.push_back(std::move(row));
    }
    return m;
}

}  // namespace ref

}  // namespace ragdx
