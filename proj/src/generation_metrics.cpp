#include "ragdx/generation_metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "parallel.hpp"
#include "ragdx/errors.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

void AccuracyThresholds::validate() const {
    if (!(list_f1_min >= 0.0 && list_f1_min <= 1.0)) throw ConfigError("list_f1 accuracy threshold must lie in [0, 1]");
    if (!(semantic_min >= 0.0 && semantic_min <= 1.0)) {
        throw ConfigError("semantic accuracy threshold must lie in [0, 1]");
    }
}

bool exact_match(std::string_view answer, std::string_view ground_truth) { return answer == ground_truth; }

bool fuzzy_match(std::string_view answer, std::string_view ground_truth) {
    if (answer.empty() && ground_truth.empty()) return true;
    if (answer.empty() || ground_truth.empty()) return false;
    return answer.find(ground_truth) != std::string_view::npos || ground_truth.find(answer) != std::string_view::npos;
}

namespace {

double f1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

double token_f1(std::string_view answer, std::string_view ground_truth) {
    const auto a = text::tokenize(answer);
    const auto g = text::tokenize(ground_truth);
    if (a.empty() && g.empty()) return 1.0;
    if (a.empty() || g.empty()) return 0.0;
    std::unordered_map<std::string, int> bag;
    for (const auto& t : g) ++bag[t];
    std::size_t common = 0;
    for (const auto& t : a) {
        auto it = bag.find(t);
        if (it != bag.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    return f1(static_cast<double>(common) / static_cast<double>(a.size()),
              static_cast<double>(common) / static_cast<double>(g.size()));
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(std::string_view answer, std::string_view ground_truth) {
    const auto a = text::tokenize(answer);
    const auto g = text::tokenize(ground_truth);
    if (a.empty() && g.empty()) return 1.0;
    if (a.empty() || g.empty()) return 0.0;
    const auto l = static_cast<double>(lcs_length(a, g));
    return f1(l / static_cast<double>(a.size()), l / static_cast<double>(g.size()));
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string_view strip_bullet(std::string_view item) {
    item = text::trim(item);
    if (item.starts_with("\xE2\x80\xA2")) return text::trim(item.substr(3));
    if (item.starts_with("- ") || item.starts_with("* ") || item == "-" || item == "*") {
        return text::trim(item.substr(1));
    }
    std::size_t d = 0;
    while (d < item.size() && is_digit(item[d])) ++d;
    if (d > 0 && d + 1 < item.size() && (item[d] == '.' || item[d] == ')') && text::is_space(item[d + 1])) {
        return text::trim(item.substr(d + 1));
    }
    return item;
}

}  // namespace

std::vector<std::string> split_list_items(std::string_view raw, const NormalizationRules& rules) {
    std::vector<std::string> pieces;
    std::string cur;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char c = raw[i];
        const bool digit_comma = c == ',' && i > 0 && i + 1 < raw.size() && is_digit(raw[i - 1]) && is_digit(raw[i + 1]);
        if ((c == ',' && !digit_comma) || c == ';' || c == '\n' || c == '\r') {
            pieces.push_back(std::move(cur));
            cur.clear();
        } else if (raw.substr(i).starts_with("\xE2\x80\xA2")) {
            pieces.push_back(std::move(cur));
            cur.clear();
            i += 2;
        } else {
            cur += c;
        }
    }
    pieces.push_back(std::move(cur));

    std::vector<std::string> items;
    for (const auto& piece : pieces) {
        std::string part;
        auto flush = [&] {
            auto n = normalize_text(strip_bullet(part), rules);
            if (!text::trim(n).empty()) items.push_back(std::move(n));
            part.clear();
        };
        for (const auto& w : text::split_whitespace(strip_bullet(piece))) {
            if (text::fold_case(w) == "and") {
                flush();
            } else {
                if (!part.empty()) part += ' ';
                part += w;
            }
        }
        flush();
    }
    return items;
}

double list_component_f1(std::string_view raw_answer, std::string_view raw_ground_truth,
                         const NormalizationRules& rules) {
    const auto a = split_list_items(raw_answer, rules);
    const auto g = split_list_items(raw_ground_truth, rules);
    if (a.empty() && g.empty()) return 1.0;
    if (a.empty() || g.empty()) return 0.0;

    struct Candidate {
        double quality;
        std::size_t ai, gi;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (fuzzy_match(a[i], g[j])) cands.push_back({token_f1(a[i], g[j]), i, j});
        }
    }
    // Ties break on item text so the result does not depend on list order.
    std::sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
        if (x.quality != y.quality) return x.quality > y.quality;
        if (a[x.ai] != a[y.ai]) return a[x.ai] < a[y.ai];
        return g[x.gi] < g[y.gi];
    });
    std::vector<bool> used_a(a.size(), false), used_g(g.size(), false);
    std::size_t matched = 0;
    for (const auto& c : cands) {
        if (used_a[c.ai] || used_g[c.gi]) continue;
        used_a[c.ai] = used_g[c.gi] = true;
        ++matched;
    }
    return f1(static_cast<double>(matched) / static_cast<double>(a.size()),
              static_cast<double>(matched) / static_cast<double>(g.size()));
}

double semantic_similarity(std::string_view answer, std::string_view ground_truth, Embedder& embedder) {
    const std::vector<std::string> texts{std::string(answer), std::string(ground_truth)};
    const auto v = embed_batch(embedder, texts);
    return std::clamp(cosine_similarity(v[0], v[1]), 0.0, 1.0);
}

bool composite_accuracy(const GenerationScores& s, const AccuracyThresholds& t) {
    return s.exact_match || s.fuzzy_match || (s.list_f1 && *s.list_f1 >= t.list_f1_min) ||
           (s.semantic_similarity && *s.semantic_similarity >= t.semantic_min);
}

namespace {

GenerationScores surface_scores(const EvalRecord& rec, const std::string& answer, const std::string& gt,
                                const NormalizationRules& rules) {
    GenerationScores s;
    s.query_id = rec.query_id;
    s.task_type = rec.task_type;
    s.exact_match = exact_match(answer, gt);
    s.fuzzy_match = fuzzy_match(answer, gt);
    s.token_f1 = token_f1(answer, gt);
    s.rouge_l = rouge_l(answer, gt);
    if (rec.task_type == TaskType::extraction) s.list_f1 = list_component_f1(rec.answer, rec.ground_truth, rules);
    return s;
}

}  // namespace

GenerationScores score_record(const EvalRecord& rec, const NormalizationRules& rules, Embedder* embedder,
                              const AccuracyThresholds& t) {
    const auto answer = normalize_text(rec.answer, rules);
    const auto gt = normalize_text(rec.ground_truth, rules);
    auto s = surface_scores(rec, answer, gt, rules);
    if (embedder != nullptr) {
        s.semantic_similarity = (answer.empty() || gt.empty()) ? 0.0 : semantic_similarity(answer, gt, *embedder);
    }
    s.accuracy = composite_accuracy(s, t);
    return s;
}

std::vector<GenerationScores> score_generation(const EvalSet& set, const NormalizationRules& rules,
                                               Embedder* embedder, const GenerationOptions& opts) {
    opts.thresholds.validate();
    const auto n = set.records.size();
    std::vector<std::string> answers(n), gts(n);
    std::vector<GenerationScores> out(n);
    detail::ErrorSlot errors;
    const int threads = detail::thread_count(opts.parallelism);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        errors.run([&, i = static_cast<std::size_t>(i)] {
            const auto& rec = set.records[i];
            answers[i] = normalize_text(rec.answer, rules);
            gts[i] = normalize_text(rec.ground_truth, rules);
            out[i] = surface_scores(rec, answers[i], gts[i], rules);
        });
    }
    errors.rethrow();

    if (embedder != nullptr) {
        std::vector<std::string> texts;
        std::unordered_map<std::string, std::size_t> index;
        auto intern = [&](const std::string& t) {
            auto [it, inserted] = index.emplace(t, texts.size());
            if (inserted) texts.push_back(t);
        };
        for (std::size_t i = 0; i < n; ++i) {
            if (answers[i].empty() || gts[i].empty()) continue;
            intern(answers[i]);
            intern(gts[i]);
        }
        std::vector<EmbeddingVector> vecs;
        if (!texts.empty()) {
            try {
                vecs = embed_batch(*embedder, texts);
            } catch (const CacheMissError&) {
                throw;
            } catch (const ProviderError& e) {
                throw ProviderError(std::string("semantic similarity: ") + e.what());
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (answers[i].empty() || gts[i].empty()) {
                out[i].semantic_similarity = 0.0;
                continue;
            }
            const double c = cosine_similarity(vecs[index.at(answers[i])], vecs[index.at(gts[i])]);
            out[i].semantic_similarity = std::clamp(c, 0.0, 1.0);
        }
    }
    for (auto& s : out) s.accuracy = composite_accuracy(s, opts.thresholds);
    return out;
}

namespace ref {

std::vector<GenerationScores> score_generation_serial(const EvalSet& set, const NormalizationRules& rules,
                                                      Embedder* embedder, const AccuracyThresholds& t) {
    std::vector<GenerationScores> out;
    out.reserve(set.records.size());
    for (const auto& rec : set.records) out.push_back(score_record(rec, rules, embedder, t));
    return out;
}

}  // namespace ref

namespace {

template <class Get>
std::optional<double> mean_of_present(const std::vector<GenerationScores>& scores, Get get) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : scores) {
        if (const std::optional<double> v = get(s)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

nlohmann::ordered_json opt(const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

}  // namespace

GenerationSummary summarize(const std::vector<GenerationScores>& scores) {
    GenerationSummary s;
    s.query_count = scores.size();
    if (scores.empty()) return s;
    const auto q = static_cast<double>(scores.size());
    for (const auto& g : scores) {
        s.accuracy += g.accuracy ? 1.0 : 0.0;
        s.exact_match_rate += g.exact_match ? 1.0 : 0.0;
        s.fuzzy_match_rate += g.fuzzy_match ? 1.0 : 0.0;
        s.mean_token_f1 += g.token_f1;
        s.mean_rouge_l += g.rouge_l;
    }
    s.accuracy /= q;
    s.exact_match_rate /= q;
    s.fuzzy_match_rate /= q;
    s.mean_token_f1 /= q;
    s.mean_rouge_l /= q;
    s.mean_list_f1 = mean_of_present(scores, [](const GenerationScores& g) { return g.list_f1; });
    s.mean_semantic_similarity =
        mean_of_present(scores, [](const GenerationScores& g) { return g.semantic_similarity; });
    s.mean_answer_relevancy = mean_of_present(scores, [](const GenerationScores& g) { return g.answer_relevancy; });
    s.mean_context_adherence =
        mean_of_present(scores, [](const GenerationScores& g) { return g.context_adherence; });
    return s;
}

nlohmann::ordered_json to_json(const GenerationScores& s) {
    nlohmann::ordered_json j;
    j["query_id"] = s.query_id;
    j["task_type"] = to_string(s.task_type);
    j["exact_match"] = s.exact_match;
    j["fuzzy_match"] = s.fuzzy_match;
    j["token_f1"] = s.token_f1;
    j["rouge_l"] = s.rouge_l;
    j["list_f1"] = opt(s.list_f1);
    j["semantic_similarity"] = opt(s.semantic_similarity);
    j["accuracy"] = s.accuracy;
    j["answer_relevancy"] = opt(s.answer_relevancy);
    j["context_adherence"] = opt(s.context_adherence);
    return j;
}

nlohmann::ordered_json to_json(const GenerationSummary& s) {
    nlohmann::ordered_json j;
    j["query_count"] = s.query_count;
    j["accuracy"] = s.accuracy;
    j["exact_match_rate"] = s.exact_match_rate;
    j["fuzzy_match_rate"] = s.fuzzy_match_rate;
    j["mean_token_f1"] = s.mean_token_f1;
    j["mean_rouge_l"] = s.mean_rouge_l;
    j["mean_list_f1"] = opt(s.mean_list_f1);
    j["mean_semantic_similarity"] = opt(s.mean_semantic_similarity);
    j["mean_answer_relevancy"] = opt(s.mean_answer_relevancy);
    j["mean_context_adherence"] = opt(s.mean_context_adherence);
    return j;
}

GenerationScores generation_scores_from_json(const nlohmann::json& j) {
    GenerationScores s;
    s.query_id = j.at("query_id").get<std::string>();
    s.task_type = task_type_from_string(j.at("task_type").get<std::string>());
    s.exact_match = j.at("exact_match").get<bool>();
    s.fuzzy_match = j.at("fuzzy_match").get<bool>();
    s.token_f1 = j.at("token_f1").get<double>();
    s.rouge_l = j.at("rouge_l").get<double>();
    s.list_f1 = opt_from(j, "list_f1");
    s.semantic_similarity = opt_from(j, "semantic_similarity");
    s.accuracy = j.at("accuracy").get<bool>();
    s.answer_relevancy = opt_from(j, "answer_relevancy");
    s.context_adherence = opt_from(j, "context_adherence");
    return s;
}

GenerationSummary generation_summary_from_json(const nlohmann::json& j) {
    GenerationSummary s;
    s.query_count = j.at("query_count").get<std::size_t>();
    s.accuracy = j.at("accuracy").get<double>();
    s.exact_match_rate = j.at("exact_match_rate").get<double>();
    s.fuzzy_match_rate = j.at("fuzzy_match_rate").get<double>();
    s.mean_token_f1 = j.at("mean_token_f1").get<double>();
    s.mean_rouge_l = j.at("mean_rouge_l").get<double>();
    s.mean_list_f1 = opt_from(j, "mean_list_f1");
    s.mean_semantic_similarity = opt_from(j, "mean_semantic_similarity");
    s.mean_answer_relevancy = opt_from(j, "mean_answer_relevancy");
    s.mean_context_adherence = opt_from(j, "mean_context_adherence");
    return s;
}

}  // namespace ragdx
