#include "ragdx/report.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "defaults.hpp"
#include "ragdx/errors.hpp"

namespace ragdx {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Severity s) noexcept {
    switch (s) {
        case Severity::ok:
            return "ok";
        case Severity::warn:
            return "warn";
        case Severity::critical:
            return "critical";
    }
    return "ok";
}

Severity severity_from_string(std::string_view s) {
    if (s == "ok") return Severity::ok;
    if (s == "warn") return Severity::warn;
    if (s == "critical") return Severity::critical;
    throw ConfigError("unknown severity '" + std::string(s) + "'");
}

namespace {

const std::set<std::string> kComparators = {">", ">=", "<", "<=", "=="};

RuleCondition condition_from_json(const nlohmann::json& j, const std::string& where) {
    RuleCondition c;
    try {
        c.metric = j.at("metric").get<std::string>();
        c.comparator = j.at("comparator").get<std::string>();
        c.threshold = j.at("threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    if (!kComparators.count(c.comparator)) {
        throw ConfigError(where + ": unknown comparator '" + c.comparator + "'");
    }
    return c;
}

}  // namespace

bool RuleCondition::holds(double v) const {
    if (comparator == ">") return v > threshold;
    if (comparator == ">=") return v >= threshold;
    if (comparator == "<") return v < threshold;
    if (comparator == "<=") return v <= threshold;
    return v == threshold;
}

std::vector<LedgerRule> report_rules_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("report rules must be a JSON array");
    std::vector<LedgerRule> rules;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto where = "report rule " + std::to_string(i);
        const auto& r = j[i];
        LedgerRule rule;
        rule.test = condition_from_json(r, where);
        try {
            rule.label = r.value("label", rule.test.metric);
            rule.format = r.value("format", std::string("percent"));
            rule.interpretation = r.at("interpretation").get<std::string>();
            rule.insight = r.at("insight").get<std::string>();
            rule.severity = severity_from_string(r.at("severity").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(where + ": " + e.what());
        }
        if (rule.format != "percent" && rule.format != "score") {
            throw ConfigError(where + ": format must be 'percent' or 'score'");
        }
        if (auto w = r.find("when"); w != r.end()) {
            if (!w->is_array()) throw ConfigError(where + ": 'when' must be an array");
            for (const auto& c : *w) rule.when.push_back(condition_from_json(c, where + " when"));
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::vector<LedgerRule> default_report_rules() {
    return report_rules_from_json(nlohmann::json::parse(defaults::report_rules()));
}

std::vector<LedgerRule> load_report_rules(const std::optional<std::filesystem::path>& path) {
    if (!path || path->empty()) return default_report_rules();
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read report rules '" + path->string() + "'");
    try {
        return report_rules_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path->string() + ": " + e.what());
    }
}

std::string format_value(double value, const std::string& format) {
    std::ostringstream out;
    out << std::fixed;
    if (format == "percent") {
        out << std::setprecision(1) << value * 100.0 << '%';
    } else {
        out << std::setprecision(2) << value;
    }
    return out.str();
}

std::map<std::string, double> metric_values(const RetrievalReport& retrieval, const GenerationSummary& generation,
                                            const CueReport* cue) {
    std::map<std::string, double> v;
    v["recall_at_k"] = retrieval.recall_at_k;
    v["mrr"] = retrieval.mrr;
    v["map"] = retrieval.map;
    v["ndcg"] = retrieval.ndcg;
    v["no_hit_rate"] = retrieval.no_hit_rate;
    for (std::size_t i = 0; i < retrieval.k; ++i) {
        const auto r = std::to_string(i + 1);
        v["context_hit_rate_" + r] = retrieval.context_hit_rate[i];
        v["exclusive_hit_rate_" + r] = retrieval.exclusive_hit_rate[i];
        for (std::size_t j = i + 1; j < retrieval.k; ++j) {
            v["pairwise_redundancy_" + r + "_" + std::to_string(j + 1)] = retrieval.pairwise_redundancy[i][j];
        }
    }
    if (retrieval.mean_context_relevancy) v["mean_context_relevancy"] = *retrieval.mean_context_relevancy;
    v["accuracy"] = generation.accuracy;
    v["exact_match_rate"] = generation.exact_match_rate;
    v["fuzzy_match_rate"] = generation.fuzzy_match_rate;
    v["mean_token_f1"] = generation.mean_token_f1;
    v["mean_rouge_l"] = generation.mean_rouge_l;
    if (generation.mean_list_f1) v["mean_list_f1"] = *generation.mean_list_f1;
    if (generation.mean_semantic_similarity) v["mean_semantic_similarity"] = *generation.mean_semantic_similarity;
    if (generation.mean_answer_relevancy) v["mean_answer_relevancy"] = *generation.mean_answer_relevancy;
    if (generation.mean_context_adherence) v["mean_context_adherence"] = *generation.mean_context_adherence;
    if (cue != nullptr) {
        v["effective_use"] = cue->effective_use;
        v["information_blindness"] = cue->information_blindness;
        v["lucky_guess"] = cue->lucky_guess;
        v["correct_rejection"] = cue->correct_rejection;
        v["residual"] = cue->residual;
        v["accuracy_fallacy_gap"] = cue->accuracy_fallacy_gap;
    }
    return v;
}

std::vector<LedgerRow> evaluate_ledger(const std::map<std::string, double>& values,
                                       const std::vector<LedgerRule>& rules) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto& r : rules) {
        if (seen.insert(r.test.metric).second) order.push_back(r.test.metric);
    }
    std::vector<LedgerRow> rows;
    for (const auto& metric : order) {
        auto v = values.find(metric);
        if (v == values.end()) continue;
        for (const auto& r : rules) {
            if (r.test.metric != metric || !r.test.holds(v->second)) continue;
            const bool when_ok = std::all_of(r.when.begin(), r.when.end(), [&](const RuleCondition& c) {
                auto w = values.find(c.metric);
                return w != values.end() && c.holds(w->second);
            });
            if (!when_ok) continue;
            rows.push_back({metric, r.label, v->second, format_value(v->second, r.format), r.interpretation,
                            r.insight, r.severity});
            break;
        }
    }
    return rows;
}

DiagnosticReport build_report(const HitMatrix& hits, const RetrievalReport& retrieval,
                              const std::vector<GenerationScores>& generation, const std::optional<CueReport>& cue,
                              RunMetadata metadata, const std::vector<LedgerRule>& rules,
                              const std::map<std::string, double>& context_relevancy) {
    DiagnosticReport r;
    r.metadata = std::move(metadata);
    r.retrieval = retrieval;
    r.generation = summarize(generation);
    r.cue = cue;
    r.ledger = evaluate_ledger(metric_values(r.retrieval, r.generation, cue ? &*cue : nullptr), rules);

    std::map<std::string, const GenerationScores*> gen;
    for (const auto& g : generation) gen.emplace(g.query_id, &g);
    std::map<std::string, const CueQueryResult*> quads;
    if (cue) {
        for (const auto& q : cue->queries) quads.emplace(q.query_id, &q);
    }
    for (const auto& row : hits.rows) {
        PerQueryRow p;
        p.query_id = row.query_id;
        p.hits = row.hits;
        for (const auto& v : row.verdicts) p.relevance_levels.emplace_back(to_string(v.level));
        if (auto g = gen.find(row.query_id); g != gen.end()) p.generation = *g->second;
        p.generation.query_id = row.query_id;
        if (auto c = context_relevancy.find(row.query_id); c != context_relevancy.end()) {
            p.context_relevancy = c->second;
        }
        if (auto q = quads.find(row.query_id); q != quads.end()) {
            p.quadrant = std::string(to_string(q->second->quadrant));
            p.cell = q->second->signature;
        }
        r.per_query.push_back(std::move(p));
    }
    return r;
}

namespace {

ojson opt_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }
ojson opt_json(const std::optional<std::string>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

ojson metadata_json(const RunMetadata& m, bool with_timestamps) {
    ojson j;
    j["run_id"] = m.run_id;
    j["dataset_path"] = m.dataset_path;
    j["dataset_sha256"] = m.dataset_sha256;
    j["tool_version"] = m.tool_version;
    if (with_timestamps) {
        j["started_at"] = m.started_at;
        j["finished_at"] = m.finished_at;
    }
    j["config"] = m.config;
    j["annotations"] = m.annotations;
    return j;
}

ojson report_json(const DiagnosticReport& r, bool with_timestamps) {
    ojson j;
    j["run_metadata"] = metadata_json(r.metadata, with_timestamps);
    j["retrieval"] = to_json(r.retrieval);
    j["generation"] = to_json(r.generation);
    j["cue"] = r.cue ? to_json(*r.cue) : ojson(nullptr);
    ojson ledger = ojson::array();
    for (const auto& row : r.ledger) {
        ledger.push_back({{"metric", row.metric},
                          {"label", row.label},
                          {"value", row.value},
                          {"display", row.display},
                          {"interpretation", row.interpretation},
                          {"insight", row.insight},
                          {"severity", to_string(row.severity)}});
    }
    j["ledger"] = ledger;
    ojson rows = ojson::array();
    for (const auto& p : r.per_query) {
        ojson q;
        q["query_id"] = p.query_id;
        q["hits"] = p.hits;
        q["relevance_levels"] = p.relevance_levels;
        q["generation"] = to_json(p.generation);
        q["context_relevancy"] = opt_json(p.context_relevancy);
        q["quadrant"] = opt_json(p.quadrant);
        q["cell"] = opt_json(p.cell);
        rows.push_back(std::move(q));
    }
    j["per_query"] = rows;
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const DiagnosticReport& r) { return report_json(r, true); }

nlohmann::ordered_json canonical_json(const DiagnosticReport& r) { return report_json(r, false); }

DiagnosticReport report_from_json(const nlohmann::json& j) {
    DiagnosticReport r;
    const auto& m = j.at("run_metadata");
    r.metadata.run_id = m.at("run_id").get<std::string>();
    r.metadata.dataset_path = m.at("dataset_path").get<std::string>();
    r.metadata.dataset_sha256 = m.at("dataset_sha256").get<std::string>();
    r.metadata.tool_version = m.at("tool_version").get<std::string>();
    r.metadata.started_at = m.value("started_at", std::string{});
    r.metadata.finished_at = m.value("finished_at", std::string{});
    r.metadata.config = ojson::parse(m.at("config").dump());
    r.metadata.annotations = m.at("annotations").get<std::vector<std::string>>();
    r.retrieval = retrieval_report_from_json(j.at("retrieval"));
    r.generation = generation_summary_from_json(j.at("generation"));
    if (!j.at("cue").is_null()) r.cue = cue_report_from_json(j["cue"]);
    for (const auto& row : j.at("ledger")) {
        r.ledger.push_back({row.at("metric").get<std::string>(), row.at("label").get<std::string>(),
                            row.at("value").get<double>(), row.at("display").get<std::string>(),
                            row.at("interpretation").get<std::string>(), row.at("insight").get<std::string>(),
                            severity_from_string(row.at("severity").get<std::string>())});
    }
    for (const auto& q : j.at("per_query")) {
        PerQueryRow p;
        p.query_id = q.at("query_id").get<std::string>();
        p.hits = q.at("hits").get<std::vector<std::uint8_t>>();
        p.relevance_levels = q.at("relevance_levels").get<std::vector<std::string>>();
        p.generation = generation_scores_from_json(q.at("generation"));
        p.context_relevancy = opt_double(q, "context_relevancy");
        p.quadrant = opt_string(q, "quadrant");
        p.cell = opt_string(q, "cell");
        r.per_query.push_back(std::move(p));
    }
    return r;
}

namespace {

std::string md_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string num(double v) {
    std::ostringstream out;
    out << std::setprecision(6) << v;
    return out.str();
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string{}; }

std::string render_markdown(const DiagnosticReport& r) {
    std::ostringstream md;
    md << "# Diagnostic report `" << r.metadata.run_id << "`\n\n";
    md << "- Dataset: `" << r.metadata.dataset_path << "`\n";
    md << "- Queries: " << r.retrieval.query_count << ", k = " << r.retrieval.k << "\n";
    md << "- Tool version: " << r.metadata.tool_version << "\n";
    if (!r.metadata.started_at.empty()) md << "- Started: " << r.metadata.started_at << "\n";
    for (const auto& a : r.metadata.annotations) md << "- Note: " << md_escape(a) << "\n";

    md << "\n## Diagnostic ledger\n\n";
    md << "| Metric | Value | Interpretation | Actionable Insight | Severity |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& row : r.ledger) {
        md << "| " << md_escape(row.label) << " | " << row.display << " | " << md_escape(row.interpretation) << " | "
           << md_escape(row.insight) << " | " << to_string(row.severity) << " |\n";
    }

    const auto& rt = r.retrieval;
    md << "\n## Retrieval\n\n";
    md << "- Recall@" << rt.k << ": " << format_value(rt.recall_at_k, "percent") << "\n";
    md << "- MRR: " << format_value(rt.mrr, "score") << ", MAP: " << format_value(rt.map, "score")
       << ", nDCG: " << format_value(rt.ndcg, "score") << "\n";
    md << "- No-hit rate: " << format_value(rt.no_hit_rate, "percent") << "\n";
    for (std::size_t i = 0; i < rt.k; ++i) {
        md << "- Rank " << i + 1 << ": hit rate " << format_value(rt.context_hit_rate[i], "percent")
           << ", exclusive " << format_value(rt.exclusive_hit_rate[i], "percent") << "\n";
    }

    const auto& g = r.generation;
    md << "\n## Generation\n\n";
    md << "- Accuracy: " << format_value(g.accuracy, "percent") << "\n";
    md << "- Exact match: " << format_value(g.exact_match_rate, "percent")
       << ", fuzzy match: " << format_value(g.fuzzy_match_rate, "percent") << "\n";
    md << "- Token F1: " << format_value(g.mean_token_f1, "score")
       << ", ROUGE-L: " << format_value(g.mean_rouge_l, "score") << "\n";
    if (g.mean_list_f1) md << "- List-component F1: " << format_value(*g.mean_list_f1, "score") << "\n";
    if (g.mean_semantic_similarity) {
        md << "- Semantic similarity: " << format_value(*g.mean_semantic_similarity, "score") << "\n";
    }
    if (g.mean_answer_relevancy) md << "- Answer relevancy: " << format_value(*g.mean_answer_relevancy, "score") << "\n";
    if (g.mean_context_adherence) {
        md << "- Context adherence: " << format_value(*g.mean_context_adherence, "score") << "\n";
    }

    if (r.cue) {
        const auto& c = *r.cue;
        md << "\n## Context utilization (threshold " << format_value(c.adherence_threshold, "score") << ")\n\n";
        md << "| Quadrant | Share |\n|---|---|\n";
        md << "| Effective use | " << format_value(c.effective_use, "percent") << " |\n";
        md << "| Information blindness | " << format_value(c.information_blindness, "percent") << " |\n";
        md << "| Lucky guess | " << format_value(c.lucky_guess, "percent") << " |\n";
        md << "| Correct rejection | " << format_value(c.correct_rejection, "percent") << " |\n";
        for (const auto& [sig, p] : c.residual_cells) {
            md << "| Residual `" << sig << "` | " << format_value(p, "percent") << " |\n";
        }
        md << "\nAccuracy " << format_value(c.accuracy, "percent") << " against context hit rate "
           << format_value(c.any_hit_rate, "percent") << ": gap " << format_value(c.accuracy_fallacy_gap, "percent")
           << ".\n";
    }
    return md.str();
}

std::string render_csv(const DiagnosticReport& r) {
    std::ostringstream csv;
    csv << "query_id,task_type";
    for (std::size_t i = 0; i < r.retrieval.k; ++i) csv << ",hit_" << i + 1;
    csv << ",any_hit,exact_match,fuzzy_match,token_f1,rouge_l,list_f1,semantic_similarity,accuracy,"
           "answer_relevancy,context_adherence,context_relevancy,quadrant,cell\n";
    for (const auto& p : r.per_query) {
        const auto& g = p.generation;
        csv << csv_field(p.query_id) << ',' << to_string(g.task_type);
        bool any = false;
        for (std::size_t i = 0; i < r.retrieval.k; ++i) {
            const bool h = i < p.hits.size() && p.hits[i];
            any = any || h;
            csv << ',' << (h ? 1 : 0);
        }
        csv << ',' << (any ? 1 : 0) << ',' << (g.exact_match ? 1 : 0) << ',' << (g.fuzzy_match ? 1 : 0) << ','
            << num(g.token_f1) << ',' << num(g.rouge_l) << ',' << num(g.list_f1) << ',' << num(g.semantic_similarity)
            << ',' << (g.accuracy ? 1 : 0) << ',' << num(g.answer_relevancy) << ',' << num(g.context_adherence)
            << ',' << num(p.context_relevancy) << ',' << p.quadrant.value_or("") << ',' << p.cell.value_or("")
            << '\n';
    }
    return csv.str();
}

}  // namespace

std::string render(const DiagnosticReport& r, ReportFormat format) {
    switch (format) {
        case ReportFormat::json:
            return to_json(r).dump(2) + "\n";
        case ReportFormat::markdown:
            return render_markdown(r);
        case ReportFormat::csv:
            return render_csv(r);
    }
    return {};
}

void write_report_files(const DiagnosticReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, ReportFormat f) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + path.string() + "'");
        out << render(r, f);
        if (!out) throw ConfigError("failed writing '" + path.string() + "'");
    };
    write("report.json", ReportFormat::json);
    write("report.md", ReportFormat::markdown);
    write("per_query.csv", ReportFormat::csv);
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace ragdx
