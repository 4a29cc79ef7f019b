#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragdx/cue.hpp"
#include "ragdx/generation_metrics.hpp"
#include "ragdx/relevance.hpp"
#include "ragdx/retrieval_metrics.hpp"

namespace ragdx {

enum class Severity { ok, warn, critical };

std::string_view to_string(Severity s) noexcept;
Severity severity_from_string(std::string_view s);

struct RuleCondition {
    std::string metric;
    std::string comparator;  ///< one of > >= < <= ==
    double threshold = 0.0;

    bool holds(double value) const;
};

/// One line of the rule table. Rules are tried in file order; the first one
/// whose comparison and every `when` condition hold produces the row.
struct LedgerRule {
    RuleCondition test;
    std::string label;
    std::string format = "percent";  ///< percent | score
    std::string interpretation;
    std::string insight;
    Severity severity = Severity::ok;
    std::vector<RuleCondition> when;
};

struct LedgerRow {
    std::string metric;
    std::string label;
    double value = 0.0;
    std::string display;
    std::string interpretation;
    std::string insight;
    Severity severity = Severity::ok;
};

std::vector<LedgerRule> report_rules_from_json(const nlohmann::json& j);
std::vector<LedgerRule> default_report_rules();
/// Empty path -> shipped defaults. Throws ConfigError on a malformed file.
std::vector<LedgerRule> load_report_rules(const std::optional<std::filesystem::path>& path);

/// "49.2%" or "0.84".
std::string format_value(double value, const std::string& format);

/// Flat metric-name -> value map the rules are evaluated against.
std::map<std::string, double> metric_values(const RetrievalReport& retrieval, const GenerationSummary& generation,
                                            const CueReport* cue);

/// One row per metric that has a value and a matching rule, in the order
/// the metrics first appear in the rule table.
std::vector<LedgerRow> evaluate_ledger(const std::map<std::string, double>& values,
                                       const std::vector<LedgerRule>& rules);

struct RunMetadata {
    std::string run_id;
    std::string dataset_path;
    std::string dataset_sha256;
    std::string tool_version;
    std::string started_at;   ///< ISO 8601 UTC
    std::string finished_at;  ///< ISO 8601 UTC
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<std::string> annotations;
};

struct PerQueryRow {
    std::string query_id;
    std::vector<std::uint8_t> hits;
    std::vector<std::string> relevance_levels;
    GenerationScores generation;
    std::optional<double> context_relevancy;  ///< mean over the judged contexts
    std::optional<std::string> quadrant;
    std::optional<std::string> cell;
};

struct DiagnosticReport {
    RunMetadata metadata;
    RetrievalReport retrieval;
    GenerationSummary generation;
    std::optional<CueReport> cue;
    std::vector<LedgerRow> ledger;
    std::vector<PerQueryRow> per_query;
};

DiagnosticReport build_report(const HitMatrix& hits, const RetrievalReport& retrieval,
                              const std::vector<GenerationScores>& generation, const std::optional<CueReport>& cue,
                              RunMetadata metadata, const std::vector<LedgerRule>& rules,
                              const std::map<std::string, double>& context_relevancy = {});

enum class ReportFormat { json, markdown, csv };

nlohmann::ordered_json to_json(const DiagnosticReport& r);
DiagnosticReport report_from_json(const nlohmann::json& j);

/// to_json with the timestamps removed: the part of a report that two runs
/// over the same inputs must reproduce exactly.
nlohmann::ordered_json canonical_json(const DiagnosticReport& r);

std::string render(const DiagnosticReport& r, ReportFormat format);

/// Writes report.json, report.md and per_query.csv into `dir`.
void write_report_files(const DiagnosticReport& r, const std::filesystem::path& dir);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace ragdx
