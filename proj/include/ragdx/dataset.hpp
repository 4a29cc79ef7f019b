#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ragdx {

enum class TaskType { mcq, short_answer, extraction };

std::string_view to_string(TaskType t) noexcept;
/// Throws DatasetError on an unknown name.
TaskType task_type_from_string(std::string_view name);

struct RetrievedContext {
    int rank = 0;
    std::string text;
    std::optional<double> retriever_score;

    bool operator==(const RetrievedContext&) const = default;
};

struct EvalRecord {
    std::string query_id;
    std::string question;
    std::string ground_truth;
    std::string answer;
    std::vector<RetrievedContext> contexts;  ///< sorted by rank, rank i at index i-1
    TaskType task_type = TaskType::short_answer;
    std::map<std::string, std::string> metadata;
    std::size_t line = 0;  ///< 1-based source line, 0 when built in memory

    /// Structural equality; the source line is bookkeeping and not compared.
    bool operator==(const EvalRecord& o) const {
        return query_id == o.query_id && question == o.question && ground_truth == o.ground_truth &&
               answer == o.answer && contexts == o.contexts && task_type == o.task_type &&
               metadata == o.metadata;
    }
};

/// Immutable after construction; safe to share across readers.
struct EvalSet {
    std::vector<EvalRecord> records;
    std::string source_path;
    std::size_t k = 0;  ///< max context count over records

    bool operator==(const EvalSet& o) const { return records == o.records && k == o.k; }

    const EvalRecord* find(std::string_view query_id) const;
};

/// Recomputes `k` from the records.
void refresh_k(EvalSet& set);

struct ValidationFinding {
    enum class Severity { warning, error };
    Severity severity = Severity::error;
    std::string query_id;
    std::size_t line = 0;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;

    bool valid() const noexcept { return error_count() == 0; }
    std::size_t error_count() const noexcept;
    std::size_t warning_count() const noexcept;
    std::vector<ValidationFinding> errors() const;
    std::vector<ValidationFinding> warnings() const;
    /// One finding per line: "error line 4 [q7]: duplicate query_id ..."
    std::string to_text() const;
};

struct ValidationOptions {
    /// When false (retrieval-only runs) empty answers are not reported.
    bool generation_run = true;
};

/// Never throws; every invariant breach is returned as an error finding.
ValidationReport validate_eval_set(const EvalSet& set, const ValidationOptions& opts = {});

/// Parses line-delimited JSON. Blank lines are skipped. Throws DatasetError
/// (with line numbers) on malformed JSON, schema violations, or any finding
/// validate_eval_set would classify as an error.
EvalSet parse_eval_set(std::istream& in, std::string source_name);
EvalSet load_eval_set(const std::filesystem::path& path);

nlohmann::ordered_json record_to_json(const EvalRecord& r);
/// Schema check of one decoded JSON object. `line` is only used in messages.
EvalRecord record_from_json(const nlohmann::json& j, std::size_t line = 0);

void write_eval_set(const EvalSet& set, std::ostream& out);
void save_eval_set(const EvalSet& set, const std::filesystem::path& path);

}  // namespace ragdx
