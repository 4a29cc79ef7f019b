#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ragdx/config.hpp"
#include "ragdx/report.hpp"

namespace ragdx {

/// Exit codes shared by every subcommand.
enum ExitCode : int { exit_ok = 0, exit_invalid = 1, exit_provider = 2 };

struct EvaluateOutcome {
    DiagnosticReport report;
    std::filesystem::path report_dir;
};

/// load -> validate -> normalize -> relevance -> judges -> metrics -> CUE ->
/// report. Writes report.json, report.md and per_query.csv under
/// output_dir/run_id. 0 on success, 1 on dataset or config errors, 2 on
/// provider failures and offline cache misses.
int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err, EvaluateOutcome* outcome = nullptr);

struct RetrieveOptions {
    std::filesystem::path corpus;
    std::filesystem::path queries;
    std::filesystem::path output;
    ChunkingConfig chunking;
    FusionConfig fusion;
    EmbeddingSettings embedding;
    bool offline = false;
    int parallelism = 0;
};

/// Runs the hybrid retriever for every query and writes a JSONL eval set
/// with contexts filled in and empty answers.
int cmd_retrieve(const RetrieveOptions& opts, std::ostream& out, std::ostream& err);

/// Prints the validation report; 0 iff there are no errors.
int cmd_validate(const std::filesystem::path& dataset, bool generation_run, std::ostream& out, std::ostream& err);

/// Command-line front end: `ragdx {evaluate|retrieve|validate} ...`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ragdx
