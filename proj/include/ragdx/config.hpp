#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragdx/embeddings.hpp"
#include "ragdx/generation_metrics.hpp"
#include "ragdx/harness.hpp"
#include "ragdx/judge.hpp"
#include "ragdx/relevance.hpp"

namespace ragdx {

enum class EmbeddingBackend { none, hashing, http };

std::string_view to_string(EmbeddingBackend b) noexcept;

struct EmbeddingSettings {
    EmbeddingBackend backend = EmbeddingBackend::none;
    EmbeddingProviderConfig provider;  ///< used by the http backend
    std::size_t hashing_dim = 256;
};

struct MetricGroups {
    bool judged = false;               ///< judge calls cost money; opt-in
    bool text_overlap_redundancy = true;
};

struct RunConfig {
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> normalization_rules;
    std::optional<std::filesystem::path> report_rules;
    std::filesystem::path output_dir = "ragdx-out";
    int parallelism = 0;
    bool offline = false;

    RelevanceThresholds relevance;
    double adherence_threshold = 0.7;
    AccuracyThresholds accuracy;
    MetricGroups metrics;

    EmbeddingSettings embedding;
    std::optional<JudgeConfig> judge;

    ChunkingConfig chunking;
    FusionConfig fusion;

    std::vector<std::string> annotations;

    /// Throws ConfigError on any inconsistent setting.
    void validate() const;
};

/// Parses a config object. Unknown keys are errors. Relative paths are
/// resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Snapshot of every setting that affects results (no secrets: API keys are
/// only ever read from the environment).
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Embedder selected by the config, or null for the none backend. The
/// offline flag of the run is applied to the http backend.
std::unique_ptr<Embedder> make_embedder(const EmbeddingSettings& s, bool offline);

}  // namespace ragdx
