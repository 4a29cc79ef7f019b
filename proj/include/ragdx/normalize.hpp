#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ragdx {

struct GeneralCleanup {
    bool lowercase = true;
    bool collapse_whitespace = true;
    bool strip_punctuation = true;

    bool operator==(const GeneralCleanup&) const = default;
};

struct AgePattern {
    std::string pattern;    ///< ECMAScript regex, matched case-insensitively
    std::string canonical;  ///< replacement, may use $1..$9

    bool operator==(const AgePattern&) const = default;
};

/// Text normalization rules. Construct through make_rules / load_rules /
/// default_rules so the invariants (no rewrite cycles, compiled patterns)
/// hold; the compiled regexes are cached alongside the source strings.
class NormalizationRules {
public:
    NormalizationRules() = default;

    const std::map<std::string, std::string>& abbreviations() const noexcept { return abbreviations_; }
    const std::vector<AgePattern>& age_patterns() const noexcept { return age_patterns_; }
    const std::map<std::string, std::string>& gender_synonyms() const noexcept { return gender_synonyms_; }
    const GeneralCleanup& general() const noexcept { return general_; }

    bool operator==(const NormalizationRules& o) const {
        return abbreviations_ == o.abbreviations_ && age_patterns_ == o.age_patterns_ &&
               gender_synonyms_ == o.gender_synonyms_ && general_ == o.general_;
    }

    nlohmann::ordered_json to_json() const;

private:
    friend NormalizationRules make_rules(const std::map<std::string, std::string>&, std::vector<AgePattern>,
                                         const std::map<std::string, std::string>&, GeneralCleanup);
    friend std::string normalize_text(std::string_view, const NormalizationRules&);

    std::map<std::string, std::string> abbreviations_;    ///< folded key -> cleaned expansion
    std::vector<AgePattern> age_patterns_;
    std::vector<std::regex> compiled_;
    std::map<std::string, std::string> gender_synonyms_;  ///< folded variant -> cleaned canonical
    GeneralCleanup general_;
};

/// Validates and builds a rule set. Throws ConfigError on duplicate keys
/// after case folding, abbreviation cycles, expansions containing another
/// abbreviation, gender canonicals that are themselves remapped, or patterns
/// that fail to compile.
NormalizationRules make_rules(const std::map<std::string, std::string>& abbreviations,
                              std::vector<AgePattern> age_patterns,
                              const std::map<std::string, std::string>& gender_synonyms,
                              GeneralCleanup general = {});

/// Shipped clinical defaults: common abbreviations, age-threshold patterns
/// canonicalized to "age >= N years" / "age < N years", gender pairs.
const NormalizationRules& default_rules();

/// Parses {abbreviations, age_patterns, gender_synonyms, general}. Missing
/// sections are empty; missing general flags default to true.
NormalizationRules rules_from_json(const nlohmann::json& j);

/// Loads a rules file; returns default_rules() when `path` is empty.
NormalizationRules load_rules(const std::optional<std::filesystem::path>& path);

/// Identity rules: no maps, every cleanup flag off.
NormalizationRules identity_rules();

/// Case-fold, whitespace collapse and punctuation strip only.
std::string general_cleanup(std::string_view text, const GeneralCleanup& flags);

/// general cleanup -> abbreviation expansion -> age canonicalization ->
/// gender unification. Pure, deterministic and idempotent.
std::string normalize_text(std::string_view text, const NormalizationRules& rules);

}  // namespace ragdx
