#include "ragdx/normalize.hpp"

#include <array>
#include <fstream>
#include <functional>
#include <set>

#include "defaults.hpp"
#include "ragdx/errors.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

namespace {

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool is_stripped_ascii_punct(unsigned char c) {
    if (c >= 0x80 || text::is_comparator_byte(c)) return false;
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

// UTF-8 punctuation commonly pasted from documents: quotes, dashes, bullet, ellipsis.
constexpr std::array<std::string_view, 10> kUnicodePunct = {
    "\u2018", "\u2019", "\u201c", "\u201d", "\u2013", "\u2014", "\u2022", "\u2026", "\u00b7", "\u00a0",
};

/// Rewrites every maximal word run for which `lookup` yields a replacement.
std::string replace_word_runs(std::string_view s,
                              const std::function<const std::string*(const std::string&)>& lookup) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (!text::is_word_byte(static_cast<unsigned char>(s[i]))) {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && text::is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
        const auto word = s.substr(i, j - i);
        if (const auto* repl = lookup(text::fold_case(word))) {
            out += *repl;
        } else {
            out.append(word);
        }
        i = j;
    }
    return out;
}

std::vector<std::string> folded_word_runs(std::string_view s) {
    std::vector<std::string> runs;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!text::is_word_byte(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && text::is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
        runs.push_back(text::fold_case(s.substr(i, j - i)));
        i = j;
    }
    return runs;
}

bool is_single_word(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!text::is_word_byte(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

/// Age-threshold templates may contain capture references; strip them so
/// only the literal words are checked against the abbreviation keys.
std::string without_captures(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '$' && i + 1 < s.size() && (is_ascii_digit(s[i + 1]) || s[i + 1] == '&')) {
            ++i;
            out.push_back(' ');
            continue;
        }
        out.push_back(s[i]);
    }
    return out;
}

constexpr int kMaxAgeRounds = 16;

}  // namespace

std::string general_cleanup(std::string_view s, const GeneralCleanup& flags) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        const auto uc = static_cast<unsigned char>(c);
        if (flags.strip_punctuation) {
            if (uc >= 0x80) {
                bool matched = false;
                for (auto p : kUnicodePunct) {
                    if (s.substr(i, p.size()) == p) {
                        out.push_back(' ');
                        i += p.size() - 1;
                        matched = true;
                        break;
                    }
                }
                if (matched) continue;
            } else if (is_stripped_ascii_punct(uc)) {
                const bool numeric_sep = (c == '.' || c == ',') && i > 0 && i + 1 < s.size() &&
                                         is_ascii_digit(s[i - 1]) && is_ascii_digit(s[i + 1]);
                if (!numeric_sep) {
                    out.push_back(' ');
                    continue;
                }
            }
        }
        out.push_back(flags.lowercase && c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    }
    if (!flags.collapse_whitespace) return out;

    std::string collapsed;
    collapsed.reserve(out.size());
    bool pending_space = false;
    for (char c : out) {
        if (text::is_space(static_cast<unsigned char>(c))) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) collapsed.push_back(' ');
        pending_space = false;
        collapsed.push_back(c);
    }
    return collapsed;
}

NormalizationRules make_rules(const std::map<std::string, std::string>& abbreviations,
                              std::vector<AgePattern> age_patterns,
                              const std::map<std::string, std::string>& gender_synonyms, GeneralCleanup general) {
    NormalizationRules rules;
    rules.general_ = general;

    for (const auto& [key, expansion] : abbreviations) {
        const auto folded = text::fold_case(text::trim(key));
        if (!is_single_word(folded)) {
            throw ConfigError("abbreviation key '" + key + "' must be a single word");
        }
        auto cleaned = general_cleanup(expansion, general);
        if (text::trim(cleaned).empty()) {
            throw ConfigError("abbreviation '" + key + "' has an empty expansion");
        }
        if (!rules.abbreviations_.emplace(folded, std::move(cleaned)).second) {
            throw ConfigError("abbreviation key '" + key + "' duplicates another key after case folding");
        }
    }

    // Rewrite graph: key -> abbreviation keys occurring in its expansion.
    std::map<std::string, std::vector<std::string>> edges;
    for (const auto& [key, expansion] : rules.abbreviations_) {
        for (auto& w : folded_word_runs(expansion)) {
            if (rules.abbreviations_.count(w)) edges[key].push_back(w);
        }
    }
    std::map<std::string, int> state;  // 0 unvisited, 1 on stack, 2 done
    std::vector<std::string> stack;
    std::function<void(const std::string&)> visit = [&](const std::string& node) {
        state[node] = 1;
        stack.push_back(node);
        for (const auto& next : edges[node]) {
            if (state[next] == 1) {
                std::string cycle;
                auto it = std::find(stack.begin(), stack.end(), next);
                for (; it != stack.end(); ++it) cycle += *it + " -> ";
                throw ConfigError("cyclic abbreviation map: " + cycle + next);
            }
            if (state[next] == 0) visit(next);
        }
        stack.pop_back();
        state[node] = 2;
    };
    for (const auto& [key, _] : rules.abbreviations_) {
        if (state[key] == 0) visit(key);
    }
    for (const auto& [key, targets] : edges) {
        if (!targets.empty()) {
            throw ConfigError("expansion of abbreviation '" + key + "' contains abbreviation '" + targets.front() +
                              "'; chained rewrites are not allowed");
        }
    }

    for (const auto& [variant, canonical] : gender_synonyms) {
        const auto folded = text::fold_case(text::trim(variant));
        if (!is_single_word(folded)) {
            throw ConfigError("gender synonym '" + variant + "' must be a single word");
        }
        auto cleaned = general_cleanup(canonical, general);
        if (text::trim(cleaned).empty()) {
            throw ConfigError("gender synonym '" + variant + "' has an empty canonical term");
        }
        if (!rules.gender_synonyms_.emplace(folded, std::move(cleaned)).second) {
            throw ConfigError("gender synonym '" + variant + "' duplicates another key after case folding");
        }
    }
    for (const auto& [variant, canonical] : rules.gender_synonyms_) {
        for (const auto& w : folded_word_runs(canonical)) {
            auto it = rules.gender_synonyms_.find(w);
            if (it != rules.gender_synonyms_.end() && text::fold_case(it->second) != w) {
                throw ConfigError("gender canonical '" + canonical + "' is itself remapped to '" + it->second + "'");
            }
            if (rules.abbreviations_.count(w)) {
                throw ConfigError("gender canonical '" + canonical + "' contains abbreviation '" + w + "'");
            }
        }
    }

    for (auto& p : age_patterns) {
        try {
            rules.compiled_.emplace_back(p.pattern, std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            throw ConfigError("invalid age pattern '" + p.pattern + "': " + e.what());
        }
        for (const auto& w : folded_word_runs(without_captures(p.canonical))) {
            if (rules.abbreviations_.count(w)) {
                throw ConfigError("age canonical form '" + p.canonical + "' contains abbreviation '" + w + "'");
            }
        }
    }
    rules.age_patterns_ = std::move(age_patterns);
    return rules;
}

NormalizationRules identity_rules() {
    return make_rules({}, {}, {}, GeneralCleanup{false, false, false});
}

nlohmann::ordered_json NormalizationRules::to_json() const {
    nlohmann::ordered_json j;
    j["abbreviations"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : abbreviations_) j["abbreviations"][k] = v;
    j["age_patterns"] = nlohmann::ordered_json::array();
    for (const auto& p : age_patterns_) {
        j["age_patterns"].push_back({{"pattern", p.pattern}, {"canonical", p.canonical}});
    }
    j["gender_synonyms"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : gender_synonyms_) j["gender_synonyms"][k] = v;
    j["general"] = {{"lowercase", general_.lowercase},
                    {"collapse_whitespace", general_.collapse_whitespace},
                    {"strip_punctuation", general_.strip_punctuation}};
    return j;
}

NormalizationRules rules_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("normalization rules must be a JSON object");
    auto string_map = [&](const char* field) {
        std::map<std::string, std::string> m;
        auto it = j.find(field);
        if (it == j.end() || it->is_null()) return m;
        if (!it->is_object()) throw ConfigError(std::string("rules field '") + field + "' must be an object");
        for (const auto& [k, v] : it->items()) {
            if (!v.is_string()) throw ConfigError(std::string("rules field '") + field + "' values must be strings");
            m.emplace(k, v.get<std::string>());
        }
        return m;
    };
    const auto abbreviations = string_map("abbreviations");
    const auto gender = string_map("gender_synonyms");

    std::vector<AgePattern> patterns;
    if (auto it = j.find("age_patterns"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ConfigError("rules field 'age_patterns' must be an array");
        for (const auto& p : *it) {
            if (!p.is_object() || !p.contains("pattern") || !p.contains("canonical") || !p["pattern"].is_string() ||
                !p["canonical"].is_string()) {
                throw ConfigError("each age pattern needs string fields 'pattern' and 'canonical'");
            }
            patterns.push_back({p["pattern"].get<std::string>(), p["canonical"].get<std::string>()});
        }
    }

    GeneralCleanup general;
    if (auto it = j.find("general"); it != j.end() && !it->is_null()) {
        if (!it->is_object()) throw ConfigError("rules field 'general' must be an object");
        auto flag = [&](const char* name, bool& dst) {
            if (auto f = it->find(name); f != it->end()) {
                if (!f->is_boolean()) throw ConfigError(std::string("general flag '") + name + "' must be a boolean");
                dst = f->get<bool>();
            }
        };
        flag("lowercase", general.lowercase);
        flag("collapse_whitespace", general.collapse_whitespace);
        flag("strip_punctuation", general.strip_punctuation);
    }
    return make_rules(abbreviations, std::move(patterns), gender, general);
}

NormalizationRules load_rules(const std::optional<std::filesystem::path>& path) {
    if (!path || path->empty()) return default_rules();
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot open rules file '" + path->string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed rules file '" + path->string() + "': " + e.what());
    }
    return rules_from_json(j);
}

const NormalizationRules& default_rules() {
    static const NormalizationRules rules = rules_from_json(nlohmann::json::parse(defaults::normalization_rules()));
    return rules;
}

std::string normalize_text(std::string_view input, const NormalizationRules& rules) {
    std::string s = general_cleanup(input, rules.general_);

    if (!rules.abbreviations_.empty()) {
        s = replace_word_runs(s, [&](const std::string& w) -> const std::string* {
            auto it = rules.abbreviations_.find(w);
            return it == rules.abbreviations_.end() ? nullptr : &it->second;
        });
    }

    // Iterate to a fixed point so a second normalization pass is a no-op.
    for (int round = 0; round < kMaxAgeRounds && !rules.compiled_.empty(); ++round) {
        std::string before = s;
        for (std::size_t i = 0; i < rules.compiled_.size(); ++i) {
            s = std::regex_replace(s, rules.compiled_[i], rules.age_patterns_[i].canonical);
        }
        if (s == before) break;
    }

    if (!rules.gender_synonyms_.empty()) {
        s = replace_word_runs(s, [&](const std::string& w) -> const std::string* {
            auto it = rules.gender_synonyms_.find(w);
            return it == rules.gender_synonyms_.end() ? nullptr : &it->second;
        });
    }
    return s;
}

}  // namespace ragdx
