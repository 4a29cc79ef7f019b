#include "ragdx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ragdx/errors.hpp"
#include "ragdx/text.hpp"

namespace ragdx {

using json = nlohmann::json;

std::string_view to_string(TaskType t) noexcept {
    switch (t) {
        case TaskType::mcq:
            return "mcq";
        case TaskType::short_answer:
            return "short_answer";
        case TaskType::extraction:
            return "extraction";
    }
    return "short_answer";
}

TaskType task_type_from_string(std::string_view name) {
    if (name == "mcq") return TaskType::mcq;
    if (name == "short_answer") return TaskType::short_answer;
    if (name == "extraction") return TaskType::extraction;
    throw DatasetError("unknown task_type '" + std::string(name) + "' (expected mcq, short_answer, extraction)");
}

const EvalRecord* EvalSet::find(std::string_view query_id) const {
    for (const auto& r : records) {
        if (r.query_id == query_id) return &r;
    }
    return nullptr;
}

void refresh_k(EvalSet& set) {
    set.k = 0;
    for (const auto& r : set.records) set.k = std::max(set.k, r.contexts.size());
}

std::size_t ValidationReport::error_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const auto& f) {
        return f.severity == ValidationFinding::Severity::error;
    }));
}

std::size_t ValidationReport::warning_count() const noexcept { return findings.size() - error_count(); }

std::vector<ValidationFinding> ValidationReport::errors() const {
    std::vector<ValidationFinding> out;
    std::copy_if(findings.begin(), findings.end(), std::back_inserter(out),
                 [](const auto& f) { return f.severity == ValidationFinding::Severity::error; });
    return out;
}

std::vector<ValidationFinding> ValidationReport::warnings() const {
    std::vector<ValidationFinding> out;
    std::copy_if(findings.begin(), findings.end(), std::back_inserter(out),
                 [](const auto& f) { return f.severity == ValidationFinding::Severity::warning; });
    return out;
}

std::string ValidationReport::to_text() const {
    std::ostringstream os;
    for (const auto& f : findings) {
        os << (f.severity == ValidationFinding::Severity::error ? "error" : "warning");
        if (f.line != 0) os << " line " << f.line;
        if (!f.query_id.empty()) os << " [" << f.query_id << "]";
        os << ": " << f.message << '\n';
    }
    return os.str();
}

namespace {

std::string describe(const EvalRecord& r) {
    std::string s = "record '" + r.query_id + "'";
    if (r.line != 0) s += " (line " + std::to_string(r.line) + ")";
    return s;
}

void check_ranks(const EvalRecord& r, std::vector<ValidationFinding>& out) {
    auto err = [&](std::string msg) {
        out.push_back({ValidationFinding::Severity::error, r.query_id, r.line, describe(r) + ": " + std::move(msg)});
    };
    std::vector<int> ranks;
    ranks.reserve(r.contexts.size());
    for (const auto& c : r.contexts) ranks.push_back(c.rank);
    std::vector<int> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i] == sorted[i - 1]) {
            err("duplicate context rank " + std::to_string(sorted[i]));
            return;
        }
    }
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const int expected = static_cast<int>(i) + 1;
        if (sorted[i] < 1) {
            err("context rank " + std::to_string(sorted[i]) + " is below 1");
            return;
        }
        if (sorted[i] != expected) {
            err("context ranks have a gap at rank " + std::to_string(expected));
            return;
        }
    }
    if (ranks != sorted) {
        err("contexts are not stored in rank order");
    }
}

}  // namespace

ValidationReport validate_eval_set(const EvalSet& set, const ValidationOptions& opts) {
    using Sev = ValidationFinding::Severity;
    ValidationReport report;
    auto& out = report.findings;
    if (set.records.empty()) {
        out.push_back({Sev::error, "", 0, "evaluation set contains no records"});
        return report;
    }
    std::size_t k = 0;
    for (const auto& r : set.records) k = std::max(k, r.contexts.size());

    std::unordered_map<std::string, const EvalRecord*> seen;
    for (const auto& r : set.records) {
        if (r.query_id.empty()) {
            out.push_back({Sev::error, "", r.line, describe(r) + ": empty query_id"});
        } else if (auto [it, inserted] = seen.emplace(r.query_id, &r); !inserted) {
            std::string msg = "duplicate query_id '" + r.query_id + "'";
            if (it->second->line != 0 || r.line != 0) {
                msg += " on lines " + std::to_string(it->second->line) + " and " + std::to_string(r.line);
            }
            out.push_back({Sev::error, r.query_id, r.line, std::move(msg)});
        }
        if (r.ground_truth.empty()) {
            out.push_back({Sev::error, r.query_id, r.line, describe(r) + ": empty ground_truth"});
        }
        check_ranks(r, out);
        for (const auto& c : r.contexts) {
            if (c.text.empty()) {
                out.push_back({Sev::error, r.query_id, r.line,
                               describe(r) + ": context at rank " + std::to_string(c.rank) + " has empty text"});
            }
            if (c.retriever_score && !std::isfinite(*c.retriever_score)) {
                out.push_back({Sev::error, r.query_id, r.line,
                               describe(r) + ": context at rank " + std::to_string(c.rank) +
                                   " has a non-finite score"});
            }
        }
        if (opts.generation_run && r.answer.empty()) {
            out.push_back({Sev::warning, r.query_id, r.line, "empty answer"});
        }
        if (r.contexts.size() < k) {
            out.push_back({Sev::warning, r.query_id, r.line,
                           "short context list (" + std::to_string(r.contexts.size()) + " < k=" +
                               std::to_string(k) + ")"});
        }
    }
    if (set.k != k) {
        out.push_back({Sev::error, "", 0,
                       "set k=" + std::to_string(set.k) + " does not equal max context count " + std::to_string(k)});
    }
    return report;
}

nlohmann::ordered_json record_to_json(const EvalRecord& r) {
    nlohmann::ordered_json j;
    j["query_id"] = r.query_id;
    j["question"] = r.question;
    j["ground_truth"] = r.ground_truth;
    j["answer"] = r.answer;
    auto ctxs = nlohmann::ordered_json::array();
    for (const auto& c : r.contexts) {
        nlohmann::ordered_json cj;
        cj["rank"] = c.rank;
        cj["text"] = c.text;
        if (c.retriever_score) cj["score"] = *c.retriever_score;
        ctxs.push_back(std::move(cj));
    }
    j["contexts"] = std::move(ctxs);
    j["task_type"] = std::string(to_string(r.task_type));
    if (!r.metadata.empty()) {
        nlohmann::ordered_json meta = nlohmann::ordered_json::object();
        for (const auto& [key, value] : r.metadata) meta[key] = value;
        j["metadata"] = std::move(meta);
    }
    return j;
}

namespace {

std::string at_line(std::size_t line) { return line ? "line " + std::to_string(line) + ": " : std::string{}; }

std::string require_string(const json& j, const char* field, std::size_t line) {
    auto it = j.find(field);
    if (it == j.end()) {
        throw DatasetError(at_line(line) + "missing required field '" + field + "'", {line});
    }
    if (!it->is_string()) {
        throw DatasetError(at_line(line) + "field '" + field + "' must be a string", {line});
    }
    return it->get<std::string>();
}

}  // namespace

EvalRecord record_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) {
        throw DatasetError(at_line(line) + "record must be a JSON object", {line});
    }
    EvalRecord r;
    r.line = line;
    r.query_id = require_string(j, "query_id", line);
    r.question = require_string(j, "question", line);
    r.ground_truth = require_string(j, "ground_truth", line);
    r.answer = require_string(j, "answer", line);

    auto ctx = j.find("contexts");
    if (ctx == j.end()) {
        throw DatasetError(at_line(line) + "missing required field 'contexts'", {line});
    }
    if (!ctx->is_array()) {
        throw DatasetError(at_line(line) + "field 'contexts' must be an array", {line});
    }
    for (const auto& c : *ctx) {
        if (!c.is_object()) {
            throw DatasetError(at_line(line) + "each context must be an object", {line});
        }
        RetrievedContext rc;
        auto rank = c.find("rank");
        if (rank == c.end() || !rank->is_number_integer()) {
            throw DatasetError(at_line(line) + "context 'rank' must be an integer", {line});
        }
        rc.rank = rank->get<int>();
        rc.text = require_string(c, "text", line);
        if (auto s = c.find("score"); s != c.end() && !s->is_null()) {
            if (!s->is_number()) {
                throw DatasetError(at_line(line) + "context 'score' must be a number", {line});
            }
            rc.retriever_score = s->get<double>();
        }
        r.contexts.push_back(std::move(rc));
    }
    std::stable_sort(r.contexts.begin(), r.contexts.end(),
                     [](const auto& a, const auto& b) { return a.rank < b.rank; });

    if (auto t = j.find("task_type"); t != j.end() && !t->is_null()) {
        if (!t->is_string()) {
            throw DatasetError(at_line(line) + "field 'task_type' must be a string", {line});
        }
        try {
            r.task_type = task_type_from_string(t->get<std::string>());
        } catch (const DatasetError& e) {
            throw DatasetError(at_line(line) + e.what(), {line});
        }
    }
    if (auto m = j.find("metadata"); m != j.end() && !m->is_null()) {
        if (!m->is_object()) {
            throw DatasetError(at_line(line) + "field 'metadata' must be an object", {line});
        }
        for (const auto& [key, value] : m->items()) {
            if (!value.is_string()) {
                throw DatasetError(at_line(line) + "metadata value for '" + key + "' must be a string", {line});
            }
            r.metadata.emplace(key, value.get<std::string>());
        }
    }
    return r;
}

EvalSet parse_eval_set(std::istream& in, std::string source_name) {
    EvalSet set;
    set.source_path = std::move(source_name);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (text::trim(raw).empty()) continue;
        json j;
        try {
            j = json::parse(raw);
        } catch (const json::parse_error& e) {
            throw DatasetError(set.source_path + ": line " + std::to_string(line) + ": malformed JSON: " + e.what(),
                               {line});
        }
        try {
            set.records.push_back(record_from_json(j, line));
        } catch (const DatasetError& e) {
            throw DatasetError(set.source_path + ": " + e.what(), e.lines());
        }
    }
    if (in.bad()) {
        throw DatasetError(set.source_path + ": read failure");
    }
    refresh_k(set);

    const auto report = validate_eval_set(set, ValidationOptions{.generation_run = false});
    if (!report.valid()) {
        std::string msg = set.source_path + ": invalid evaluation set";
        std::vector<std::size_t> lines;
        for (const auto& f : report.errors()) {
            msg += "\n  " + f.message;
            if (f.line) lines.push_back(f.line);
        }
        // duplicate ids cite both lines
        for (const auto& f : report.errors()) {
            if (f.message.rfind("duplicate query_id", 0) == 0) {
                if (const auto* first = set.find(f.query_id); first && first->line) lines.push_back(first->line);
            }
        }
        std::sort(lines.begin(), lines.end());
        lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
        throw DatasetError(msg, std::move(lines));
    }
    return set;
}

EvalSet load_eval_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DatasetError("cannot open evaluation set '" + path.string() + "'");
    }
    return parse_eval_set(in, path.string());
}

void write_eval_set(const EvalSet& set, std::ostream& out) {
    for (const auto& r : set.records) {
        out << record_to_json(r).dump() << '\n';
    }
}

void save_eval_set(const EvalSet& set, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write evaluation set '" + path.string() + "'");
    }
    write_eval_set(set, out);
}

}  // namespace ragdx
