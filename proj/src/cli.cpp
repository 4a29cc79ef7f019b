#include "ragdx/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ragdx/cue.hpp"
#include "ragdx/dataset.hpp"
#include "ragdx/errors.hpp"
#include "ragdx/harness.hpp"
#include "ragdx/judge.hpp"
#include "ragdx/normalize.hpp"
#include "ragdx/relevance.hpp"
#include "ragdx/retrieval_metrics.hpp"
#include "ragdx/text.hpp"

#ifndef RAGDX_VERSION
#define RAGDX_VERSION "0.0.0"
#endif

namespace ragdx {

namespace fs = std::filesystem;

namespace {

std::string file_sha256(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return text::sha256_hex(ss.str());
}

struct JudgedScores {
    std::map<std::string, double> adherence;
    std::map<std::string, double> context_relevancy;  ///< per-query mean
    std::optional<double> mean_context_relevancy;
    std::size_t empty_answers = 0;
};

JudgedScores run_judges(const EvalSet& set, JudgeClient& judge, std::vector<GenerationScores>& gen) {
    enum class Slot { answer, adherence, context };
    struct Target {
        std::size_t record;
        Slot slot;
    };
    std::vector<JudgeRequest> requests;
    std::vector<Target> targets;
    JudgedScores out;
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        const auto& r = set.records[i];
        std::vector<std::string> ctx;
        for (const auto& c : r.contexts) {
            ctx.push_back(c.text);
            requests.push_back(JudgeClient::context_relevancy_request(r.question, c.text));
            targets.push_back({i, Slot::context});
        }
        if (text::trim(r.answer).empty()) {
            ++out.empty_answers;
            continue;
        }
        requests.push_back(JudgeClient::answer_relevancy_request(r.question, r.answer));
        targets.push_back({i, Slot::answer});
        if (!ctx.empty()) {
            requests.push_back(JudgeClient::context_adherence_request(r.answer, ctx));
            targets.push_back({i, Slot::adherence});
        }
    }
    const auto scores = judge.judge_many(requests);

    std::vector<double> ctx_sum(set.records.size(), 0.0);
    std::vector<std::size_t> ctx_n(set.records.size(), 0);
    double all_sum = 0.0;
    std::size_t all_n = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto i = targets[t].record;
        const double v = scores[t].value;
        switch (targets[t].slot) {
            case Slot::answer:
                gen[i].answer_relevancy = v;
                break;
            case Slot::adherence:
                gen[i].context_adherence = v;
                break;
            case Slot::context:
                ctx_sum[i] += v;
                ++ctx_n[i];
                all_sum += v;
                ++all_n;
                break;
        }
    }
    for (std::size_t i = 0; i < set.records.size(); ++i) {
        const auto& id = set.records[i].query_id;
        // An empty answer or an empty context list claims nothing from the evidence.
        out.adherence[id] = gen[i].context_adherence.value_or(0.0);
        if (ctx_n[i]) out.context_relevancy[id] = ctx_sum[i] / static_cast<double>(ctx_n[i]);
    }
    if (all_n) out.mean_context_relevancy = all_sum / static_cast<double>(all_n);
    return out;
}

DiagnosticReport evaluate(const RunConfig& cfg, std::ostream& err) {
    const auto started = utc_timestamp();
    cfg.validate();
    if (cfg.dataset.empty()) throw ConfigError("no dataset given");

    auto set = load_eval_set(cfg.dataset);
    const auto validation = validate_eval_set(set);
    for (const auto& w : validation.warnings()) {
        err << "warning: " << w.query_id << (w.line ? " (line " + std::to_string(w.line) + ")" : std::string{})
            << ": " << w.message << "\n";
    }

    const auto rules = load_rules(cfg.normalization_rules);
    const auto ledger_rules = load_report_rules(cfg.report_rules);
    auto embedder = make_embedder(cfg.embedding, cfg.offline);

    RunMetadata meta;
    meta.annotations = cfg.annotations;
    if (!embedder) {
        meta.annotations.push_back(
            "no embedder configured: relevance uses substring and token overlap only; semantic similarity omitted");
    }

    const auto hits = build_hit_matrix(set, cfg.relevance, rules, embedder.get(), {cfg.parallelism});
    auto retrieval = retrieval_report(hits, cfg.parallelism);
    if (cfg.metrics.text_overlap_redundancy) retrieval.pairwise_text_overlap = pairwise_text_overlap(set, rules);

    auto gen = score_generation(set, rules, embedder.get(), {cfg.accuracy, cfg.parallelism});

    std::optional<CueReport> cue;
    std::map<std::string, double> ctx_relevancy;
    if (cfg.metrics.judged) {
        auto jc = *cfg.judge;
        jc.offline = jc.offline || cfg.offline;
        jc.adherence_threshold = cfg.adherence_threshold;
        JudgeClient judge(std::move(jc));
        auto judged = run_judges(set, judge, gen);
        retrieval.mean_context_relevancy = judged.mean_context_relevancy;
        ctx_relevancy = std::move(judged.context_relevancy);
        if (judged.empty_answers) {
            meta.annotations.push_back(std::to_string(judged.empty_answers) +
                                       " quer(ies) with an empty answer scored adherence 0");
        }
        cue = cue_report(hits, gen, judged.adherence, cfg.adherence_threshold);
    } else {
        meta.annotations.push_back("judged metrics disabled: context utilization quadrants omitted");
    }

    meta.dataset_path = cfg.dataset.string();
    meta.dataset_sha256 = file_sha256(cfg.dataset);
    meta.tool_version = RAGDX_VERSION;
    meta.config = to_json(cfg);
    meta.run_id = text::sha256_hex(meta.config.dump() + '\0' + meta.dataset_sha256).substr(0, 16);
    meta.started_at = started;

    auto report = build_report(hits, retrieval, gen, cue, std::move(meta), ledger_rules, ctx_relevancy);
    report.metadata.finished_at = utc_timestamp();
    return report;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const CacheMissError& e) {
        err << "error: " << e.what() << "\n";
        return exit_provider;
    } catch (const ProviderError& e) {
        err << "error: " << e.what() << "\n";
        return exit_provider;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid;
    }
}

}  // namespace

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err, EvaluateOutcome* outcome) {
    return guarded(err, [&] {
        auto report = evaluate(cfg, err);
        const auto dir = cfg.output_dir / report.metadata.run_id;
        write_report_files(report, dir);
        out << "wrote " << (dir / "report.json").string() << "\n";
        for (const auto& row : report.ledger) {
            out << "  [" << to_string(row.severity) << "] " << row.label << ": " << row.display << "\n";
        }
        if (outcome) *outcome = {std::move(report), dir};
        return static_cast<int>(exit_ok);
    });
}

int cmd_retrieve(const RetrieveOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        opts.fusion.validate();
        opts.chunking.validate();
        const auto docs = load_documents(opts.corpus);
        const auto corpus = chunk_documents(docs, opts.chunking);
        for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";
        const auto queries = load_queries(opts.queries);

        auto embedder = make_embedder(opts.embedding, opts.offline);
        if (opts.fusion.alpha > 0.0 && !embedder) {
            throw ConfigError("alpha > 0 needs an embedding backend (--embedding-backend hashing|http)");
        }
        std::optional<DenseIndex> index;
        if (opts.fusion.alpha > 0.0) index.emplace(corpus, *embedder);

        EvalSet set;
        set.source_path = opts.output.string();
        for (const auto& q : queries) {
            auto res = retrieve(q.question, corpus, opts.fusion, embedder.get(), index ? &*index : nullptr,
                                opts.parallelism);
            for (const auto& w : res.warnings) err << "warning: " << q.query_id << ": " << w << "\n";
            EvalRecord rec = q;
            rec.answer.clear();
            rec.contexts = std::move(res.contexts);
            set.records.push_back(std::move(rec));
        }
        refresh_k(set);
        if (!opts.output.parent_path().empty()) fs::create_directories(opts.output.parent_path());
        save_eval_set(set, opts.output);
        out << "wrote " << set.records.size() << " record(s) to " << opts.output.string() << "\n";
        return static_cast<int>(exit_ok);
    });
}

int cmd_validate(const fs::path& dataset, bool generation_run, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        try {
            const auto set = load_eval_set(dataset);
            const auto report = validate_eval_set(set, {generation_run});
            out << report.to_text();
            return report.valid() ? static_cast<int>(exit_ok) : static_cast<int>(exit_invalid);
        } catch (const DatasetError& e) {
            out << e.what() << "\n";
            return static_cast<int>(exit_invalid);
        }
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"RAG diagnostic evaluation toolkit", "ragdx"};
    app.set_version_flag("--version", std::string(RAGDX_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output_dir;
    bool offline = false;
    std::optional<int> parallelism;
    app.add_option("--config", config_path, "RunConfig JSON file")->check(CLI::ExistingFile);
    app.add_option("--output-dir", output_dir, "Directory for report files");
    app.add_flag("--offline", offline, "Serve provider calls from cache only");
    app.add_option("--parallelism", parallelism, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    auto* eval = app.add_subcommand("evaluate", "Score an eval set and write the diagnostic report");
    std::optional<std::string> dataset;
    std::optional<double> token_overlap_min, semantic_min, adherence;
    std::optional<std::string> embedding_backend;
    bool judged = false;
    eval->add_option("dataset", dataset, "JSONL eval set (overrides the config)");
    eval->add_option("--token-overlap-min", token_overlap_min, "Token-overlap relevance threshold");
    eval->add_option("--semantic-min", semantic_min, "Sentence-cosine relevance threshold");
    eval->add_option("--adherence-threshold", adherence, "Context adherence threshold for CUE");
    eval->add_option("--embedding-backend", embedding_backend, "none | hashing | http");
    eval->add_flag("--judged", judged, "Enable judged metrics and CUE");

    auto* retr = app.add_subcommand("retrieve", "Run the hybrid retriever over a corpus");
    std::string corpus, queries, retrieve_out = "retrieved.jsonl";
    std::optional<double> alpha;
    std::optional<std::size_t> top_k, chunk_size, overlap;
    std::optional<int> rrf_k;
    std::optional<std::string> retr_backend;
    retr->add_option("--corpus", corpus, "Directory of text files or JSONL {doc_id, text}")->required();
    retr->add_option("--queries", queries, "JSONL {query_id, question, ground_truth?}")->required();
    retr->add_option("--out", retrieve_out, "Output JSONL eval set");
    retr->add_option("--alpha", alpha, "Dense weight in [0, 1]");
    retr->add_option("--top-k", top_k, "Contexts per query");
    retr->add_option("--chunk-size", chunk_size, "Chunk length in tokens");
    retr->add_option("--overlap", overlap, "Tokens shared by consecutive chunks");
    retr->add_option("--rrf-k", rrf_k, "Reciprocal rank fusion constant");
    retr->add_option("--embedding-backend", retr_backend, "none | hashing | http");

    auto* val = app.add_subcommand("validate", "Check an eval set for schema and consistency errors");
    std::string validate_path;
    bool retrieval_only = false;
    val->add_option("dataset", validate_path, "JSONL eval set")->required();
    val->add_flag("--retrieval-only", retrieval_only, "Do not warn about empty answers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? static_cast<int>(exit_ok) : static_cast<int>(exit_invalid);
    }

    auto backend_from = [](const std::string& s) {
        if (s == "none") return EmbeddingBackend::none;
        if (s == "hashing") return EmbeddingBackend::hashing;
        if (s == "http") return EmbeddingBackend::http;
        throw ConfigError("--embedding-backend must be none, hashing or http");
    };

    return guarded(err, [&] {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (output_dir) cfg.output_dir = *output_dir;
        if (offline) cfg.offline = true;
        if (parallelism) cfg.parallelism = *parallelism;

        if (*eval) {
            if (dataset) cfg.dataset = *dataset;
            if (token_overlap_min) cfg.relevance.token_overlap_min = *token_overlap_min;
            if (semantic_min) cfg.relevance.semantic_min = *semantic_min;
            if (adherence) cfg.adherence_threshold = *adherence;
            if (embedding_backend) cfg.embedding.backend = backend_from(*embedding_backend);
            if (judged) cfg.metrics.judged = true;
            return cmd_evaluate(cfg, out, err);
        }
        if (*retr) {
            RetrieveOptions o;
            o.corpus = corpus;
            o.queries = queries;
            o.output = retrieve_out;
            o.chunking = cfg.chunking;
            o.fusion = cfg.fusion;
            o.embedding = cfg.embedding;
            o.offline = cfg.offline;
            o.parallelism = cfg.parallelism;
            if (alpha) o.fusion.alpha = *alpha;
            if (top_k) {
                o.fusion.top_k = *top_k;
                o.fusion.candidate_pool = std::max(o.fusion.candidate_pool, *top_k);
            }
            if (chunk_size) o.chunking.chunk_size = *chunk_size;
            if (overlap) o.chunking.overlap = *overlap;
            if (rrf_k) o.fusion.rrf_k = *rrf_k;
            if (retr_backend) o.embedding.backend = backend_from(*retr_backend);
            return cmd_retrieve(o, out, err);
        }
        return cmd_validate(validate_path, !retrieval_only, out, err);
    });
}

}  // namespace ragdx
