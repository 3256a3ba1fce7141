#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "misir/corpus.hpp"
#include "misir/credibility.hpp"
#include "misir/forest.hpp"
#include "misir/retrieval.hpp"

namespace misir {

/// Declarative pipeline configuration, loaded from a single JSON file.
/// Relative paths are resolved against the config file's directory;
/// command-line flags override config values, which override defaults.
struct PipelineConfig {
    std::filesystem::path config_dir;

    // corpus
    std::filesystem::path corpus_documents;
    CorpusFormat corpus_format = CorpusFormat::jsonl;
    std::filesystem::path topics_file;
    std::filesystem::path store_dir = "corpus_store";

    // retrieval
    std::filesystem::path index_dir = "index";
    Bm25Params bm25_standard{0.9, 0.4};
    std::optional<Bm25Params> bm25_tuned;
    std::filesystem::path tuned_params_file = "tuned_params.json";
    std::size_t search_depth = 10000;

    // tuning
    std::filesystem::path silver_topics_file;
    std::vector<double> grid_k1;  // empty -> default grid
    std::vector<double> grid_b;

    // model runs: where each model id's run file lives (file nodes of the
    // composition graph) and extra fusions/aliases from the config.
    std::filesystem::path output_dir = "runs";
    std::map<std::string, std::filesystem::path> model_files;
    std::map<std::string, std::vector<std::string>> model_fusions;
    std::map<std::string, std::string> model_aliases;

    // supportiveness
    std::map<std::string, std::filesystem::path> evidence_files;  // model name -> JSONL
    std::string supportiveness_input;  // model id of the run to re-rank
    std::string vote_pool_input;       // model id of the vote pool run ("" = input run)
    std::size_t vote_k = 10;
    std::string vote_tie_default = "dissuades";

    // credibility
    std::string credibility_input;  // model id of the run providing docs per topic
    std::filesystem::path credible_sites_file;
    std::filesystem::path forest_model_file;
    std::filesystem::path credibility_labels_csv;
    std::filesystem::path credibility_pages_file;  // JSONL corpus of labeled pages
    CorpusFormat credibility_pages_format = CorpusFormat::jsonl;
    ForestHyperparams forest_params;
    PageRankClient::Config pagerank;

    // fusion
    double rrf_k = 60.0;
    std::size_t fusion_depth = 1000;

    // evaluation
    std::filesystem::path qrels_file;
    double eval_p = 0.95;
    std::size_t eval_depth = 0;  // 0 -> default_eval_depth(p)
    std::filesystem::path report_dir = "reports";

    std::uint64_t seed = 42;

    // Path of a model's run file: explicit entry in model_files, else
    // output_dir/<id>.run for ids the pipeline itself produces.
    std::filesystem::path run_file_for(const std::string& model_id) const;
};

PipelineConfig load_config(const std::filesystem::path& path);

// Ids whose run files the pipeline writes itself (everything but the
// externally supplied usefulness rankings).
const std::vector<std::string>& producible_model_ids();

}  // namespace misir
