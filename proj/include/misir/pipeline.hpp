#pragma once

#include <filesystem>
#include <string>

#include "misir/config.hpp"
#include "misir/eval.hpp"
#include "misir/fusion.hpp"
#include "misir/retrieval.hpp"

namespace misir {

// The builtin composition graph extended with the config's fusions, aliases
// and run files.
ModelGraph build_model_graph(const PipelineConfig& config);

// "standard" or "tuned"; tuned params come from the config or, failing
// that, the file written by cmd_tune.
Bm25Params resolve_bm25_params(const PipelineConfig& config, const std::string& choice);

// Ingests the corpus, persists the store, builds and persists the index.
// Prints the ingestion report to stdout.
void cmd_index(const PipelineConfig& config);

// Retrieves every topic and writes the bm25 (or bm25_tuned) run file.
// depth = 0 uses the configured search depth.
void cmd_search(const PipelineConfig& config, const std::string& params_choice,
                std::size_t depth);

// Grid-searches BM25 parameters by known-item MRR over the silver topics,
// writes the tuned-params file and prints the winner.
TuneResult cmd_tune(const PipelineConfig& config);

// dimension "support": one run per configured evidence model.
// dimension "credibility": the classifier run plus, when a site list is
// configured, the boosted variant.
void cmd_rerank(const PipelineConfig& config, const std::string& dimension);

// Composes one of run1..run7 (or any model id in the graph) and writes its
// run file.
void cmd_fuse(const PipelineConfig& config, const std::string& preset);

// Evaluates a run file against the configured qrels; prints the summary TSV
// and writes the report files.
CompatibilityReport cmd_eval(const PipelineConfig& config,
                             const std::filesystem::path& run_path);

}  // namespace misir
