#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "misir/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"misir: multi-dimension health search ranking pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "pipeline config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--seed", seed, "override the master seed")->each([&](const std::string&) {
        seed_set = true;
    });

    CLI::App* index = app.add_subcommand("index", "ingest the corpus and build the index");

    CLI::App* search = app.add_subcommand("search", "retrieve the topics into a run file");
    std::string params_choice = "standard";
    search->add_option("--params", params_choice, "BM25 parameter set")
        ->check(CLI::IsMember({"standard", "tuned"}));
    std::size_t depth = 0;
    search->add_option("--depth", depth, "retrieval depth (default from config)");

    CLI::App* tune = app.add_subcommand("tune", "grid-search BM25 params on silver topics");

    CLI::App* rerank = app.add_subcommand("rerank", "re-rank one quality dimension");
    std::string dimension;
    rerank->add_option("--dimension", dimension, "support|credibility")
        ->required()
        ->check(CLI::IsMember({"support", "credibility"}));

    CLI::App* fuse = app.add_subcommand("fuse", "compose a preset with reciprocal rank fusion");
    std::string preset;
    fuse->add_option("--preset", preset, "run1..run7 or any model id")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a run file against the qrels");
    std::string run_path;
    eval->add_option("run", run_path, "run file to evaluate")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        misir::PipelineConfig config = misir::load_config(config_path);
        if (seed_set) config.seed = seed;

        if (index->parsed()) {
            misir::cmd_index(config);
        } else if (search->parsed()) {
            misir::cmd_search(config, params_choice, depth);
        } else if (tune->parsed()) {
            misir::cmd_tune(config);
        } else if (rerank->parsed()) {
            misir::cmd_rerank(config, dimension);
        } else if (fuse->parsed()) {
            misir::cmd_fuse(config, preset);
        } else if (eval->parsed()) {
            misir::cmd_eval(config, run_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
