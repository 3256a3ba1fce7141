#include "misir/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "misir/credibility.hpp"
#include "misir/run_io.hpp"
#include "misir/supportiveness.hpp"

namespace misir {

namespace {

using nlohmann::json;

void ensure_parent_dir(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

std::filesystem::path required_run_file(const PipelineConfig& config,
                                        const std::string& model_id) {
    std::filesystem::path path = config.run_file_for(model_id);
    if (path.empty()) {
        throw std::runtime_error("no run file configured for model " + model_id);
    }
    return path;
}

RankedRun compose_from_config(const PipelineConfig& config, const ModelGraph& graph,
                              const std::string& id) {
    return compose_model(id, graph, {}, [](const std::filesystem::path& p) { return load_run(p); },
                         RrfConfig{config.rrf_k}, config.fusion_depth);
}

CredibleSiteList load_sites_if_configured(const PipelineConfig& config) {
    if (config.credible_sites_file.empty()) return CredibleSiteList{};
    return CredibleSiteList::load(config.credible_sites_file);
}

RandomForest obtain_forest(const PipelineConfig& config) {
    std::filesystem::path model_path = config.forest_model_file;
    if (model_path.empty()) model_path = config.output_dir / "forest_model.json";
    if (std::filesystem::exists(model_path)) return RandomForest::load(model_path);

    if (config.credibility_labels_csv.empty() || config.credibility_pages_file.empty()) {
        throw std::runtime_error(
            "no forest model at " + model_path.string() +
            " and no credibility.training section to train one from");
    }

    const auto rows = load_credibility_csv(config.credibility_labels_csv);
    if (rows.empty()) throw std::runtime_error("credibility dataset is empty");

    // The labeled pages live in their own small corpus; features come from
    // the same extractors used for ranking.
    const std::filesystem::path pages_store = config.output_dir / "training_pages_store";
    std::filesystem::create_directories(config.output_dir);
    CorpusStore pages = CorpusStore::ingest(config.credibility_pages_file,
                                            config.credibility_pages_format, pages_store);
    std::map<std::string, const Document*> by_url;
    for (const Document& doc : pages.docs()) by_url[doc.url] = &doc;

    PageRankClient pagerank(config.pagerank);
    std::vector<std::string> domains;
    for (const CredibilityLabelRow& row : rows) {
        auto it = by_url.find(row.url);
        if (it == by_url.end()) {
            throw std::runtime_error("labeled url not found in training pages: " + row.url);
        }
        domains.push_back(it->second->domain);
    }
    auto ranks = pagerank.fetch_many(domains);

    std::vector<FeatureVector> features;
    std::vector<int> labels;
    features.reserve(rows.size());
    labels.reserve(rows.size());
    for (const CredibilityLabelRow& row : rows) {
        const Document& doc = *by_url.at(row.url);
        CredibilityFeatures f;
        f.smog = smog_index(doc.text);
        f.css_rule_count = count_css_rules(doc.html);
        const PageRankResult pr = ranks.at(doc.domain);
        f.pagerank = pr.rank;
        f.pagerank_missing = pr.missing;
        features.push_back(f.vector());
        labels.push_back(binarize_credibility_score(row.raw_score));
    }

    RandomForest forest =
        RandomForest::train(features, labels, config.forest_params, config.seed);
    ensure_parent_dir(model_path);
    forest.save(model_path);
    std::cerr << "trained credibility forest (" << config.forest_params.trees << " trees) -> "
              << model_path.string() << "\n";
    return forest;
}

}  // namespace

ModelGraph build_model_graph(const PipelineConfig& config) {
    ModelGraph graph = default_model_graph();
    for (const auto& [id, components] : config.model_fusions) {
        ModelNode node;
        node.kind = ModelNode::Kind::fuse;
        node.components = components;
        graph[id] = std::move(node);
    }
    for (const auto& [id, target] : config.model_aliases) {
        ModelNode node;
        node.kind = ModelNode::Kind::alias;
        node.target = target;
        graph[id] = std::move(node);
    }
    // Run files, including the pipeline's own outputs, are the leaves; an
    // explicitly configured file wins over any builtin composition.
    for (const std::string& id : producible_model_ids()) {
        if (graph.count(id) > 0) continue;
        ModelNode node;
        node.kind = ModelNode::Kind::file;
        node.file = config.run_file_for(id);
        graph[id] = std::move(node);
    }
    for (const auto& [id, file] : config.model_files) {
        ModelNode node;
        node.kind = ModelNode::Kind::file;
        node.file = file;
        graph[id] = std::move(node);
    }
    return graph;
}

Bm25Params resolve_bm25_params(const PipelineConfig& config, const std::string& choice) {
    if (choice == "standard") return config.bm25_standard;
    if (choice != "tuned") {
        throw std::invalid_argument("params choice must be standard|tuned, got '" + choice +
                                    "'");
    }
    if (config.bm25_tuned) return *config.bm25_tuned;
    std::ifstream in(config.tuned_params_file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("no tuned parameters: set bm25.tuned in the config or run "
                                 "`tune` first (missing " +
                                 config.tuned_params_file.string() + ")");
    }
    json tuned = json::parse(in);
    Bm25Params params{tuned.at("k1").get<double>(), tuned.at("b").get<double>()};
    validate_params(params);
    return params;
}

void cmd_index(const PipelineConfig& config) {
    if (config.corpus_documents.empty()) {
        throw std::runtime_error("config has no corpus.documents path");
    }
    CorpusStore store =
        CorpusStore::ingest(config.corpus_documents, config.corpus_format, config.store_dir);
    InvertedIndex index = InvertedIndex::build(store);
    index.save(config.index_dir);

    const IngestReport& report = store.report();
    std::cout << report.accepted << " accepted, " << report.rejected << " rejected\n";
    for (const auto& [reason, count] : report.reject_reasons) {
        std::cout << "  " << reason << ": " << count << "\n";
    }
    std::cerr << "indexed " << index.num_docs() << " documents to " << config.index_dir.string()
              << "\n";
}

void cmd_search(const PipelineConfig& config, const std::string& params_choice,
                std::size_t depth) {
    const Bm25Params params = resolve_bm25_params(config, params_choice);
    if (depth == 0) depth = config.search_depth;
    const std::string model_id = params_choice == "tuned" ? "bm25_tuned" : "bm25";

    InvertedIndex index = InvertedIndex::load(config.index_dir);
    std::vector<Topic> topics = load_topics(config.topics_file);
    RankedRun run = search_topics(index, params, topics, depth, model_id);

    const std::filesystem::path out = required_run_file(config, model_id);
    ensure_parent_dir(out);
    write_run(run, out);
    std::cerr << "wrote " << run.topics.size() << " topics to " << out.string() << "\n";
}

TuneResult cmd_tune(const PipelineConfig& config) {
    if (config.silver_topics_file.empty()) {
        throw std::runtime_error("config has no tuning.silver_topics path");
    }
    InvertedIndex index = InvertedIndex::load(config.index_dir);
    std::vector<SilverTopic> silver = load_silver_topics(config.silver_topics_file);

    std::vector<Bm25Params> grid;
    if (config.grid_k1.empty() && config.grid_b.empty()) {
        grid = default_grid();
    } else {
        if (config.grid_k1.empty() || config.grid_b.empty()) {
            throw std::runtime_error("tuning.grid must provide both k1 and b lists");
        }
        grid = make_grid(config.grid_k1, config.grid_b);
    }

    TuneResult result = tune_params(index, silver, grid, config.search_depth);

    ensure_parent_dir(config.tuned_params_file);
    {
        json out{{"k1", result.params.k1}, {"b", result.params.b}, {"mrr", result.mrr}};
        std::ofstream file(config.tuned_params_file, std::ios::binary);
        file << out.dump(2) << "\n";
    }
    char line[128];
    std::snprintf(line, sizeof(line), "k1=%g b=%g mrr=%.6f\n", result.params.k1,
                  result.params.b, result.mrr);
    std::cout << line;
    return result;
}

namespace {

void rerank_support(const PipelineConfig& config) {
    if (config.evidence_files.empty()) {
        throw std::runtime_error("config has no supportiveness.evidence files");
    }
    const ModelGraph graph = build_model_graph(config);
    const std::string input_id =
        config.supportiveness_input.empty() ? "bm25" : config.supportiveness_input;
    RankedRun input = compose_from_config(config, graph, input_id);

    RankedRun pool_storage;
    const RankedRun* pool = nullptr;
    if (!config.vote_pool_input.empty() && config.vote_pool_input != input_id) {
        pool_storage = compose_from_config(config, graph, config.vote_pool_input);
        pool = &pool_storage;
    }

    CorpusStore store = CorpusStore::open(config.store_dir);
    std::map<std::string, std::string> doc_domains;
    for (const Document& doc : store.docs()) doc_domains[doc.doc_id] = doc.domain;

    const CredibleSiteList sites = load_sites_if_configured(config);
    VoteConfig vote;
    vote.k = config.vote_k;
    vote.tie_default = config.vote_tie_default == "supports" ? DocLabel::supports
                                                             : DocLabel::dissuades;

    for (const auto& [name, evidence_path] : config.evidence_files) {
        const auto judgments = load_evidence(evidence_path);
        RankedRun out = build_supportiveness_run(judgments, input, pool, vote, sites.domains(),
                                                 doc_domains, "support-" + name);
        const std::filesystem::path out_path = required_run_file(config, "supp_" + name);
        ensure_parent_dir(out_path);
        write_run(out, out_path);
        std::cerr << "wrote " << out.topics.size() << " topics to " << out_path.string()
                  << "\n";
    }
}

void rerank_credibility(const PipelineConfig& config) {
    const ModelGraph graph = build_model_graph(config);
    const std::string input_id =
        config.credibility_input.empty() ? "bm25" : config.credibility_input;
    RankedRun input = compose_from_config(config, graph, input_id);

    CorpusStore store = CorpusStore::open(config.store_dir);
    RandomForest forest = obtain_forest(config);

    std::map<int, std::vector<std::string>> docs_per_topic;
    std::map<std::string, std::string> domain_by_doc;
    std::vector<std::string> domains;
    for (const auto& [topic_id, entries] : input.topics) {
        auto& docs = docs_per_topic[topic_id];
        docs.reserve(entries.size());
        for (const RunEntry& e : entries) {
            docs.push_back(e.doc_id);
            if (domain_by_doc.count(e.doc_id) > 0) continue;
            const Document& doc = store.at(e.doc_id);
            domain_by_doc[e.doc_id] = doc.domain;
            domains.push_back(doc.domain);
        }
    }

    PageRankClient pagerank(config.pagerank);
    auto ranks = pagerank.fetch_many(domains);

    std::map<std::string, CredibilityFeatures> features_by_doc;
    for (const auto& [doc_id, domain] : domain_by_doc) {
        const Document& doc = store.at(doc_id);
        CredibilityFeatures f;
        f.smog = smog_index(doc.text);
        f.css_rule_count = count_css_rules(doc.html);
        const PageRankResult pr = ranks.at(domain);
        f.pagerank = pr.rank;
        f.pagerank_missing = pr.missing;
        features_by_doc[doc_id] = f;
    }

    const CredibleSiteList sites = load_sites_if_configured(config);

    RankedRun forest_run =
        rank_credibility(docs_per_topic, features_by_doc, domain_by_doc, forest, sites,
                         CredibilityMode::classifier_only, "cred-forest");
    const std::filesystem::path forest_path = required_run_file(config, "cred_forest");
    ensure_parent_dir(forest_path);
    write_run(forest_run, forest_path);
    std::cerr << "wrote " << forest_run.topics.size() << " topics to " << forest_path.string()
              << "\n";

    if (sites.empty()) {
        std::cerr << "no credible_sites configured; skipping the boosted ranking\n";
        return;
    }
    RankedRun boosted =
        rank_credibility(docs_per_topic, features_by_doc, domain_by_doc, forest, sites,
                         CredibilityMode::classifier_plus_sites, "cred-forest-sites");
    const std::filesystem::path boosted_path = required_run_file(config, "cred_forest_sites");
    ensure_parent_dir(boosted_path);
    write_run(boosted, boosted_path);
    std::cerr << "wrote " << boosted.topics.size() << " topics to " << boosted_path.string()
              << "\n";
}

}  // namespace

void cmd_rerank(const PipelineConfig& config, const std::string& dimension) {
    if (dimension == "support") {
        rerank_support(config);
    } else if (dimension == "credibility") {
        rerank_credibility(config);
    } else {
        throw std::invalid_argument("dimension must be support|credibility, got '" + dimension +
                                    "'");
    }
}

void cmd_fuse(const PipelineConfig& config, const std::string& preset) {
    const ModelGraph graph = build_model_graph(config);
    if (graph.count(preset) == 0) {
        throw std::runtime_error("unknown preset or model id: " + preset);
    }
    RankedRun fused = compose_from_config(config, graph, preset);
    const std::filesystem::path out = required_run_file(config, preset);
    ensure_parent_dir(out);
    write_run(fused, out);
    std::cerr << "wrote " << fused.topics.size() << " topics to " << out.string() << "\n";
}

CompatibilityReport cmd_eval(const PipelineConfig& config,
                             const std::filesystem::path& run_path) {
    if (config.qrels_file.empty()) throw std::runtime_error("config has no eval.qrels path");
    RankedRun run = load_run(run_path);
    Qrels qrels = Qrels::load(config.qrels_file);
    const std::size_t depth =
        config.eval_depth > 0 ? config.eval_depth : default_eval_depth(config.eval_p);
    CompatibilityReport report = help_harm_report(run, qrels, config.eval_p, depth);

    std::cout << report_summary_tsv(report);

    std::filesystem::create_directories(config.report_dir);
    const std::string stem = report.run_tag.empty() ? "run" : report.run_tag;
    {
        std::ofstream out(config.report_dir / (stem + "_summary.tsv"), std::ios::binary);
        out << report_summary_tsv(report);
    }
    {
        std::ofstream out(config.report_dir / (stem + "_topics.tsv"), std::ios::binary);
        out << report_topics_tsv(report);
    }
    write_report_json(report, config.report_dir / (stem + ".json"));
    return report;
}

}  // namespace misir
