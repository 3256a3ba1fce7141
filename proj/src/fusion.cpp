#include "misir/fusion.hpp"

#include <algorithm>
#include <set>

#include "misir/run_io.hpp"

namespace misir {

RankedRun rrf_fuse(const std::vector<RankedRun>& runs, const RrfConfig& config,
                   std::size_t depth, const std::string& tag) {
    if (runs.empty()) throw std::invalid_argument("rrf_fuse needs at least one run");
    if (!(config.k > 0.0)) throw std::invalid_argument("rrf k must be > 0");
    if (depth < 1) throw std::invalid_argument("fusion depth must be >= 1");

    std::set<int> topic_ids;
    for (const RankedRun& run : runs) {
        for (const auto& [topic_id, entries] : run.topics) topic_ids.insert(topic_id);
    }

    RankedRun fused;
    fused.tag = tag;
    for (int topic_id : topic_ids) {
        std::map<std::string, double> scores;
        for (const RankedRun& run : runs) {
            const std::vector<RunEntry>* slice = run.slice(topic_id);
            if (!slice) continue;  // a run without the topic contributes nothing
            for (const RunEntry& e : *slice) {
                scores[e.doc_id] += 1.0 / (config.k + static_cast<double>(e.rank));
            }
        }
        std::vector<std::pair<std::string, double>> scored(scores.begin(), scores.end());
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (scored.size() > depth) scored.resize(depth);
        fused.topics[topic_id] = make_run_slice(scored);
    }
    return fused;
}

ModelGraph default_model_graph() {
    ModelGraph graph;
    auto alias = [&](const std::string& id, const std::string& target) {
        ModelNode node;
        node.kind = ModelNode::Kind::alias;
        node.target = target;
        graph[id] = std::move(node);
    };
    auto fuse = [&](const std::string& id, std::vector<std::string> components) {
        ModelNode node;
        node.kind = ModelNode::Kind::fuse;
        node.components = std::move(components);
        graph[id] = std::move(node);
    };

    alias("m1", "bm25");
    fuse("m2", {"bm25", "bm25_tuned"});
    fuse("m3", {"bert_base", "monobert", "electra"});
    fuse("m4", {"bm25", "m3"});
    alias("m5", "supp_roberta");
    fuse("m6", {"supp_roberta", "supp_biomedroberta", "supp_scibert"});
    alias("m7", "cred_forest");
    // m8 is the credible-site list itself, not a ranking; it only enters
    // through the boosted classifier.
    alias("m9", "cred_forest_sites");

    fuse("run1", {"m1", "m5", "m7"});
    fuse("run2", {"m2", "m6", "m9"});
    fuse("run3", {"m3", "m6", "m9"});
    fuse("run4", {"m4", "m5", "m9"});
    fuse("run5", {"m4", "m6", "m7"});
    fuse("run6", {"m4", "m6", "m9"});
    fuse("run7", {"bm25", "bm25_tuned", "bert_base", "monobert", "electra", "supp_roberta",
                  "supp_biomedroberta", "supp_scibert", "cred_forest", "cred_forest_sites"});
    return graph;
}

namespace {

struct Resolver {
    const ModelGraph& graph;
    const std::map<std::string, RankedRun>& available;
    const RunLoader& loader;
    const RrfConfig& config;
    std::size_t depth;
    std::map<std::string, RankedRun> cache;
    std::set<std::string> in_progress;

    // A failure anywhere below a direct component of the top-level model is
    // reported as that component being missing.
    const RankedRun& resolve_component(const std::string& component, bool top_level) {
        try {
            return resolve(component, false);
        } catch (const MissingModelError& e) {
            if (top_level && e.model_id != component) {
                throw MissingModelError(component, e.what());
            }
            throw;
        }
    }

    const RankedRun& resolve(const std::string& id, bool top_level) {
        auto ready = available.find(id);
        if (ready != available.end()) return ready->second;
        auto cached = cache.find(id);
        if (cached != cache.end()) return cached->second;

        auto node_it = graph.find(id);
        if (node_it == graph.end()) throw MissingModelError(id, "");
        if (!in_progress.insert(id).second) {
            throw std::runtime_error("model graph cycle through " + id);
        }
        const ModelNode& node = node_it->second;

        RankedRun run;
        switch (node.kind) {
            case ModelNode::Kind::file: {
                if (node.file.empty()) throw MissingModelError(id, "no run file configured");
                try {
                    run = loader(node.file);
                } catch (const MissingModelError&) {
                    throw;
                } catch (const std::exception& e) {
                    throw MissingModelError(id, e.what());
                }
                break;
            }
            case ModelNode::Kind::alias:
                run = resolve_component(node.target, top_level);
                break;
            case ModelNode::Kind::fuse: {
                std::vector<RankedRun> inputs;
                inputs.reserve(node.components.size());
                for (const std::string& component : node.components) {
                    inputs.push_back(resolve_component(component, top_level));
                }
                run = rrf_fuse(inputs, config, depth, id);
                break;
            }
        }
        run.tag = id;
        in_progress.erase(id);
        return cache.emplace(id, std::move(run)).first->second;
    }
};

}  // namespace

RankedRun compose_model(const std::string& id, const ModelGraph& graph,
                        const std::map<std::string, RankedRun>& available,
                        const RunLoader& loader, const RrfConfig& config, std::size_t depth) {
    Resolver resolver{graph, available, loader, config, depth, {}, {}};
    RankedRun run = resolver.resolve(id, true);
    run.tag = id;
    return run;
}

}  // namespace misir
