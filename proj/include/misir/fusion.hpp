#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "misir/run_io.hpp"

namespace misir {

struct RrfConfig {
    double k = 60.0;  // must be > 0
};

inline constexpr std::size_t kDefaultFusionDepth = 1000;

// Reciprocal rank fusion: per topic (over the union of the input runs'
// topics), score(d) = sum over runs ranking d of 1 / (k + rank). Output is
// sorted by score descending, doc_id ascending on ties, truncated to
// `depth`. The result does not depend on the order of `runs`.
RankedRun rrf_fuse(const std::vector<RankedRun>& runs, const RrfConfig& config,
                   std::size_t depth, const std::string& tag);

struct MissingModelError : std::runtime_error {
    std::string model_id;
    MissingModelError(std::string id, const std::string& detail)
        : std::runtime_error("missing model " + id + (detail.empty() ? "" : " (" + detail + ")")),
          model_id(std::move(id)) {}
};

/// A model in the composition graph is a run file, an alias for another
/// model, or an RRF fusion of other models.
struct ModelNode {
    enum class Kind { file, alias, fuse };
    Kind kind = Kind::file;
    std::filesystem::path file;
    std::string target;                   // alias
    std::vector<std::string> components;  // fuse
};

using ModelGraph = std::map<std::string, ModelNode>;

// The builtin compositions: m1..m9 over the individual model tags (bm25,
// bm25_tuned, bert_base, monobert, electra, supp_roberta,
// supp_biomedroberta, supp_scibert, cred_forest, cred_forest_sites) and the
// run1..run7 presets over those. Every combination except the site boost
// inside cred_forest_sites is an RRF fusion.
ModelGraph default_model_graph();

inline const std::vector<std::string>& preset_ids() {
    static const std::vector<std::string> ids{"run1", "run2", "run3", "run4",
                                              "run5", "run6", "run7"};
    return ids;
}

using RunLoader = std::function<RankedRun(const std::filesystem::path&)>;

/// Resolves `id` bottom-up: runs already in `available` win, then graph
/// nodes (file nodes loaded through `loader`, fusions composed recursively).
/// An unresolvable component raises MissingModelError naming the model. The
/// returned run carries `id` as its tag.
RankedRun compose_model(const std::string& id, const ModelGraph& graph,
                        const std::map<std::string, RankedRun>& available,
                        const RunLoader& loader, const RrfConfig& config, std::size_t depth);

}  // namespace misir
