#include "misir/supportiveness.hpp"

#include <algorithm>
#include <stdexcept>

namespace misir {

namespace {

bool is_directional(DocLabel label) {
    return label == DocLabel::supports || label == DocLabel::dissuades;
}

struct VoteCounts {
    int supports = 0;
    int dissuades = 0;
};

VoteCounts count_votes(const std::vector<const DocStance*>& docs) {
    VoteCounts votes;
    for (const DocStance* doc : docs) {
        if (doc->label == DocLabel::supports) ++votes.supports;
        if (doc->label == DocLabel::dissuades) ++votes.dissuades;
    }
    return votes;
}

}  // namespace

std::string to_string(DocLabel label) {
    switch (label) {
        case DocLabel::supports: return "supports";
        case DocLabel::dissuades: return "dissuades";
        case DocLabel::neutral_only: return "neutral_only";
        case DocLabel::mixed: return "mixed";
        case DocLabel::void_evidence: return "void";
    }
    return "void";
}

DocStance aggregate_document(int topic_id, const std::string& doc_id,
                             const std::vector<EvidenceJudgment>& judgments) {
    DocStance stance;
    stance.topic_id = topic_id;
    stance.doc_id = doc_id;

    bool any_supports = false;
    bool any_dissuades = false;
    double directional_max = 0.0;
    double neutral_sum = 0.0;
    std::size_t neutral_count = 0;

    for (const EvidenceJudgment& j : judgments) {
        if (j.topic_id != topic_id || j.doc_id != doc_id) {
            throw std::invalid_argument("judgment for (" + std::to_string(j.topic_id) + ", " +
                                        j.doc_id + ") mixed into document (" +
                                        std::to_string(topic_id) + ", " + doc_id + ")");
        }
        switch (j.label) {
            case EvidenceLabel::supports:
                any_supports = true;
                directional_max = std::max(directional_max, j.confidence);
                break;
            case EvidenceLabel::dissuades:
                any_dissuades = true;
                directional_max = std::max(directional_max, j.confidence);
                break;
            case EvidenceLabel::neutral:
                neutral_sum += j.confidence;
                ++neutral_count;
                break;
        }
    }

    if (judgments.empty()) {
        stance.label = DocLabel::void_evidence;
        stance.confidence = -3.0;
    } else if (any_supports && any_dissuades) {
        // Neutral evidence is ignored when testing for the mixed case.
        stance.label = DocLabel::mixed;
        stance.confidence = -2.0;
    } else if (any_supports || any_dissuades) {
        stance.label = any_supports ? DocLabel::supports : DocLabel::dissuades;
        stance.confidence = directional_max;
    } else {
        stance.label = DocLabel::neutral_only;
        stance.confidence = 1.0 - neutral_sum / static_cast<double>(neutral_count);
    }
    stance.ranking_score = stance.confidence;  // sign resolved by apply_stance
    return stance;
}

TopicStance decide_topic_stance(const std::vector<DocStance>& doc_stances,
                                const std::vector<RunEntry>& pool_ranking,
                                const VoteConfig& config,
                                const std::set<std::string>& credible_domains,
                                const std::map<std::string, std::string>& doc_domains) {
    if (config.k < 1) throw std::invalid_argument("vote k must be >= 1");
    if (!is_directional(config.tie_default)) {
        throw std::invalid_argument("tie default must be supports or dissuades");
    }

    std::map<std::string_view, const DocStance*> by_doc;
    int topic_id = 0;
    for (const DocStance& stance : doc_stances) {
        by_doc[stance.doc_id] = &stance;
        topic_id = stance.topic_id;
    }

    std::vector<const DocStance*> voters;
    for (std::size_t i = 0; i < pool_ranking.size() && i < config.k; ++i) {
        auto it = by_doc.find(pool_ranking[i].doc_id);
        if (it != by_doc.end() && is_directional(it->second->label)) {
            voters.push_back(it->second);
        }
    }
    if (voters.empty()) {
        // Widen to every labeled doc before giving up.
        for (const DocStance& stance : doc_stances) {
            if (is_directional(stance.label)) voters.push_back(&stance);
        }
    }
    if (voters.empty()) {
        throw std::runtime_error("stance undecidable for topic " + std::to_string(topic_id) +
                                 ": no supporting or dissuading documents");
    }

    TopicStance result;
    result.topic_id = topic_id;
    VoteCounts votes = count_votes(voters);
    result.support_votes = votes.supports;
    result.dissuade_votes = votes.dissuades;

    if (votes.supports != votes.dissuades) {
        result.decided =
            votes.supports > votes.dissuades ? DocLabel::supports : DocLabel::dissuades;
        return result;
    }

    std::vector<const DocStance*> credible_voters;
    for (const DocStance* doc : voters) {
        auto it = doc_domains.find(doc->doc_id);
        if (it != doc_domains.end() && credible_domains.count(it->second) > 0) {
            credible_voters.push_back(doc);
        }
    }
    VoteCounts credible_votes = count_votes(credible_voters);
    if (credible_votes.supports != credible_votes.dissuades) {
        result.decided = credible_votes.supports > credible_votes.dissuades
                             ? DocLabel::supports
                             : DocLabel::dissuades;
        result.tie_broken_by_credible_sites = true;
        return result;
    }

    result.decided = config.tie_default;
    return result;
}

std::vector<DocStance> apply_stance(std::vector<DocStance> doc_stances,
                                    const TopicStance& topic_stance) {
    if (!is_directional(topic_stance.decided)) {
        throw std::invalid_argument("topic stance must be supports or dissuades");
    }
    for (DocStance& stance : doc_stances) {
        if (!is_directional(stance.label)) continue;
        stance.ranking_score =
            stance.label == topic_stance.decided ? stance.confidence : -stance.confidence;
    }
    return doc_stances;
}

std::vector<RunEntry> rank_supportiveness(const std::vector<DocStance>& doc_stances) {
    std::vector<const DocStance*> order;
    order.reserve(doc_stances.size());
    for (const DocStance& stance : doc_stances) order.push_back(&stance);
    std::sort(order.begin(), order.end(), [](const DocStance* a, const DocStance* b) {
        if (a->ranking_score != b->ranking_score) return a->ranking_score > b->ranking_score;
        return a->doc_id < b->doc_id;
    });

    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(order.size());
    for (const DocStance* stance : order) scored.emplace_back(stance->doc_id, stance->ranking_score);
    return make_run_slice(scored);
}

RankedRun build_supportiveness_run(const std::vector<EvidenceJudgment>& judgments,
                                   const RankedRun& usefulness_run, const RankedRun* pool_run,
                                   const VoteConfig& config,
                                   const std::set<std::string>& credible_domains,
                                   const std::map<std::string, std::string>& doc_domains,
                                   const std::string& tag) {
    std::map<int, std::map<std::string, std::vector<EvidenceJudgment>>> grouped;
    for (const EvidenceJudgment& j : judgments) grouped[j.topic_id][j.doc_id].push_back(j);

    RankedRun out;
    out.tag = tag;
    const std::vector<EvidenceJudgment> no_judgments;
    for (const auto& [topic_id, entries] : usefulness_run.topics) {
        const std::vector<RunEntry>* pool =
            pool_run ? pool_run->slice(topic_id) : &entries;
        if (!pool) pool = &entries;

        const auto topic_judgments = grouped.find(topic_id);
        auto judgments_for = [&](const std::string& doc_id) -> const std::vector<EvidenceJudgment>& {
            if (topic_judgments == grouped.end()) return no_judgments;
            auto it = topic_judgments->second.find(doc_id);
            return it == topic_judgments->second.end() ? no_judgments : it->second;
        };

        std::vector<DocStance> stances;
        std::set<std::string> covered;
        for (const RunEntry& e : entries) {
            stances.push_back(aggregate_document(topic_id, e.doc_id, judgments_for(e.doc_id)));
            covered.insert(e.doc_id);
        }
        const std::size_t universe_size = stances.size();
        // Pool docs outside the reranked list may still vote.
        for (std::size_t i = 0; i < pool->size() && i < config.k; ++i) {
            const std::string& doc_id = (*pool)[i].doc_id;
            if (covered.insert(doc_id).second) {
                stances.push_back(aggregate_document(topic_id, doc_id, judgments_for(doc_id)));
            }
        }

        TopicStance stance =
            decide_topic_stance(stances, *pool, config, credible_domains, doc_domains);
        stances = apply_stance(std::move(stances), stance);
        stances.resize(universe_size);  // rank only the reranked list
        out.topics[topic_id] = rank_supportiveness(stances);
    }
    return out;
}

}  // namespace misir
