#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "misir/run_io.hpp"

namespace misir {

/// Document-level stance classes and their score rules:
///   supports / dissuades  confidence = S_max over the non-neutral evidences,
///                         ranking score +S_max or -S_max once the topic
///                         stance is decided
///   neutral_only          confidence = ranking score = 1 - mean(S_i)
///   mixed                 both supporting and dissuading evidence: -2
///   void_evidence         no evidence at all: -3
enum class DocLabel { supports, dissuades, neutral_only, mixed, void_evidence };

std::string to_string(DocLabel label);

struct DocStance {
    int topic_id = 0;
    std::string doc_id;
    DocLabel label = DocLabel::void_evidence;
    double confidence = -3.0;
    double ranking_score = -3.0;
};

// Collapses the judgments of one (topic, doc) pair into a DocStance; an
// empty list yields void_evidence. Judgments carrying a different topic or
// doc id are an error. The result does not depend on judgment order.
DocStance aggregate_document(int topic_id, const std::string& doc_id,
                             const std::vector<EvidenceJudgment>& judgments);

struct TopicStance {
    int topic_id = 0;
    DocLabel decided = DocLabel::dissuades;  // supports or dissuades
    int support_votes = 0;
    int dissuade_votes = 0;
    bool tie_broken_by_credible_sites = false;
};

struct VoteConfig {
    std::size_t k = 10;
    DocLabel tie_default = DocLabel::dissuades;  // used when even the
                                                 // credible-site recount ties
};

// Majority vote over the supporting/dissuading documents among the top-k of
// `pool_ranking`. A tie is recounted over the credible-domain docs only; a
// persisting tie falls back to `tie_default`. When the top-k holds no
// labeled doc the vote widens to every labeled doc; if none exists at all
// the stance is undecidable and this throws.
TopicStance decide_topic_stance(const std::vector<DocStance>& doc_stances,
                                const std::vector<RunEntry>& pool_ranking,
                                const VoteConfig& config,
                                const std::set<std::string>& credible_domains,
                                const std::map<std::string, std::string>& doc_domains);

// Docs agreeing with the decided stance keep +S_max, disagreeing docs get
// -S_max; neutral_only, mixed and void scores are left untouched.
std::vector<DocStance> apply_stance(std::vector<DocStance> doc_stances,
                                    const TopicStance& topic_stance);

// Descending ranking_score, ties by ascending doc_id, ranks 1..n.
std::vector<RunEntry> rank_supportiveness(const std::vector<DocStance>& doc_stances);

/// Full per-topic pipeline over a usefulness run: aggregate evidence, vote,
/// flip the incorrect side, rank. Documents of the run with no evidence are
/// void. The vote pool defaults to the reranked run itself; pass a separate
/// `pool_run` to vote over a different ranking (e.g. the BM25 run).
RankedRun build_supportiveness_run(const std::vector<EvidenceJudgment>& judgments,
                                   const RankedRun& usefulness_run, const RankedRun* pool_run,
                                   const VoteConfig& config,
                                   const std::set<std::string>& credible_domains,
                                   const std::map<std::string, std::string>& doc_domains,
                                   const std::string& tag);

}  // namespace misir
