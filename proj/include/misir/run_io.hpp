#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace misir {

struct RunEntry {
    std::string doc_id;
    double score = 0.0;
    int rank = 0;
};

/// Per-topic ranked (doc, score) lists, the currency between every stage.
/// Invariants: ranks are 1..n contiguous per topic, scores non-increasing
/// with rank, no duplicate doc within a topic.
struct RankedRun {
    std::string tag;
    std::map<int, std::vector<RunEntry>> topics;

    bool empty() const { return topics.empty(); }
    const std::vector<RunEntry>* slice(int topic_id) const {
        auto it = topics.find(topic_id);
        return it == topics.end() ? nullptr : &it->second;
    }
};

// Builds one topic's entries from an already sorted (score desc) doc list,
// assigning ranks 1..n.
std::vector<RunEntry> make_run_slice(const std::vector<std::pair<std::string, double>>& scored);

// Throws std::runtime_error when a RankedRun invariant is violated.
void validate_run(const RankedRun& run);

// TREC 6-column format: `<topic> Q0 <doc> <rank> <score> <tag>`, one entry
// per line. Any format or invariant violation is a hard error carrying the
// line number.
RankedRun load_run(const std::filesystem::path& path);

// Topics ascending, ranks ascending, scores %.6f: deterministic bytes.
void write_run(const RankedRun& run, const std::filesystem::path& path);

enum class EvidenceLabel { supports, dissuades, neutral };

std::string to_string(EvidenceLabel label);
EvidenceLabel evidence_label_from_string(std::string_view s);

/// One claim-check output for one evidence passage of one document.
struct EvidenceJudgment {
    int topic_id = 0;
    std::string doc_id;
    int evidence_index = 1;
    EvidenceLabel label = EvidenceLabel::neutral;
    double confidence = 0.0;  // in [0, 1]
};

// JSONL, one judgment per line. Out-of-range confidence, bad labels and
// duplicate (topic, doc, evidence_index) triples are hard errors with line
// numbers; nothing is silently dropped.
std::vector<EvidenceJudgment> load_evidence(const std::filesystem::path& path);

}  // namespace misir
