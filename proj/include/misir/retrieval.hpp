#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "misir/corpus.hpp"
#include "misir/run_io.hpp"

namespace misir {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

// Throws std::invalid_argument unless k1 >= 0 and 0 <= b <= 1.
void validate_params(const Bm25Params& params);

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

/// Term -> postings inverted index over the tokenized document text.
///
/// Scoring uses BM25 with the non-negative idf variant
///   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
/// summed over the query token multiset (a token occurring twice in the
/// query contributes twice). Every term contribution is >= 0, and a document
/// containing no query term scores exactly 0.
class InvertedIndex {
public:
    static InvertedIndex build(const CorpusStore& corpus);  // throws on empty corpus

    // Self-describing versioned JSON file (index.json); rebuilding from the
    // same corpus reproduces identical bytes.
    void save(const std::filesystem::path& dir) const;
    static InvertedIndex load(const std::filesystem::path& dir);

    std::size_t num_docs() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    std::uint32_t doc_length(std::string_view doc_id) const;
    std::size_t doc_frequency(const std::string& term) const;
    std::uint32_t term_frequency(const std::string& term, std::string_view doc_id) const;
    bool contains(std::string_view doc_id) const;
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }

    double bm25_score(const Bm25Params& params, const std::vector<std::string>& query_tokens,
                      std::string_view doc_id) const;  // throws on unknown doc_id

    // Top-`depth` docs by descending score, ties broken by ascending doc_id;
    // zero-score docs are excluded.
    std::vector<ScoredDoc> search(const Bm25Params& params,
                                  const std::vector<std::string>& query_tokens,
                                  std::size_t depth) const;

private:
    std::uint32_t doc_index(std::string_view doc_id) const;  // throws on unknown
    double idf(std::size_t df) const;
    double score_one(const Bm25Params& params, std::uint32_t tf, std::uint32_t doc_len,
                     double idf_value) const;

    std::vector<std::string> doc_ids_;  // sorted; position is the dense doc index
    std::vector<std::uint32_t> doc_lengths_;
    std::map<std::string, std::vector<std::pair<std::uint32_t, std::uint32_t>>> postings_;
    double avg_doc_length_ = 0.0;
};

// Query + " " + description, tokenized.
std::vector<std::string> topic_query_tokens(const Topic& topic);

// One run slice per topic; topics with no scoring documents are omitted.
RankedRun search_topics(const InvertedIndex& index, const Bm25Params& params,
                        const std::vector<Topic>& topics, std::size_t depth,
                        const std::string& tag);

struct SilverTopic {
    Topic topic;
    std::string target_doc_id;
};

// JSONL: {"topic_id":..., "query":..., "description":..., "target_doc_id":...}
std::vector<SilverTopic> load_silver_topics(const std::filesystem::path& path);

struct TuneResult {
    Bm25Params params;
    double mrr = 0.0;  // in [0, 1]
};

// Mean reciprocal rank of the silver targets at `depth` (reciprocal rank 0
// when a target is not retrieved).
double mean_reciprocal_rank(const InvertedIndex& index, const Bm25Params& params,
                            const std::vector<SilverTopic>& silver, std::size_t depth);

// Grid point maximizing MRR; ties keep the earliest grid entry. Grid points
// are evaluated in parallel but the result never depends on scheduling.
// Errors: empty grid, empty silver set, or a silver target missing from the
// index.
TuneResult tune_params(const InvertedIndex& index, const std::vector<SilverTopic>& silver,
                       const std::vector<Bm25Params>& grid, std::size_t depth);

// k1 from 0.1 to 3.0 in steps of 0.2 crossed with b from 0.0 to 1.0 in
// steps of 0.1.
std::vector<Bm25Params> default_grid();
std::vector<Bm25Params> make_grid(const std::vector<double>& k1_values,
                                  const std::vector<double>& b_values);

}  // namespace misir
