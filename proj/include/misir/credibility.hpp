#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "misir/forest.hpp"
#include "misir/run_io.hpp"

namespace misir {

struct CredibilityFeatures {
    double smog = 0.0;
    double pagerank = 0.0;
    bool pagerank_missing = false;  // pagerank is encoded as 0 when unknown
    int css_rule_count = 0;

    FeatureVector vector() const {
        return {smog, pagerank, static_cast<double>(css_rule_count)};
    }
};

// Vowel-group heuristic: consecutive vowels (aeiouy) form one group and a
// trailing silent 'e' is dropped; every non-empty word counts at least one
// syllable.
int count_syllables(std::string_view word);

// 1.0430 * sqrt(polysyllables * 30 / sentences) + 3.1291, where a
// polysyllable is a word of >= 3 syllables; 0 for text without sentences.
double smog_index(std::string_view text);

// Rule blocks inside <style> elements + style="..." attributes +
// <link rel="stylesheet"> elements, counted best-effort on malformed markup.
int count_css_rules(std::string_view html);

int binarize_credibility_score(int raw_score);  // 1 iff raw_score in {4, 5}

struct CredibilityLabelRow {
    std::string url;
    std::string topic;
    int raw_score = 0;  // 1..5
};

// CSV with a `url,topic,score` header.
std::vector<CredibilityLabelRow> load_credibility_csv(const std::filesystem::path& path);

struct LabeledPage {
    std::string url;
    CredibilityFeatures features;
    int raw_score = 0;
    int label = 0;  // binarize_credibility_score(raw_score)
};

/// Lowercased domains, "www." stripped, matched exactly.
class CredibleSiteList {
public:
    CredibleSiteList() = default;
    explicit CredibleSiteList(std::set<std::string> domains) : domains_(std::move(domains)) {}

    // One domain per line; '#' starts a comment.
    static CredibleSiteList load(const std::filesystem::path& path);

    bool contains(std::string_view domain) const {
        return domains_.count(std::string(domain)) > 0;
    }
    bool empty() const { return domains_.empty(); }
    std::size_t size() const { return domains_.size(); }
    const std::set<std::string>& domains() const { return domains_; }

private:
    std::set<std::string> domains_;
};

// score + 1 for listed domains, so every boosted page outranks every
// unboosted one.
double boost_credible(double score, std::string_view domain, const CredibleSiteList& sites);

struct PageRankResult {
    double rank = 0.0;
    bool missing = false;
};

/// Domain -> rank lookups from either an offline fixture file (JSON map) or
/// a live HTTP endpoint with an API key taken from the environment. Results
/// are cached; live requests are batched. A live transport or auth failure
/// is an error, never a silent 0.
class PageRankClient {
public:
    enum class Mode { fixture, live };

    struct Config {
        Mode mode = Mode::fixture;
        std::filesystem::path fixture_file;
        std::string endpoint;  // e.g. "http://localhost:8080"
        std::string request_path = "/api/v1.0/getPageRank";
        std::string key_env = "MISIR_PAGERANK_API_KEY";
        std::string key_header = "API-OPR";
        std::size_t batch_size = 100;
    };

    explicit PageRankClient(Config config);

    PageRankResult fetch(const std::string& domain);
    std::map<std::string, PageRankResult> fetch_many(const std::vector<std::string>& domains);

private:
    void fetch_live_batch(const std::vector<std::string>& domains);

    Config config_;
    std::map<std::string, PageRankResult> cache_;
};

enum class CredibilityMode { classifier_only, classifier_plus_sites };

/// Orders each topic's documents by (optionally boosted) classifier score,
/// descending, ties by ascending doc_id. classifier_only is the plain
/// forest ranking; classifier_plus_sites adds the unitary boost, and a
/// score tie between a listed and an unlisted doc (possible only at exactly
/// 1.0) goes to the listed doc so that boost dominance is strict.
RankedRun rank_credibility(const std::map<int, std::vector<std::string>>& docs_per_topic,
                           const std::map<std::string, CredibilityFeatures>& features_by_doc,
                           const std::map<std::string, std::string>& domain_by_doc,
                           const RandomForest& model, const CredibleSiteList& sites,
                           CredibilityMode mode, const std::string& tag);

}  // namespace misir
