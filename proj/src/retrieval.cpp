#include "misir/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "misir/text.hpp"

namespace misir {

namespace {

using nlohmann::json;

constexpr const char* kIndexFormat = "misir-index";
constexpr int kIndexVersion = 1;

}  // namespace

void validate_params(const Bm25Params& params) {
    if (!(params.k1 >= 0.0)) {
        throw std::invalid_argument("bm25 k1 must be >= 0");
    }
    if (!(params.b >= 0.0 && params.b <= 1.0)) {
        throw std::invalid_argument("bm25 b must be in [0,1]");
    }
}

InvertedIndex InvertedIndex::build(const CorpusStore& corpus) {
    if (corpus.size() == 0) throw std::runtime_error("cannot index an empty corpus");

    InvertedIndex index;
    index.doc_ids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());

    std::uint64_t total_tokens = 0;
    for (const Document& doc : corpus.docs()) {  // already sorted by doc_id
        const std::uint32_t doc_idx = static_cast<std::uint32_t>(index.doc_ids_.size());
        index.doc_ids_.push_back(doc.doc_id);

        TokenStream stream = tokenize(doc.text);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(stream.tokens.size()));
        total_tokens += stream.tokens.size();

        std::map<std::string, std::uint32_t> counts;
        for (const std::string& token : stream.tokens) ++counts[token];
        for (const auto& [term, tf] : counts) {
            index.postings_[term].emplace_back(doc_idx, tf);
        }
    }
    index.avg_doc_length_ =
        static_cast<double>(total_tokens) / static_cast<double>(index.doc_ids_.size());
    return index;
}

void InvertedIndex::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json postings = json::object();
    for (const auto& [term, list] : postings_) {
        json entries = json::array();
        for (const auto& [doc_idx, tf] : list) entries.push_back(json::array({doc_idx, tf}));
        postings[term] = std::move(entries);
    }
    json root{{"format", kIndexFormat},
              {"version", kIndexVersion},
              {"doc_ids", doc_ids_},
              {"doc_lengths", doc_lengths_},
              {"postings", std::move(postings)}};
    std::ofstream out(dir / "index.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index to " + dir.string());
    out << root.dump() << "\n";
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.json", std::ios::binary);
    if (!in) throw std::runtime_error("no index found in " + dir.string());
    json root = json::parse(in);
    if (root.value("format", "") != kIndexFormat) {
        throw std::runtime_error("unrecognized index format in " + dir.string());
    }
    if (root.value("version", 0) != kIndexVersion) {
        throw std::runtime_error("unsupported index version in " + dir.string());
    }

    InvertedIndex index;
    index.doc_ids_ = root["doc_ids"].get<std::vector<std::string>>();
    index.doc_lengths_ = root["doc_lengths"].get<std::vector<std::uint32_t>>();
    for (auto& [term, entries] : root["postings"].items()) {
        auto& list = index.postings_[term];
        list.reserve(entries.size());
        for (const auto& pair : entries) {
            list.emplace_back(pair[0].get<std::uint32_t>(), pair[1].get<std::uint32_t>());
        }
    }
    std::uint64_t total = 0;
    for (std::uint32_t len : index.doc_lengths_) total += len;
    index.avg_doc_length_ =
        static_cast<double>(total) / static_cast<double>(index.doc_ids_.size());
    return index;
}

std::uint32_t InvertedIndex::doc_index(std::string_view doc_id) const {
    auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), doc_id);
    if (it == doc_ids_.end() || *it != doc_id) {
        throw std::out_of_range("doc_id not in index: " + std::string(doc_id));
    }
    return static_cast<std::uint32_t>(it - doc_ids_.begin());
}

bool InvertedIndex::contains(std::string_view doc_id) const {
    auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), doc_id);
    return it != doc_ids_.end() && *it == doc_id;
}

std::uint32_t InvertedIndex::doc_length(std::string_view doc_id) const {
    return doc_lengths_[doc_index(doc_id)];
}

std::size_t InvertedIndex::doc_frequency(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

std::uint32_t InvertedIndex::term_frequency(const std::string& term,
                                            std::string_view doc_id) const {
    const std::uint32_t idx = doc_index(doc_id);
    auto it = postings_.find(term);
    if (it == postings_.end()) return 0;
    const auto& list = it->second;
    auto pos = std::lower_bound(list.begin(), list.end(), idx,
                                [](const auto& entry, std::uint32_t i) { return entry.first < i; });
    if (pos == list.end() || pos->first != idx) return 0;
    return pos->second;
}

double InvertedIndex::idf(std::size_t df) const {
    const double n = static_cast<double>(num_docs());
    const double d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double InvertedIndex::score_one(const Bm25Params& params, std::uint32_t tf,
                                std::uint32_t doc_len, double idf_value) const {
    if (tf == 0) return 0.0;
    const double f = static_cast<double>(tf);
    const double norm =
        1.0 - params.b + params.b * static_cast<double>(doc_len) / avg_doc_length_;
    return idf_value * f * (params.k1 + 1.0) / (f + params.k1 * norm);
}

double InvertedIndex::bm25_score(const Bm25Params& params,
                                 const std::vector<std::string>& query_tokens,
                                 std::string_view doc_id) const {
    validate_params(params);
    const std::uint32_t idx = doc_index(doc_id);
    const std::uint32_t len = doc_lengths_[idx];
    double score = 0.0;
    for (const std::string& term : query_tokens) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& list = it->second;
        auto pos = std::lower_bound(
            list.begin(), list.end(), idx,
            [](const auto& entry, std::uint32_t i) { return entry.first < i; });
        if (pos == list.end() || pos->first != idx) continue;
        score += score_one(params, pos->second, len, idf(list.size()));
    }
    return score;
}

std::vector<ScoredDoc> InvertedIndex::search(const Bm25Params& params,
                                             const std::vector<std::string>& query_tokens,
                                             std::size_t depth) const {
    validate_params(params);
    if (depth < 1) throw std::invalid_argument("search depth must be >= 1");

    std::vector<double> scores(num_docs(), 0.0);
    std::vector<bool> touched(num_docs(), false);
    for (const std::string& term : query_tokens) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double idf_value = idf(it->second.size());
        for (const auto& [doc_idx, tf] : it->second) {
            scores[doc_idx] += score_one(params, tf, doc_lengths_[doc_idx], idf_value);
            touched[doc_idx] = true;
        }
    }

    std::vector<std::uint32_t> hits;
    for (std::uint32_t i = 0; i < touched.size(); ++i) {
        if (touched[i] && scores[i] > 0.0) hits.push_back(i);
    }
    // doc indexes follow sorted doc_id order, so ascending index is the
    // ascending doc_id tie-break.
    std::sort(hits.begin(), hits.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    if (hits.size() > depth) hits.resize(depth);

    std::vector<ScoredDoc> result;
    result.reserve(hits.size());
    for (std::uint32_t i : hits) result.push_back(ScoredDoc{doc_ids_[i], scores[i]});
    return result;
}

std::vector<std::string> topic_query_tokens(const Topic& topic) {
    return tokenize(topic.retrieval_text()).tokens;
}

RankedRun search_topics(const InvertedIndex& index, const Bm25Params& params,
                        const std::vector<Topic>& topics, std::size_t depth,
                        const std::string& tag) {
    RankedRun run;
    run.tag = tag;
    for (const Topic& topic : topics) {
        std::vector<ScoredDoc> hits = index.search(params, topic_query_tokens(topic), depth);
        if (hits.empty()) continue;
        std::vector<std::pair<std::string, double>> scored;
        scored.reserve(hits.size());
        for (auto& hit : hits) scored.emplace_back(std::move(hit.doc_id), hit.score);
        run.topics[topic.topic_id] = make_run_slice(scored);
    }
    return run;
}

std::vector<SilverTopic> load_silver_topics(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open silver topics file: " + path.string());

    std::vector<SilverTopic> silver;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw std::runtime_error("silver topics line " + std::to_string(line_no) +
                                     ": malformed json");
        }
        SilverTopic s;
        if (!rec.contains("topic_id") || !rec["topic_id"].is_number_integer()) {
            throw std::runtime_error("silver topics line " + std::to_string(line_no) +
                                     ": topic_id required");
        }
        s.topic.topic_id = rec["topic_id"].get<int>();
        if (!rec.contains("query") || !rec["query"].is_string() ||
            rec["query"].get<std::string>().empty()) {
            throw std::runtime_error("silver topics line " + std::to_string(line_no) +
                                     ": query required");
        }
        s.topic.query = rec["query"].get<std::string>();
        if (!rec.contains("description") || !rec["description"].is_string() ||
            rec["description"].get<std::string>().empty()) {
            throw std::runtime_error("silver topics line " + std::to_string(line_no) +
                                     ": description required");
        }
        s.topic.description = rec["description"].get<std::string>();
        if (!rec.contains("target_doc_id") || !rec["target_doc_id"].is_string() ||
            rec["target_doc_id"].get<std::string>().empty()) {
            throw std::runtime_error("silver topics line " + std::to_string(line_no) +
                                     ": target_doc_id required");
        }
        s.target_doc_id = rec["target_doc_id"].get<std::string>();
        silver.push_back(std::move(s));
    }
    return silver;
}

double mean_reciprocal_rank(const InvertedIndex& index, const Bm25Params& params,
                            const std::vector<SilverTopic>& silver, std::size_t depth) {
    if (silver.empty()) throw std::invalid_argument("silver topic set is empty");
    double sum = 0.0;
    for (const SilverTopic& s : silver) {
        std::vector<ScoredDoc> hits = index.search(params, topic_query_tokens(s.topic), depth);
        for (std::size_t i = 0; i < hits.size(); ++i) {
            if (hits[i].doc_id == s.target_doc_id) {
                sum += 1.0 / static_cast<double>(i + 1);
                break;
            }
        }
    }
    return sum / static_cast<double>(silver.size());
}

TuneResult tune_params(const InvertedIndex& index, const std::vector<SilverTopic>& silver,
                       const std::vector<Bm25Params>& grid, std::size_t depth) {
    if (grid.empty()) throw std::invalid_argument("tuning grid is empty");
    if (silver.empty()) throw std::invalid_argument("silver topic set is empty");
    for (const SilverTopic& s : silver) {
        if (!index.contains(s.target_doc_id)) {
            throw std::runtime_error("silver target not in index: " + s.target_doc_id);
        }
    }
    for (const Bm25Params& params : grid) validate_params(params);

    std::vector<double> mrrs(grid.size(), 0.0);
    const std::size_t workers =
        std::min<std::size_t>(grid.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::future<void>> futures;
    futures.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        futures.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < grid.size(); i += workers) {
                mrrs[i] = mean_reciprocal_rank(index, grid[i], silver, depth);
            }
        }));
    }
    for (auto& f : futures) f.get();

    // Strict comparison keeps the first grid point on ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (mrrs[i] > mrrs[best]) best = i;
    }
    return TuneResult{grid[best], mrrs[best]};
}

std::vector<Bm25Params> make_grid(const std::vector<double>& k1_values,
                                  const std::vector<double>& b_values) {
    std::vector<Bm25Params> grid;
    grid.reserve(k1_values.size() * b_values.size());
    for (double k1 : k1_values) {
        for (double b : b_values) {
            Bm25Params params{k1, b};
            validate_params(params);
            grid.push_back(params);
        }
    }
    return grid;
}

std::vector<Bm25Params> default_grid() {
    std::vector<double> k1_values;
    for (double k1 = 0.1; k1 <= 3.0 + 1e-9; k1 += 0.2) k1_values.push_back(k1);
    std::vector<double> b_values;
    for (int i = 0; i <= 10; ++i) b_values.push_back(i / 10.0);
    return make_grid(k1_values, b_values);
}

}  // namespace misir
