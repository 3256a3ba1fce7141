#include <doctest.h>

#include <cmath>
#include <random>

#include "misir/retrieval.hpp"
#include "test_util.hpp"

using namespace misir;
using misir::test::TempDir;
using misir::test::read_file;
using misir::test::write_file;

TEST_SUITE_BEGIN("retrieval");

namespace {

std::string doc_line(const std::string& id, const std::string& text) {
    return R"({"doc_id": ")" + id + R"(", "url": "http://)" + id +
           R"(.example.org/", "html": ")" + text + R"("})" + "\n";
}

CorpusStore store_from_texts(const TempDir& tmp,
                             const std::vector<std::pair<std::string, std::string>>& docs,
                             const std::string& name = "corpus.jsonl") {
    std::string jsonl;
    for (const auto& [id, text] : docs) jsonl += doc_line(id, text);
    write_file(tmp / name, jsonl);
    return CorpusStore::ingest(tmp / name, CorpusFormat::jsonl, tmp / (name + ".store"));
}

// Formula evaluated directly from hand-supplied statistics, independent of
// the index implementation.
double bm25_oracle_term(double tf, double df, double doc_len, double avg_len, double num_docs,
                        double k1, double b) {
    if (tf == 0.0) return 0.0;
    const double idf = std::log(1.0 + (num_docs - df + 0.5) / (df + 0.5));
    return idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc_len / avg_len));
}

Topic make_topic(int id, const std::string& query, const std::string& description) {
    Topic t;
    t.topic_id = id;
    t.query = query;
    t.description = description;
    return t;
}

}  // namespace

TEST_CASE("one-doc index exposes hand-built postings") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(tmp, {{"d1", "a b a"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    CHECK(index.num_docs() == 1);
    CHECK(index.term_frequency("a", "d1") == 2);
    CHECK(index.term_frequency("b", "d1") == 1);
    CHECK(index.doc_frequency("a") == 1);
    CHECK(index.doc_length("d1") == 3);
    CHECK(index.avg_doc_length() == doctest::Approx(3.0));
}

TEST_CASE("empty corpus cannot be indexed") {
    TempDir tmp;
    write_file(tmp / "empty.jsonl", "");
    CorpusStore corpus = CorpusStore::ingest(tmp / "empty.jsonl", CorpusFormat::jsonl,
                                             tmp / "store");
    CHECK_THROWS_AS(InvertedIndex::build(corpus), std::runtime_error);
}

TEST_CASE("average doc length is the arithmetic mean") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(tmp, {{"d1", "a b"}, {"d2", "c d e f"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    CHECK(index.avg_doc_length() == doctest::Approx(3.0));
}

TEST_CASE("postings tie out with doc lengths") {
    TempDir tmp;
    CorpusStore corpus =
        store_from_texts(tmp, {{"d1", "x y x z"}, {"d2", "y y y"}, {"d3", "z"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    for (const std::string& doc : {"d1", "d2", "d3"}) {
        std::uint32_t total = 0;
        for (const std::string& term : {"x", "y", "z"}) {
            total += index.term_frequency(term, doc);
        }
        CHECK(total == index.doc_length(doc));
    }
}

TEST_CASE("bm25 matches the brute-force formula oracle on a 3-doc fixture") {
    // Doc token counts, by hand:
    //   d1 "achilles brace achilles heel"        len 4, achilles x2, brace x1
    //   d2 "brace support brace brace wrap"      len 5, brace x3
    //   d3 "running shoes help heel pain"        len 5, neither term
    TempDir tmp;
    CorpusStore corpus = store_from_texts(tmp, {{"d1", "achilles brace achilles heel"},
                                                {"d2", "brace support brace brace wrap"},
                                                {"d3", "running shoes help heel pain"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    const Bm25Params params{0.9, 0.4};
    const double avg = 14.0 / 3.0;

    const double d1_expect = bm25_oracle_term(2, 1, 4, avg, 3, 0.9, 0.4) +  // achilles
                             bm25_oracle_term(1, 2, 4, avg, 3, 0.9, 0.4);   // brace
    const double d2_expect = bm25_oracle_term(0, 1, 5, avg, 3, 0.9, 0.4) +
                             bm25_oracle_term(3, 2, 5, avg, 3, 0.9, 0.4);
    const std::vector<std::string> query{"achilles", "brace"};
    CHECK(index.bm25_score(params, query, "d1") == doctest::Approx(d1_expect).epsilon(1e-12));
    CHECK(index.bm25_score(params, query, "d2") == doctest::Approx(d2_expect).epsilon(1e-12));
    CHECK(index.bm25_score(params, query, "d3") == 0.0);
}

TEST_CASE("query terms absent from the doc contribute nothing") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(tmp, {{"d1", "alpha beta"}, {"d2", "gamma"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    const Bm25Params params;
    const double alpha_only = index.bm25_score(params, {"alpha"}, "d1");
    CHECK(index.bm25_score(params, {"alpha", "missing"}, "d1") ==
          doctest::Approx(alpha_only));
    CHECK(index.bm25_score(params, {"missing", "unknown"}, "d1") == 0.0);
}

TEST_CASE("b=0 removes the length dependence") {
    TempDir tmp;
    // Same tf for "term" in a short and a much longer doc.
    CorpusStore corpus = store_from_texts(
        tmp, {{"d1", "term other"},
              {"d2", "term pad pad pad pad pad pad pad pad pad pad pad pad pad"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    const double short_score = index.bm25_score({0.9, 0.0}, {"term"}, "d1");
    const double long_score = index.bm25_score({0.9, 0.0}, {"term"}, "d2");
    CHECK(short_score == doctest::Approx(long_score).epsilon(1e-12));
    // while with b > 0 the longer doc scores strictly lower
    CHECK(index.bm25_score({0.9, 0.75}, {"term"}, "d2") <
          index.bm25_score({0.9, 0.75}, {"term"}, "d1"));
}

TEST_CASE("unknown doc_id is an error") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(tmp, {{"d1", "a"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    CHECK_THROWS_AS((void)index.bm25_score({}, {"a"}, "nope"), std::out_of_range);
    CHECK_THROWS_AS((void)index.doc_length("nope"), std::out_of_range);
}

TEST_CASE("duplicated query tokens contribute per occurrence") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(tmp, {{"d1", "a b"}, {"d2", "b c"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    const Bm25Params params;
    CHECK(index.bm25_score(params, {"a", "a"}, "d1") ==
          doctest::Approx(2.0 * index.bm25_score(params, {"a"}, "d1")));
}

TEST_CASE("search ranks by score with doc_id tie-break and drops zero scores") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(
        tmp, {{"d2", "apple pie"}, {"d1", "apple pie"}, {"d3", "banana split"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    std::vector<ScoredDoc> hits = index.search({0.9, 0.4}, {"apple"}, 10);
    REQUIRE(hits.size() == 2);  // d3 never scores
    CHECK(hits[0].doc_id == "d1");  // identical scores, ascending doc_id
    CHECK(hits[1].doc_id == "d2");
    CHECK(hits[0].score == doctest::Approx(hits[1].score));
}

TEST_CASE("search equals the exhaustive scoring oracle") {
    TempDir tmp;
    std::mt19937 rng(11);
    const std::vector<std::string> vocab{"ache", "brace", "cast", "dose", "ease",
                                         "flex", "gel",   "heal", "ice",  "joint"};
    std::vector<std::pair<std::string, std::string>> docs;
    for (int d = 0; d < 40; ++d) {
        std::string text;
        const std::size_t len = 3 + rng() % 20;
        for (std::size_t i = 0; i < len; ++i) {
            text += vocab[rng() % vocab.size()];
            text.push_back(' ');
        }
        char id[8];
        std::snprintf(id, sizeof(id), "d%02d", d);
        docs.emplace_back(id, text);
    }
    CorpusStore corpus = store_from_texts(tmp, docs);
    InvertedIndex index = InvertedIndex::build(corpus);
    const Bm25Params params{1.2, 0.75};
    const std::vector<std::string> query{"brace", "heal", "ice"};

    std::vector<ScoredDoc> expected;
    for (const auto& [id, text] : docs) {
        const double score = index.bm25_score(params, query, id);
        if (score > 0.0) expected.push_back({id, score});
    }
    std::sort(expected.begin(), expected.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });

    std::vector<ScoredDoc> hits = index.search(params, query, docs.size());
    REQUIRE(hits.size() == expected.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
        CHECK(hits[i].doc_id == expected[i].doc_id);
        CHECK(hits[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
    }
    // scores never increase down the ranking
    for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i].score <= hits[i - 1].score);

    // depth truncation keeps the prefix
    std::vector<ScoredDoc> top3 = index.search(params, query, 3);
    REQUIRE(top3.size() == 3);
    for (std::size_t i = 0; i < top3.size(); ++i) CHECK(top3[i].doc_id == hits[i].doc_id);
}

TEST_CASE("index save/load round-trips and rebuilds identically") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(
        tmp, {{"d1", "ankle brace helps."}, {"d2", "brace for impact"}, {"d3", "nothing"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    index.save(tmp / "idx1");
    InvertedIndex reloaded = InvertedIndex::load(tmp / "idx1");
    CHECK(reloaded.num_docs() == index.num_docs());
    CHECK(reloaded.avg_doc_length() == doctest::Approx(index.avg_doc_length()));
    const std::vector<std::string> query{"brace", "ankle"};
    std::vector<ScoredDoc> a = index.search({0.9, 0.4}, query, 10);
    std::vector<ScoredDoc> b = reloaded.search({0.9, 0.4}, query, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].doc_id == b[i].doc_id);
        CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-15));
    }

    InvertedIndex::build(corpus).save(tmp / "idx2");
    CHECK(read_file(tmp / "idx1" / "index.json") == read_file(tmp / "idx2" / "index.json"));
}

TEST_CASE("search_topics builds contiguous ranks per topic") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(
        tmp, {{"d1", "ankle brace"}, {"d2", "ankle support"}, {"d3", "unrelated words"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    std::vector<Topic> topics{make_topic(1, "ankle", "brace"),
                              make_topic(2, "missingterm", "absent")};
    RankedRun run = search_topics(index, {0.9, 0.4}, topics, 10, "bm25");
    REQUIRE(run.topics.count(1) == 1);
    CHECK(run.topics.count(2) == 0);  // nothing scored
    const auto& entries = run.topics.at(1);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        CHECK(entries[i].rank == static_cast<int>(i + 1));
    }
    validate_run(run);
}

TEST_CASE("mrr fixtures: upper bound, lower bound, mixed ranks") {
    TempDir tmp;
    // target "t1" is the only doc with "zebra"; target "t2" shares "yak"
    // with a doc that repeats it, so t2 lands at rank 2.
    CorpusStore corpus = store_from_texts(tmp, {{"a1", "yak yak yak yak"},
                                                {"t1", "zebra zebra"},
                                                {"t2", "yak calm words"}});
    InvertedIndex index = InvertedIndex::build(corpus);

    std::vector<SilverTopic> silver;
    silver.push_back({make_topic(1, "zebra", "zebra"), "t1"});
    silver.push_back({make_topic(2, "yak", "yak"), "t2"});

    SUBCASE("ranks 1 and 2 average to 0.75") {
        CHECK(mean_reciprocal_rank(index, {0.9, 0.4}, silver, 10) == doctest::Approx(0.75));
    }
    SUBCASE("all targets first gives mrr 1.0") {
        std::vector<SilverTopic> easy{{make_topic(1, "zebra", "zebra"), "t1"}};
        CHECK(mean_reciprocal_rank(index, {0.9, 0.4}, easy, 10) == doctest::Approx(1.0));
    }
    SUBCASE("never-retrieved targets give mrr 0 and the first grid point") {
        std::vector<SilverTopic> invisible{{make_topic(1, "quartz", "quartz"), "t1"}};
        std::vector<Bm25Params> grid{{0.5, 0.0}, {1.5, 0.5}};
        TuneResult result = tune_params(index, invisible, grid, 10);
        CHECK(result.mrr == 0.0);
        CHECK(result.params.k1 == doctest::Approx(0.5));
        CHECK(result.params.b == doctest::Approx(0.0));
    }
}

TEST_CASE("tune_params returns the grid member maximizing mrr") {
    TempDir tmp;
    // Under b=0 the longer doc with more repetitions wins; under high b the
    // short target doc wins. Hand-checked with the bm25 formula.
    CorpusStore corpus = store_from_texts(
        tmp, {{"t1", "apple banana"},
              {"x1", "apple apple apple pad pad pad pad pad pad pad pad pad pad pad pad pad "
                     "pad pad pad pad pad pad pad pad pad pad pad pad pad pad"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    std::vector<SilverTopic> silver{{make_topic(1, "apple", "apple"), "t1"}};

    std::vector<Bm25Params> grid{{0.9, 0.0}, {0.9, 0.9}};  // loser first
    TuneResult result = tune_params(index, silver, grid, 10);
    CHECK(result.params.b == doctest::Approx(0.9));
    CHECK(result.mrr == doctest::Approx(1.0));

    SUBCASE("result is always a grid member") {
        bool member = false;
        for (const Bm25Params& p : grid) {
            member = member || (p.k1 == result.params.k1 && p.b == result.params.b);
        }
        CHECK(member);
    }
}

TEST_CASE("tune_params validates inputs") {
    TempDir tmp;
    CorpusStore corpus = store_from_texts(tmp, {{"d1", "a"}});
    InvertedIndex index = InvertedIndex::build(corpus);
    std::vector<SilverTopic> silver{{make_topic(1, "a", "a"), "d1"}};
    CHECK_THROWS_AS(tune_params(index, silver, {}, 10), std::invalid_argument);
    CHECK_THROWS_AS(tune_params(index, {}, default_grid(), 10), std::invalid_argument);
    std::vector<SilverTopic> bad{{make_topic(1, "a", "a"), "ghost"}};
    CHECK_THROWS_AS(tune_params(index, bad, default_grid(), 10), std::runtime_error);
}

TEST_CASE("bm25 params are validated") {
    CHECK_THROWS_AS(validate_params({-0.1, 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(validate_params({0.9, 1.2}), std::invalid_argument);
    CHECK_NOTHROW(validate_params({0.0, 0.0}));
    CHECK_NOTHROW(validate_params({0.9, 1.0}));
}

TEST_CASE("default grid spans the documented ranges") {
    std::vector<Bm25Params> grid = default_grid();
    CHECK(grid.size() == 15 * 11);
    CHECK(grid.front().k1 == doctest::Approx(0.1));
    CHECK(grid.front().b == doctest::Approx(0.0));
    CHECK(grid.back().k1 == doctest::Approx(2.9));
    CHECK(grid.back().b == doctest::Approx(1.0));
}

TEST_SUITE_END();
