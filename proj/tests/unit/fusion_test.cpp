#include <doctest.h>

#include <algorithm>
#include <random>

#include "misir/fusion.hpp"
#include "test_util.hpp"

using namespace misir;
using misir::test::TempDir;
using misir::test::write_file;

TEST_SUITE_BEGIN("fusion");

namespace {

RankedRun run_of(const std::string& tag, int topic, const std::vector<std::string>& docs) {
    RankedRun run;
    run.tag = tag;
    std::vector<std::pair<std::string, double>> scored;
    double score = static_cast<double>(docs.size());
    for (const std::string& doc : docs) scored.emplace_back(doc, score--);
    run.topics[topic] = make_run_slice(scored);
    return run;
}

// Exhaustive (doc, run, rank) summation, kept separate from rrf_fuse.
std::map<std::string, double> rrf_oracle(const std::vector<RankedRun>& runs, int topic,
                                         double k) {
    std::map<std::string, double> scores;
    for (const RankedRun& run : runs) {
        auto it = run.topics.find(topic);
        if (it == run.topics.end()) continue;
        for (const RunEntry& e : it->second) {
            scores[e.doc_id] += 1.0 / (k + static_cast<double>(e.rank));
        }
    }
    return scores;
}

}  // namespace

TEST_CASE("fusing a single run preserves its ordering with 1/(60+rank) scores") {
    RankedRun input = run_of("solo", 1, {"a", "c", "b"});
    RankedRun fused = rrf_fuse({input}, RrfConfig{}, 100, "fused");
    const auto& entries = fused.topics.at(1);
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].doc_id == "a");
    CHECK(entries[1].doc_id == "c");
    CHECK(entries[2].doc_id == "b");
    CHECK(entries[0].score == doctest::Approx(1.0 / 61.0).epsilon(1e-15));
    CHECK(entries[2].score == doctest::Approx(1.0 / 63.0).epsilon(1e-15));
}

TEST_CASE("two first-place votes beat one") {
    // "both" is rank 1 in two runs (2/61), "solo" rank 1 in one run (1/61)
    RankedRun r1 = run_of("r1", 7, {"both"});
    RankedRun r2 = run_of("r2", 7, {"both"});
    RankedRun r3 = run_of("r3", 7, {"solo"});
    RankedRun fused = rrf_fuse({r1, r2, r3}, RrfConfig{}, 10, "f");
    const auto& entries = fused.topics.at(7);
    CHECK(entries[0].doc_id == "both");
    CHECK(entries[0].score == doctest::Approx(2.0 / 61.0).epsilon(1e-15));  // 0.032787
    CHECK(entries[1].doc_id == "solo");
    CHECK(entries[1].score == doctest::Approx(1.0 / 61.0).epsilon(1e-15));  // 0.016393
}

TEST_CASE("a doc at ranks 1 and 3 scores 1/61 + 1/63") {
    RankedRun r1 = run_of("r1", 1, {"d", "x", "y"});
    RankedRun r2 = run_of("r2", 1, {"x", "y", "d"});
    RankedRun fused = rrf_fuse({r1, r2}, RrfConfig{}, 10, "f");
    double score_d = 0.0;
    for (const RunEntry& e : fused.topics.at(1)) {
        if (e.doc_id == "d") score_d = e.score;
    }
    CHECK(score_d == doctest::Approx(1.0 / 61.0 + 1.0 / 63.0).epsilon(1e-15));
    // against the independent summation oracle
    CHECK(score_d == doctest::Approx(rrf_oracle({r1, r2}, 1, 60.0).at("d")).epsilon(1e-15));
}

TEST_CASE("fusion equals the brute-force oracle on random instances") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t num_runs = 1 + rng() % 4;
        std::vector<RankedRun> runs;
        for (std::size_t r = 0; r < num_runs; ++r) {
            std::vector<std::string> docs;
            for (int d = 0; d < 20; ++d) docs.push_back("doc" + std::to_string(d));
            std::shuffle(docs.begin(), docs.end(), rng);
            docs.resize(1 + rng() % docs.size());
            runs.push_back(run_of("r" + std::to_string(r), 1, docs));
        }
        RankedRun fused = rrf_fuse(runs, RrfConfig{}, 100, "f");
        auto oracle = rrf_oracle(runs, 1, 60.0);
        const auto& entries = fused.topics.at(1);
        REQUIRE(entries.size() == oracle.size());
        for (const RunEntry& e : entries) {
            CHECK(e.score == doctest::Approx(oracle.at(e.doc_id)).epsilon(1e-12));
        }
        for (std::size_t i = 1; i < entries.size(); ++i) {
            CHECK(entries[i].score <= entries[i - 1].score);
        }

        // permutation invariance on the same trial
        std::vector<RankedRun> shuffled = runs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        RankedRun refused = rrf_fuse(shuffled, RrfConfig{}, 100, "f");
        REQUIRE(refused.topics.at(1).size() == entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            CHECK(refused.topics.at(1)[i].doc_id == entries[i].doc_id);
            CHECK(refused.topics.at(1)[i].score == entries[i].score);
        }
    }
}

TEST_CASE("fusing a run with itself preserves its ordering") {
    RankedRun input = run_of("r", 1, {"c", "a", "b"});
    RankedRun fused = rrf_fuse({input, input}, RrfConfig{}, 10, "f");
    const auto& entries = fused.topics.at(1);
    CHECK(entries[0].doc_id == "c");
    CHECK(entries[1].doc_id == "a");
    CHECK(entries[2].doc_id == "b");
}

TEST_CASE("k never swaps two docs of a single run") {
    RankedRun input = run_of("r", 1, {"first", "second"});
    for (double k : {0.5, 1.0, 10.0, 60.0, 1000.0}) {
        RankedRun fused = rrf_fuse({input}, RrfConfig{k}, 10, "f");
        CHECK(fused.topics.at(1)[0].doc_id == "first");
    }
}

TEST_CASE("fusion covers the union of topics") {
    RankedRun r1 = run_of("r1", 1, {"a"});
    RankedRun r2 = run_of("r2", 2, {"b"});
    RankedRun fused = rrf_fuse({r1, r2}, RrfConfig{}, 10, "f");
    CHECK(fused.topics.size() == 2);
    CHECK(fused.topics.at(1)[0].doc_id == "a");
    CHECK(fused.topics.at(2)[0].doc_id == "b");
}

TEST_CASE("depth truncates the fused output") {
    RankedRun input = run_of("r", 1, {"a", "b", "c", "d", "e"});
    RankedRun fused = rrf_fuse({input}, RrfConfig{}, 2, "f");
    CHECK(fused.topics.at(1).size() == 2);
}

TEST_CASE("ties break by ascending doc_id") {
    RankedRun r1 = run_of("r1", 1, {"z", "m"});
    RankedRun r2 = run_of("r2", 1, {"m", "z"});
    RankedRun fused = rrf_fuse({r1, r2}, RrfConfig{}, 10, "f");
    CHECK(fused.topics.at(1)[0].doc_id == "m");  // equal sums
    CHECK(fused.topics.at(1)[0].score == doctest::Approx(fused.topics.at(1)[1].score));
}

TEST_CASE("an empty run list and bad parameters are errors") {
    CHECK_THROWS_AS(rrf_fuse({}, RrfConfig{}, 10, "f"), std::invalid_argument);
    RankedRun input = run_of("r", 1, {"a"});
    CHECK_THROWS_AS(rrf_fuse({input}, RrfConfig{0.0}, 10, "f"), std::invalid_argument);
    CHECK_THROWS_AS(rrf_fuse({input}, RrfConfig{}, 0, "f"), std::invalid_argument);
}

namespace {

RunLoader failing_loader() {
    return [](const std::filesystem::path& path) -> RankedRun {
        throw std::runtime_error("cannot open run file: " + path.string());
    };
}

}  // namespace

TEST_CASE("run1 composes as a 3-way fusion of its components") {
    std::map<std::string, RankedRun> available;
    available["bm25"] = run_of("bm25", 1, {"a", "b", "c"});
    available["supp_roberta"] = run_of("s", 1, {"b", "a"});
    available["cred_forest"] = run_of("c", 1, {"c", "a"});

    RankedRun composed = compose_model("run1", default_model_graph(), available,
                                       failing_loader(), RrfConfig{}, 100);
    CHECK(composed.tag == "run1");
    auto oracle = rrf_oracle({available["bm25"], available["supp_roberta"],
                              available["cred_forest"]},
                             1, 60.0);
    const auto& entries = composed.topics.at(1);
    REQUIRE(entries.size() == oracle.size());
    for (const RunEntry& e : entries) {
        CHECK(e.score == doctest::Approx(oracle.at(e.doc_id)).epsilon(1e-12));
    }
}

TEST_CASE("run7 composes as a flat 10-way fusion of the individual models") {
    std::map<std::string, RankedRun> available;
    const std::vector<std::string> leaves{
        "bm25",         "bm25_tuned",   "bert_base",    "monobert",
        "electra",      "supp_roberta", "supp_biomedroberta", "supp_scibert",
        "cred_forest",  "cred_forest_sites"};
    std::mt19937 rng(4);
    std::vector<RankedRun> inputs;
    for (const std::string& leaf : leaves) {
        std::vector<std::string> docs{"a", "b", "c", "d"};
        std::shuffle(docs.begin(), docs.end(), rng);
        available[leaf] = run_of(leaf, 1, docs);
        inputs.push_back(available[leaf]);
    }
    RankedRun composed = compose_model("run7", default_model_graph(), available,
                                       failing_loader(), RrfConfig{}, 100);
    auto oracle = rrf_oracle(inputs, 1, 60.0);
    for (const RunEntry& e : composed.topics.at(1)) {
        CHECK(e.score == doctest::Approx(oracle.at(e.doc_id)).epsilon(1e-12));
    }
}

TEST_CASE("intermediates are fused bottom-up") {
    std::map<std::string, RankedRun> available;
    available["bm25"] = run_of("bm25", 1, {"a", "b"});
    available["bert_base"] = run_of("u1", 1, {"b", "a"});
    available["monobert"] = run_of("u2", 1, {"a", "b"});
    available["electra"] = run_of("u3", 1, {"b", "a"});

    RankedRun m3 = compose_model("m3", default_model_graph(), available, failing_loader(),
                                 RrfConfig{}, 100);
    RankedRun m4 = compose_model("m4", default_model_graph(), available, failing_loader(),
                                 RrfConfig{}, 100);
    // m4 = rrf(bm25, m3), so its oracle uses the composed m3 ranking
    auto oracle = rrf_oracle({available["bm25"], m3}, 1, 60.0);
    for (const RunEntry& e : m4.topics.at(1)) {
        CHECK(e.score == doctest::Approx(oracle.at(e.doc_id)).epsilon(1e-12));
    }
}

TEST_CASE("aliases resolve to their targets") {
    std::map<std::string, RankedRun> available;
    available["bm25"] = run_of("bm25", 1, {"x", "y"});
    RankedRun m1 = compose_model("m1", default_model_graph(), available, failing_loader(),
                                 RrfConfig{}, 100);
    CHECK(m1.tag == "m1");
    REQUIRE(m1.topics.count(1) == 1);
    CHECK(m1.topics.at(1)[0].doc_id == "x");
    CHECK(m1.topics.at(1)[0].score == doctest::Approx(2.0));  // scores pass through
}

TEST_CASE("a missing component names the model id") {
    std::map<std::string, RankedRun> available;
    available["m2"] = run_of("m2", 1, {"a"});
    available["m9"] = run_of("m9", 1, {"b"});
    // m6's inputs are nowhere to be found
    try {
        compose_model("run2", default_model_graph(), available, failing_loader(), RrfConfig{},
                      100);
        FAIL("expected MissingModelError");
    } catch (const MissingModelError& e) {
        CHECK(e.model_id == "m6");
        CHECK(std::string(e.what()).find("missing model m6") != std::string::npos);
    }

    CHECK_THROWS_AS(compose_model("no_such_model", default_model_graph(), available,
                                  failing_loader(), RrfConfig{}, 100),
                    MissingModelError);
}

TEST_CASE("file nodes load through the loader") {
    TempDir tmp;
    write_file(tmp / "ext.run", "1 Q0 a 1 2.000000 ext\n1 Q0 b 2 1.000000 ext\n");
    ModelGraph graph = default_model_graph();
    ModelNode node;
    node.kind = ModelNode::Kind::file;
    node.file = tmp / "ext.run";
    graph["external"] = node;

    RankedRun run = compose_model(
        "external", graph, {}, [](const std::filesystem::path& p) { return load_run(p); },
        RrfConfig{}, 100);
    CHECK(run.tag == "external");
    CHECK(run.topics.at(1).size() == 2);

    SUBCASE("a file node with no path is missing") {
        ModelNode empty;
        empty.kind = ModelNode::Kind::file;
        graph["ghost"] = empty;
        CHECK_THROWS_AS(compose_model("ghost", graph, {},
                                      [](const std::filesystem::path& p) { return load_run(p); },
                                      RrfConfig{}, 100),
                        MissingModelError);
    }
}

TEST_SUITE_END();
