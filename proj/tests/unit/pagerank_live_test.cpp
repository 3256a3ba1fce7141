#include <doctest.h>

#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "misir/credibility.hpp"

using namespace misir;
using nlohmann::json;

TEST_SUITE_BEGIN("pagerank_live");

namespace {

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server.Get("/api/v1.0/getPageRank", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread.join();
    }
};

PageRankClient::Config live_config(int port) {
    PageRankClient::Config config;
    config.mode = PageRankClient::Mode::live;
    config.endpoint = "http://127.0.0.1:" + std::to_string(port);
    config.key_env = "MISIR_TEST_PAGERANK_KEY";
    return config;
}

}  // namespace

TEST_CASE("live mode parses ranks and batches the request") {
    LocalServer server([](const httplib::Request& req, httplib::Response& res) {
        if (req.get_header_value("API-OPR") != "good-key") {
            res.status = 401;
            return;
        }
        json response = json::array();
        for (const auto& [key, value] : req.params) {
            if (key != "domains[]") continue;
            if (value == "example.org") {
                response.push_back({{"domain", value},
                                    {"status_code", 200},
                                    {"page_rank_decimal", 4.5}});
            } else {
                response.push_back(
                    {{"domain", value}, {"status_code", 404}, {"page_rank_decimal", ""}});
            }
        }
        res.set_content(json{{"response", response}}.dump(), "application/json");
    });
    setenv("MISIR_TEST_PAGERANK_KEY", "good-key", 1);

    PageRankClient client(live_config(server.port));
    auto results = client.fetch_many({"example.org", "nowhere.test"});
    CHECK(results.at("example.org").rank == doctest::Approx(4.5));
    CHECK_FALSE(results.at("example.org").missing);
    CHECK(results.at("nowhere.test").missing);
    CHECK(results.at("nowhere.test").rank == 0.0);

    // second fetch is served from the cache even if the server vanished
    PageRankResult cached = client.fetch("example.org");
    CHECK(cached.rank == doctest::Approx(4.5));
}

TEST_CASE("a rejected api key surfaces as an auth error, never a silent zero") {
    LocalServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 401;
    });
    setenv("MISIR_TEST_PAGERANK_KEY", "bad-key", 1);
    PageRankClient client(live_config(server.port));
    CHECK_THROWS_WITH_AS(client.fetch("example.org"),
                         "pagerank endpoint rejected the API key (status 401)",
                         std::runtime_error);
}

TEST_CASE("a missing api key env var is an error") {
    LocalServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 200;
    });
    unsetenv("MISIR_TEST_PAGERANK_KEY");
    PageRankClient client(live_config(server.port));
    CHECK_THROWS_AS(client.fetch("example.org"), std::runtime_error);
}

TEST_CASE("an unreachable endpoint is a transport error") {
    setenv("MISIR_TEST_PAGERANK_KEY", "key", 1);
    PageRankClient::Config config = live_config(1);  // nothing listens on port 1
    PageRankClient client(config);
    CHECK_THROWS_AS(client.fetch("example.org"), std::runtime_error);
}

TEST_CASE("https endpoints are rejected with a clear message") {
    PageRankClient::Config config;
    config.mode = PageRankClient::Mode::live;
    config.endpoint = "https://api.example.com";
    CHECK_THROWS_AS(PageRankClient{config}, std::runtime_error);
}

TEST_SUITE_END();
