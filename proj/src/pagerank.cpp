#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "misir/credibility.hpp"

namespace misir {

namespace {

using nlohmann::json;

std::string url_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        const bool unreserved = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                                (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' ||
                                c == '~';
        if (unreserved) {
            out.push_back(c);
        } else {
            out.push_back('%');
            out.push_back(hex[(static_cast<unsigned char>(c) >> 4) & 0xF]);
            out.push_back(hex[static_cast<unsigned char>(c) & 0xF]);
        }
    }
    return out;
}

std::optional<double> rank_from_entry(const json& entry) {
    if (entry.contains("status_code") && entry["status_code"].is_number_integer() &&
        entry["status_code"].get<int>() != 200) {
        return std::nullopt;
    }
    if (!entry.contains("page_rank_decimal")) return std::nullopt;
    const json& value = entry["page_rank_decimal"];
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        try {
            return std::stod(value.get<std::string>());
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

PageRankClient::PageRankClient(Config config) : config_(std::move(config)) {
    if (config_.mode == Mode::fixture) {
        std::ifstream in(config_.fixture_file, std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot open pagerank fixture: " +
                                     config_.fixture_file.string());
        }
        json fixture = json::parse(in);
        if (!fixture.is_object()) {
            throw std::runtime_error("pagerank fixture must be a JSON object of domain -> rank");
        }
        for (auto& [domain, rank] : fixture.items()) {
            cache_[domain] = PageRankResult{rank.get<double>(), false};
        }
    } else {
        if (config_.endpoint.empty()) {
            throw std::runtime_error("pagerank live mode requires an endpoint");
        }
        if (config_.endpoint.rfind("https://", 0) == 0) {
            throw std::runtime_error(
                "pagerank live mode speaks plain http; put a TLS-terminating proxy in front "
                "of https endpoints");
        }
    }
}

PageRankResult PageRankClient::fetch(const std::string& domain) {
    auto cached = cache_.find(domain);
    if (cached != cache_.end()) return cached->second;
    if (config_.mode == Mode::fixture) {
        // Fixture mode never errors: unknown domains are missing.
        PageRankResult result{0.0, true};
        cache_[domain] = result;
        return result;
    }
    fetch_live_batch({domain});
    return cache_.at(domain);
}

std::map<std::string, PageRankResult> PageRankClient::fetch_many(
    const std::vector<std::string>& domains) {
    std::vector<std::string> pending;
    for (const std::string& domain : domains) {
        if (cache_.find(domain) == cache_.end()) pending.push_back(domain);
    }
    if (config_.mode == Mode::fixture) {
        for (const std::string& domain : pending) cache_[domain] = PageRankResult{0.0, true};
    } else {
        for (std::size_t i = 0; i < pending.size(); i += config_.batch_size) {
            const std::size_t end = std::min(pending.size(), i + config_.batch_size);
            fetch_live_batch({pending.begin() + static_cast<std::ptrdiff_t>(i),
                              pending.begin() + static_cast<std::ptrdiff_t>(end)});
        }
    }
    std::map<std::string, PageRankResult> out;
    for (const std::string& domain : domains) out[domain] = cache_.at(domain);
    return out;
}

void PageRankClient::fetch_live_batch(const std::vector<std::string>& domains) {
    const char* key = std::getenv(config_.key_env.c_str());
    if (!key || !*key) {
        throw std::runtime_error("pagerank API key environment variable " + config_.key_env +
                                 " is not set");
    }

    std::string path = config_.request_path;
    char sep = path.find('?') == std::string::npos ? '?' : '&';
    for (const std::string& domain : domains) {
        path += sep;
        path += "domains%5B%5D=";
        path += url_encode(domain);
        sep = '&';
    }

    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    httplib::Headers headers{{config_.key_header, key}};
    httplib::Result res = client.Get(path, headers);
    if (!res) {
        throw std::runtime_error("pagerank request failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
        throw std::runtime_error("pagerank endpoint rejected the API key (status " +
                                 std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
        throw std::runtime_error("pagerank endpoint returned status " +
                                 std::to_string(res->status));
    }

    json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("response") || !body["response"].is_array()) {
        throw std::runtime_error("pagerank endpoint returned an unparseable body");
    }
    std::map<std::string, PageRankResult> batch;
    for (const json& entry : body["response"]) {
        if (!entry.contains("domain") || !entry["domain"].is_string()) continue;
        auto rank = rank_from_entry(entry);
        batch[entry["domain"].get<std::string>()] =
            rank ? PageRankResult{*rank, false} : PageRankResult{0.0, true};
    }
    for (const std::string& domain : domains) {
        auto it = batch.find(domain);
        cache_[domain] = it != batch.end() ? it->second : PageRankResult{0.0, true};
    }
}

}  // namespace misir
