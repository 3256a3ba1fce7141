#include "misir/config.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace misir {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& path) {
    if (path.empty() || path.is_absolute()) return path;
    return base / path;
}

std::filesystem::path get_path(const json& obj, const char* key,
                               const std::filesystem::path& base,
                               const std::filesystem::path& fallback = {}) {
    if (!obj.contains(key)) return fallback.empty() ? fallback : resolve(base, fallback);
    return resolve(base, std::filesystem::path(obj[key].get<std::string>()));
}

Bm25Params parse_params(const json& obj) {
    Bm25Params params;
    params.k1 = obj.at("k1").get<double>();
    params.b = obj.at("b").get<double>();
    validate_params(params);
    return params;
}

}  // namespace

std::filesystem::path PipelineConfig::run_file_for(const std::string& model_id) const {
    auto it = model_files.find(model_id);
    if (it != model_files.end()) return it->second;
    const auto& own = producible_model_ids();
    if (std::find(own.begin(), own.end(), model_id) != own.end()) {
        return output_dir / (model_id + ".run");
    }
    return {};
}

const std::vector<std::string>& producible_model_ids() {
    static const std::vector<std::string> ids{
        "bm25",         "bm25_tuned",        "supp_roberta", "supp_biomedroberta",
        "supp_scibert", "cred_forest",       "cred_forest_sites",
        "run1",         "run2",              "run3",         "run4",
        "run5",         "run6",              "run7"};
    return ids;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        throw std::runtime_error("config file is not a JSON object: " + path.string());
    }

    PipelineConfig config;
    config.config_dir = std::filesystem::absolute(path).parent_path();
    const auto& base = config.config_dir;

    if (root.contains("corpus")) {
        const json& corpus = root["corpus"];
        config.corpus_documents = get_path(corpus, "documents", base);
        if (corpus.contains("format")) {
            config.corpus_format =
                corpus_format_from_string(corpus["format"].get<std::string>());
        }
        config.topics_file = get_path(corpus, "topics", base);
        config.store_dir = get_path(corpus, "store_dir", base, "corpus_store");
    } else {
        config.store_dir = resolve(base, config.store_dir);
    }

    if (root.contains("index") && root["index"].contains("dir")) {
        config.index_dir = get_path(root["index"], "dir", base);
    } else {
        config.index_dir = resolve(base, config.index_dir);
    }

    if (root.contains("bm25")) {
        const json& bm25 = root["bm25"];
        if (bm25.contains("standard")) config.bm25_standard = parse_params(bm25["standard"]);
        if (bm25.contains("tuned")) config.bm25_tuned = parse_params(bm25["tuned"]);
        config.tuned_params_file =
            get_path(bm25, "tuned_params_file", base, "tuned_params.json");
        if (bm25.contains("depth")) config.search_depth = bm25["depth"].get<std::size_t>();
    } else {
        config.tuned_params_file = resolve(base, config.tuned_params_file);
    }

    if (root.contains("tuning")) {
        const json& tuning = root["tuning"];
        config.silver_topics_file = get_path(tuning, "silver_topics", base);
        if (tuning.contains("grid")) {
            const json& grid = tuning["grid"];
            if (grid.contains("k1")) config.grid_k1 = grid["k1"].get<std::vector<double>>();
            if (grid.contains("b")) config.grid_b = grid["b"].get<std::vector<double>>();
        }
    }

    config.output_dir = root.contains("output_dir")
                            ? resolve(base, root["output_dir"].get<std::string>())
                            : resolve(base, config.output_dir);

    if (root.contains("models")) {
        for (auto& [id, value] : root["models"].items()) {
            if (value.is_string()) {
                config.model_files[id] = resolve(base, value.get<std::string>());
            } else if (value.is_array()) {
                config.model_fusions[id] = value.get<std::vector<std::string>>();
            } else if (value.is_object() && value.contains("alias")) {
                config.model_aliases[id] = value["alias"].get<std::string>();
            } else {
                throw std::runtime_error("config model '" + id +
                                         "' must be a run path, a fusion list or an alias");
            }
        }
    }

    if (root.contains("supportiveness")) {
        const json& supp = root["supportiveness"];
        if (supp.contains("evidence")) {
            for (auto& [name, file] : supp["evidence"].items()) {
                config.evidence_files[name] = resolve(base, file.get<std::string>());
            }
        }
        if (supp.contains("input_run")) {
            config.supportiveness_input = supp["input_run"].get<std::string>();
        }
        if (supp.contains("vote_pool_run")) {
            config.vote_pool_input = supp["vote_pool_run"].get<std::string>();
        }
        if (supp.contains("k")) config.vote_k = supp["k"].get<std::size_t>();
        if (supp.contains("tie_default")) {
            config.vote_tie_default = supp["tie_default"].get<std::string>();
            if (config.vote_tie_default != "supports" &&
                config.vote_tie_default != "dissuades") {
                throw std::runtime_error("supportiveness tie_default must be supports|dissuades");
            }
        }
    }

    if (root.contains("credibility")) {
        const json& cred = root["credibility"];
        if (cred.contains("input_run")) {
            config.credibility_input = cred["input_run"].get<std::string>();
        }
        config.forest_model_file = get_path(cred, "model_path", base);
        if (cred.contains("training")) {
            const json& training = cred["training"];
            config.credibility_labels_csv = get_path(training, "labels_csv", base);
            config.credibility_pages_file = get_path(training, "pages", base);
            if (training.contains("pages_format")) {
                config.credibility_pages_format =
                    corpus_format_from_string(training["pages_format"].get<std::string>());
            }
            if (training.contains("trees")) {
                config.forest_params.trees = training["trees"].get<std::size_t>();
            }
            if (training.contains("max_depth")) {
                config.forest_params.max_depth = training["max_depth"].get<std::size_t>();
            }
            if (training.contains("min_leaf")) {
                config.forest_params.min_leaf = training["min_leaf"].get<std::size_t>();
            }
        }
        if (cred.contains("pagerank")) {
            const json& pagerank = cred["pagerank"];
            const std::string mode = pagerank.value("mode", "fixture");
            if (mode == "fixture") {
                config.pagerank.mode = PageRankClient::Mode::fixture;
            } else if (mode == "live") {
                config.pagerank.mode = PageRankClient::Mode::live;
            } else {
                throw std::runtime_error("pagerank mode must be fixture|live");
            }
            config.pagerank.fixture_file = get_path(pagerank, "fixture", base);
            if (pagerank.contains("endpoint")) {
                config.pagerank.endpoint = pagerank["endpoint"].get<std::string>();
            }
            if (pagerank.contains("request_path")) {
                config.pagerank.request_path = pagerank["request_path"].get<std::string>();
            }
            if (pagerank.contains("key_env")) {
                config.pagerank.key_env = pagerank["key_env"].get<std::string>();
            }
            if (pagerank.contains("key_header")) {
                config.pagerank.key_header = pagerank["key_header"].get<std::string>();
            }
            if (pagerank.contains("batch_size")) {
                config.pagerank.batch_size = pagerank["batch_size"].get<std::size_t>();
            }
        }
    }

    if (root.contains("credible_sites")) {
        config.credible_sites_file = resolve(base, root["credible_sites"].get<std::string>());
    }

    if (root.contains("fusion")) {
        const json& fusion = root["fusion"];
        if (fusion.contains("k")) config.rrf_k = fusion["k"].get<double>();
        if (fusion.contains("depth")) config.fusion_depth = fusion["depth"].get<std::size_t>();
    }

    if (root.contains("eval")) {
        const json& eval = root["eval"];
        config.qrels_file = get_path(eval, "qrels", base);
        if (eval.contains("p")) config.eval_p = eval["p"].get<double>();
        if (eval.contains("depth")) config.eval_depth = eval["depth"].get<std::size_t>();
        config.report_dir = get_path(eval, "report_dir", base, "reports");
    } else {
        config.report_dir = resolve(base, config.report_dir);
    }

    if (root.contains("seed")) config.seed = root["seed"].get<std::uint64_t>();
    return config;
}

}  // namespace misir
