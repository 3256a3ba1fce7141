#include "misir/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "misir/text.hpp"

namespace misir {

namespace {

using nlohmann::json;

constexpr const char* kStoreFormat = "misir-corpus";
constexpr int kStoreVersion = 1;

struct RawRecord {
    std::string doc_id;
    std::string url;
    std::string title;
    bool has_title = false;
    std::string html;
};

// Appends parsed records to `out`; invalid ones are counted in `report`.
// Returns without touching the stream layout expectations of callers.
void parse_jsonl_records(std::istream& in, std::vector<RawRecord>& out, IngestReport& report) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            ++report.rejected;
            ++report.reject_reasons["malformed json"];
            continue;
        }
        RawRecord raw;
        if (!rec.contains("doc_id") || !rec["doc_id"].is_string() ||
            rec["doc_id"].get<std::string>().empty()) {
            ++report.rejected;
            ++report.reject_reasons["missing doc_id"];
            continue;
        }
        raw.doc_id = rec["doc_id"].get<std::string>();
        if (!rec.contains("url") || !rec["url"].is_string() ||
            rec["url"].get<std::string>().empty()) {
            ++report.rejected;
            ++report.reject_reasons["missing url"];
            continue;
        }
        raw.url = rec["url"].get<std::string>();
        if (!rec.contains("html") || !rec["html"].is_string()) {
            ++report.rejected;
            ++report.reject_reasons["missing html"];
            continue;
        }
        raw.html = rec["html"].get<std::string>();
        if (rec.contains("title") && rec["title"].is_string()) {
            raw.title = rec["title"].get<std::string>();
            raw.has_title = true;
        }
        out.push_back(std::move(raw));
    }
}

std::string warc_header_value(const std::map<std::string, std::string>& headers,
                              const std::string& name) {
    auto it = headers.find(name);
    return it == headers.end() ? "" : it->second;
}

// Minimal reader for desk-scale WARC subsets: WARC/1.x response records with
// Content-Length payloads; an embedded HTTP response header block is removed.
void parse_warc_records(std::istream& in, std::vector<RawRecord>& out, IngestReport& report) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string data = buffer.str();

    std::size_t pos = 0;
    while ((pos = data.find("WARC/", pos)) != std::string::npos) {
        std::size_t header_end = data.find("\r\n\r\n", pos);
        std::size_t header_sep = 4;
        if (header_end == std::string::npos) {
            header_end = data.find("\n\n", pos);
            header_sep = 2;
        }
        if (header_end == std::string::npos) break;

        std::map<std::string, std::string> headers;
        std::istringstream header_block(data.substr(pos, header_end - pos));
        std::string line;
        std::getline(header_block, line);  // version line
        while (std::getline(header_block, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::size_t colon = line.find(':');
            if (colon == std::string::npos) continue;
            std::string name = line.substr(0, colon);
            std::size_t value_start = line.find_first_not_of(' ', colon + 1);
            headers[name] = value_start == std::string::npos ? "" : line.substr(value_start);
        }

        std::size_t body_start = header_end + header_sep;
        std::size_t content_length = 0;
        try {
            content_length = static_cast<std::size_t>(
                std::stoull(warc_header_value(headers, "Content-Length")));
        } catch (const std::exception&) {
            content_length = 0;
        }
        std::size_t body_end = std::min(body_start + content_length, data.size());
        pos = body_end;

        if (warc_header_value(headers, "WARC-Type") != "response") continue;

        std::string payload = data.substr(body_start, body_end - body_start);
        if (payload.rfind("HTTP/", 0) == 0) {
            std::size_t http_end = payload.find("\r\n\r\n");
            std::size_t skip = 4;
            if (http_end == std::string::npos) {
                http_end = payload.find("\n\n");
                skip = 2;
            }
            if (http_end != std::string::npos) payload.erase(0, http_end + skip);
        }

        RawRecord raw;
        raw.doc_id = warc_header_value(headers, "WARC-TREC-ID");
        if (raw.doc_id.empty()) raw.doc_id = warc_header_value(headers, "WARC-Record-ID");
        if (raw.doc_id.empty()) {
            ++report.rejected;
            ++report.reject_reasons["missing doc_id"];
            continue;
        }
        raw.url = warc_header_value(headers, "WARC-Target-URI");
        if (raw.url.empty()) {
            ++report.rejected;
            ++report.reject_reasons["missing url"];
            continue;
        }
        raw.html = std::move(payload);
        out.push_back(std::move(raw));
    }
}

json doc_to_json(const Document& d) {
    return json{{"doc_id", d.doc_id}, {"url", d.url},   {"domain", d.domain},
                {"title", d.title},   {"html", d.html}, {"text", d.text}};
}

}  // namespace

std::string to_string(Stance s) {
    return s == Stance::helpful ? "helpful" : "unhelpful";
}

Stance stance_from_string(std::string_view s) {
    if (s == "helpful") return Stance::helpful;
    if (s == "unhelpful") return Stance::unhelpful;
    throw std::invalid_argument("unknown stance: " + std::string(s));
}

CorpusFormat corpus_format_from_string(std::string_view s) {
    if (s == "jsonl") return CorpusFormat::jsonl;
    if (s == "warc_subset") return CorpusFormat::warc_subset;
    throw std::invalid_argument("unknown corpus format: " + std::string(s));
}

CorpusStore CorpusStore::ingest(const std::filesystem::path& source, CorpusFormat format,
                                const std::filesystem::path& store_dir) {
    std::ifstream in(source, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus source: " + source.string());

    CorpusStore store;
    std::vector<RawRecord> records;
    if (format == CorpusFormat::jsonl) {
        parse_jsonl_records(in, records, store.report_);
    } else {
        parse_warc_records(in, records, store.report_);
    }

    for (auto& raw : records) {
        auto domain = try_domain_of(raw.url);
        if (!domain) {
            ++store.report_.rejected;
            ++store.report_.reject_reasons["unparseable url"];
            continue;
        }
        Document doc;
        doc.doc_id = std::move(raw.doc_id);
        doc.url = std::move(raw.url);
        doc.domain = std::move(*domain);
        doc.title = raw.has_title ? std::move(raw.title) : extract_title(raw.html);
        doc.text = html_to_text(raw.html);
        doc.html = std::move(raw.html);
        store.docs_.push_back(std::move(doc));
        ++store.report_.accepted;
    }

    std::sort(store.docs_.begin(), store.docs_.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    for (std::size_t i = 1; i < store.docs_.size(); ++i) {
        if (store.docs_[i].doc_id == store.docs_[i - 1].doc_id) {
            throw std::runtime_error("duplicate doc_id: " + store.docs_[i].doc_id);
        }
    }

    std::filesystem::create_directories(store_dir);
    {
        json reasons = json::object();
        for (const auto& [reason, count] : store.report_.reject_reasons) reasons[reason] = count;
        json meta{{"format", kStoreFormat},
                  {"version", kStoreVersion},
                  {"num_docs", store.docs_.size()},
                  {"report",
                   {{"accepted", store.report_.accepted},
                    {"rejected", store.report_.rejected},
                    {"reasons", reasons}}}};
        std::ofstream out(store_dir / "corpus_meta.json", std::ios::binary);
        out << meta.dump(2) << "\n";
    }
    {
        std::ofstream out(store_dir / "documents.jsonl", std::ios::binary);
        for (const Document& d : store.docs_) out << doc_to_json(d).dump() << "\n";
    }
    return store;
}

CorpusStore CorpusStore::open(const std::filesystem::path& store_dir) {
    std::ifstream meta_in(store_dir / "corpus_meta.json", std::ios::binary);
    if (!meta_in) {
        throw std::runtime_error("not a corpus store (no corpus_meta.json): " +
                                 store_dir.string());
    }
    json meta = json::parse(meta_in);
    if (meta.value("format", "") != kStoreFormat) {
        throw std::runtime_error("unrecognized corpus store format in " + store_dir.string());
    }
    if (meta.value("version", 0) != kStoreVersion) {
        throw std::runtime_error("unsupported corpus store version in " + store_dir.string());
    }

    CorpusStore store;
    store.report_.accepted = meta["report"]["accepted"].get<std::size_t>();
    store.report_.rejected = meta["report"]["rejected"].get<std::size_t>();
    for (auto& [reason, count] : meta["report"]["reasons"].items()) {
        store.report_.reject_reasons[reason] = count.get<std::size_t>();
    }

    std::ifstream in(store_dir / "documents.jsonl", std::ios::binary);
    if (!in) throw std::runtime_error("corpus store missing documents.jsonl");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        Document d;
        d.doc_id = rec["doc_id"].get<std::string>();
        d.url = rec["url"].get<std::string>();
        d.domain = rec["domain"].get<std::string>();
        d.title = rec["title"].get<std::string>();
        d.html = rec["html"].get<std::string>();
        d.text = rec["text"].get<std::string>();
        store.docs_.push_back(std::move(d));
    }
    return store;
}

const Document* CorpusStore::find(std::string_view doc_id) const {
    auto it = std::lower_bound(docs_.begin(), docs_.end(), doc_id,
                               [](const Document& d, std::string_view id) { return d.doc_id < id; });
    if (it == docs_.end() || it->doc_id != doc_id) return nullptr;
    return &*it;
}

const Document& CorpusStore::at(std::string_view doc_id) const {
    const Document* doc = find(doc_id);
    if (!doc) throw std::out_of_range("unknown doc_id: " + std::string(doc_id));
    return *doc;
}

std::vector<Topic> load_topics(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open topics file: " + path.string());

    std::vector<Topic> topics;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw std::runtime_error("topics line " + std::to_string(line_no) +
                                     ": malformed json");
        }
        Topic t;
        if (!rec.contains("topic_id") || !rec["topic_id"].is_number_integer()) {
            throw std::runtime_error("topics line " + std::to_string(line_no) +
                                     ": topic_id required");
        }
        t.topic_id = rec["topic_id"].get<int>();
        if (!rec.contains("query") || !rec["query"].is_string() ||
            rec["query"].get<std::string>().empty()) {
            throw std::runtime_error("topics line " + std::to_string(line_no) +
                                     ": query required");
        }
        t.query = rec["query"].get<std::string>();
        if (!rec.contains("description") || !rec["description"].is_string() ||
            rec["description"].get<std::string>().empty()) {
            throw std::runtime_error("topics line " + std::to_string(line_no) +
                                     ": description required");
        }
        t.description = rec["description"].get<std::string>();
        if (rec.contains("narrative") && rec["narrative"].is_string()) {
            t.narrative = rec["narrative"].get<std::string>();
        }
        if (rec.contains("stance") && rec["stance"].is_string()) {
            try {
                t.stance = stance_from_string(rec["stance"].get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error("topics line " + std::to_string(line_no) + ": " +
                                         e.what());
            }
        }
        if (rec.contains("evidence") && rec["evidence"].is_string()) {
            t.evidence = rec["evidence"].get<std::string>();
        }
        topics.push_back(std::move(t));
    }

    std::stable_sort(topics.begin(), topics.end(),
                     [](const Topic& a, const Topic& b) { return a.topic_id < b.topic_id; });
    for (std::size_t i = 1; i < topics.size(); ++i) {
        if (topics[i].topic_id == topics[i - 1].topic_id) {
            throw std::runtime_error("duplicate topic_id: " +
                                     std::to_string(topics[i].topic_id));
        }
    }
    return topics;
}

}  // namespace misir
