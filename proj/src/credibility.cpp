#include "misir/credibility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "misir/text.hpp"

namespace misir {

namespace {

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

char to_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool matches_at_ci(std::string_view text, std::size_t pos, std::string_view needle) {
    if (pos + needle.size() > text.size()) return false;
    for (std::size_t i = 0; i < needle.size(); ++i) {
        if (to_lower(text[pos + i]) != needle[i]) return false;
    }
    return true;
}

std::size_t find_ci(std::string_view text, std::string_view needle, std::size_t from) {
    for (std::size_t i = from; i + needle.size() <= text.size(); ++i) {
        if (matches_at_ci(text, i, needle)) return i;
    }
    return std::string_view::npos;
}

std::string trim(std::string_view s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

struct HtmlAttr {
    std::string name;   // lowercased
    std::string value;  // lowercased, quotes stripped
};

// Best-effort attribute scan of one tag body (the text between the tag name
// and '>').
std::vector<HtmlAttr> parse_attrs(std::string_view tag_body) {
    std::vector<HtmlAttr> attrs;
    std::size_t i = 0;
    auto is_name_char = [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_' || c == ':';
    };
    while (i < tag_body.size()) {
        while (i < tag_body.size() && !is_name_char(tag_body[i])) ++i;
        std::size_t name_start = i;
        while (i < tag_body.size() && is_name_char(tag_body[i])) ++i;
        if (i == name_start) break;
        HtmlAttr attr;
        for (char c : tag_body.substr(name_start, i - name_start)) {
            attr.name.push_back(to_lower(c));
        }
        while (i < tag_body.size() && (tag_body[i] == ' ' || tag_body[i] == '\t' ||
                                       tag_body[i] == '\r' || tag_body[i] == '\n')) {
            ++i;
        }
        if (i < tag_body.size() && tag_body[i] == '=') {
            ++i;
            while (i < tag_body.size() && (tag_body[i] == ' ' || tag_body[i] == '\t')) ++i;
            if (i < tag_body.size() && (tag_body[i] == '"' || tag_body[i] == '\'')) {
                const char quote = tag_body[i++];
                std::size_t value_start = i;
                while (i < tag_body.size() && tag_body[i] != quote) ++i;
                for (char c : tag_body.substr(value_start, i - value_start)) {
                    attr.value.push_back(to_lower(c));
                }
                if (i < tag_body.size()) ++i;
            } else {
                std::size_t value_start = i;
                while (i < tag_body.size() && tag_body[i] != ' ' && tag_body[i] != '\t') ++i;
                for (char c : tag_body.substr(value_start, i - value_start)) {
                    attr.value.push_back(to_lower(c));
                }
            }
        }
        attrs.push_back(std::move(attr));
    }
    return attrs;
}

}  // namespace

int count_syllables(std::string_view word) {
    if (word.empty()) return 0;
    std::string w;
    w.reserve(word.size());
    for (char c : word) w.push_back(to_lower(c));

    // Drop a trailing silent 'e' ("brace" -> "brac").
    if (w.size() >= 3 && w.back() == 'e' && !is_vowel(w[w.size() - 2])) w.pop_back();

    int groups = 0;
    bool in_group = false;
    for (char c : w) {
        if (is_vowel(c)) {
            if (!in_group) ++groups;
            in_group = true;
        } else {
            in_group = false;
        }
    }
    return std::max(groups, 1);
}

double smog_index(std::string_view text) {
    TokenStream stream = tokenize(text);
    const std::size_t sentences = stream.sentence_count();
    if (sentences == 0) return 0.0;
    std::size_t polysyllables = 0;
    for (const std::string& token : stream.tokens) {
        if (count_syllables(token) >= 3) ++polysyllables;
    }
    return 1.0430 * std::sqrt(static_cast<double>(polysyllables) * 30.0 /
                              static_cast<double>(sentences)) +
           3.1291;
}

int count_css_rules(std::string_view html) {
    int count = 0;
    std::size_t i = 0;
    while (i < html.size()) {
        if (html[i] != '<') {
            ++i;
            continue;
        }
        if (matches_at_ci(html, i, "<!--")) {
            std::size_t end = html.find("-->", i + 4);
            i = (end == std::string_view::npos) ? html.size() : end + 3;
            continue;
        }
        std::size_t tag_end = html.find('>', i + 1);
        if (tag_end == std::string_view::npos) break;

        std::size_t name_start = i + 1;
        if (name_start < html.size() && html[name_start] == '/') {
            i = tag_end + 1;  // closing tag, no attributes of interest
            continue;
        }
        std::size_t name_end = name_start;
        while (name_end < tag_end && html[name_end] != ' ' && html[name_end] != '\t' &&
               html[name_end] != '\r' && html[name_end] != '\n' && html[name_end] != '/') {
            ++name_end;
        }
        std::string name;
        for (char c : html.substr(name_start, name_end - name_start)) {
            name.push_back(to_lower(c));
        }
        const auto attrs = parse_attrs(html.substr(name_end, tag_end - name_end));

        if (name == "style") {
            std::size_t close = find_ci(html, "</style", tag_end + 1);
            std::size_t content_end = (close == std::string_view::npos) ? html.size() : close;
            for (std::size_t j = tag_end + 1; j < content_end; ++j) {
                if (html[j] == '{') ++count;
            }
            if (close == std::string_view::npos) break;
            std::size_t after = html.find('>', close);
            i = (after == std::string_view::npos) ? html.size() : after + 1;
            continue;
        }

        for (const HtmlAttr& attr : attrs) {
            if (attr.name == "style") ++count;
            if (name == "link" && attr.name == "rel" &&
                attr.value.find("stylesheet") != std::string::npos) {
                ++count;
            }
        }
        i = tag_end + 1;
    }
    return count;
}

int binarize_credibility_score(int raw_score) {
    return raw_score >= 4 ? 1 : 0;
}

std::vector<CredibilityLabelRow> load_credibility_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open credibility dataset: " + path.string());

    std::vector<CredibilityLabelRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            std::string header = line;
            header.erase(std::remove_if(header.begin(), header.end(),
                                        [](char c) { return c == ' ' || c == '\t'; }),
                         header.end());
            if (header != "url,topic,score") {
                throw std::runtime_error(path.string() +
                                         ": expected header 'url,topic,score', got '" + line +
                                         "'");
            }
            continue;
        }
        // The URL may itself contain commas, so split from the right.
        std::size_t last = line.rfind(',');
        if (last == std::string::npos) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": expected 3 comma-separated fields");
        }
        std::size_t second = line.rfind(',', last - 1);
        if (second == std::string::npos) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": expected 3 comma-separated fields");
        }
        CredibilityLabelRow row;
        row.url = trim(line.substr(0, second));
        row.topic = trim(line.substr(second + 1, last - second - 1));
        try {
            row.raw_score = std::stoi(trim(line.substr(last + 1)));
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": score must be an integer");
        }
        if (row.raw_score < 1 || row.raw_score > 5) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": score must be in 1..5");
        }
        if (row.url.empty()) {
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                     ": url required");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

CredibleSiteList CredibleSiteList::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open credible site list: " + path.string());
    std::set<std::string> domains;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string domain = trim(line);
        if (domain.empty()) continue;
        for (char& c : domain) c = to_lower(c);
        if (domain.rfind("www.", 0) == 0) domain.erase(0, 4);
        domains.insert(std::move(domain));
    }
    return CredibleSiteList(std::move(domains));
}

double boost_credible(double score, std::string_view domain, const CredibleSiteList& sites) {
    return sites.contains(domain) ? score + 1.0 : score;
}

RankedRun rank_credibility(const std::map<int, std::vector<std::string>>& docs_per_topic,
                           const std::map<std::string, CredibilityFeatures>& features_by_doc,
                           const std::map<std::string, std::string>& domain_by_doc,
                           const RandomForest& model, const CredibleSiteList& sites,
                           CredibilityMode mode, const std::string& tag) {
    if (mode == CredibilityMode::classifier_plus_sites && sites.empty()) {
        throw std::runtime_error("classifier_plus_sites requires a non-empty site list");
    }

    struct DocScore {
        double score = 0.0;
        bool listed = false;
    };
    std::map<std::string, DocScore> score_cache;
    auto score_of = [&](const std::string& doc_id) {
        auto cached = score_cache.find(doc_id);
        if (cached != score_cache.end()) return cached->second;
        auto features = features_by_doc.find(doc_id);
        if (features == features_by_doc.end()) {
            throw std::runtime_error("no credibility features for doc " + doc_id);
        }
        DocScore result;
        result.score = model.predict(features->second.vector());
        if (mode == CredibilityMode::classifier_plus_sites) {
            auto domain = domain_by_doc.find(doc_id);
            result.listed = domain != domain_by_doc.end() && sites.contains(domain->second);
            if (result.listed) result.score += 1.0;
        }
        score_cache[doc_id] = result;
        return result;
    };

    RankedRun run;
    run.tag = tag;
    for (const auto& [topic_id, doc_ids] : docs_per_topic) {
        struct Row {
            std::string doc_id;
            DocScore s;
        };
        std::vector<Row> rows;
        rows.reserve(doc_ids.size());
        for (const std::string& doc_id : doc_ids) rows.push_back({doc_id, score_of(doc_id)});
        // A boosted score of exactly 1.0 (classifier 0 + unit) can collide
        // with an unboosted perfect score; listed docs win that boundary so
        // boost dominance is strict.
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            if (a.s.score != b.s.score) return a.s.score > b.s.score;
            if (a.s.listed != b.s.listed) return a.s.listed;
            return a.doc_id < b.doc_id;
        });
        std::vector<std::pair<std::string, double>> scored;
        scored.reserve(rows.size());
        for (Row& row : rows) scored.emplace_back(std::move(row.doc_id), row.s.score);
        run.topics[topic_id] = make_run_slice(scored);
    }
    return run;
}

}  // namespace misir
