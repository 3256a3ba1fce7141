#include "misir/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace misir {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
    throw std::runtime_error(path.filename().string() + " line " + std::to_string(line_no) +
                             ": " + what);
}

bool has_whitespace(std::string_view s) {
    return s.find_first_of(" \t\r\n") != std::string_view::npos;
}

std::string format_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

}  // namespace

std::vector<RunEntry> make_run_slice(
    const std::vector<std::pair<std::string, double>>& scored) {
    std::vector<RunEntry> entries;
    entries.reserve(scored.size());
    int rank = 0;
    for (const auto& [doc_id, score] : scored) {
        entries.push_back(RunEntry{doc_id, score, ++rank});
    }
    return entries;
}

void validate_run(const RankedRun& run) {
    for (const auto& [topic_id, entries] : run.topics) {
        std::set<std::string_view> seen;
        int expected_rank = 1;
        double prev_score = 0.0;
        for (const RunEntry& e : entries) {
            if (e.rank != expected_rank) {
                throw std::runtime_error("run " + run.tag + " topic " +
                                         std::to_string(topic_id) + ": rank gap at rank " +
                                         std::to_string(e.rank));
            }
            if (!seen.insert(e.doc_id).second) {
                throw std::runtime_error("run " + run.tag + " topic " +
                                         std::to_string(topic_id) + ": duplicate doc " +
                                         e.doc_id);
            }
            if (expected_rank > 1 && e.score > prev_score) {
                throw std::runtime_error("run " + run.tag + " topic " +
                                         std::to_string(topic_id) +
                                         ": score increases at rank " + std::to_string(e.rank));
            }
            prev_score = e.score;
            ++expected_rank;
        }
    }
}

RankedRun load_run(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open run file: " + path.string());

    RankedRun run;
    std::map<int, std::set<std::string>> seen_docs;
    std::map<int, double> prev_score;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) fail_line(path, line_no, "blank line");

        std::istringstream fields(line);
        std::string topic_str, q0, doc_id, rank_str, score_str, tag, extra;
        if (!(fields >> topic_str >> q0 >> doc_id >> rank_str >> score_str >> tag)) {
            fail_line(path, line_no, "expected 6 whitespace-separated columns");
        }
        if (fields >> extra) fail_line(path, line_no, "trailing content after 6 columns");
        if (q0 != "Q0") fail_line(path, line_no, "column 2 must be Q0, got '" + q0 + "'");

        int topic_id = 0;
        int rank = 0;
        double score = 0.0;
        try {
            topic_id = std::stoi(topic_str);
            rank = std::stoi(rank_str);
            score = std::stod(score_str);
        } catch (const std::exception&) {
            fail_line(path, line_no, "cannot parse numeric column");
        }

        auto& entries = run.topics[topic_id];
        if (rank != static_cast<int>(entries.size()) + 1) {
            fail_line(path, line_no, "rank gap: expected rank " +
                                         std::to_string(entries.size() + 1) + ", got " +
                                         std::to_string(rank));
        }
        if (!seen_docs[topic_id].insert(doc_id).second) {
            fail_line(path, line_no, "duplicate doc " + doc_id + " in topic " + topic_str);
        }
        if (!entries.empty() && score > prev_score[topic_id]) {
            fail_line(path, line_no, "score/rank disagreement: score " + score_str +
                                         " exceeds the previous rank's score");
        }
        prev_score[topic_id] = score;
        entries.push_back(RunEntry{doc_id, score, rank});
        if (run.tag.empty()) run.tag = tag;
    }
    return run;
}

void write_run(const RankedRun& run, const std::filesystem::path& path) {
    validate_run(run);
    std::string tag = run.tag.empty() ? "run" : run.tag;
    if (has_whitespace(tag)) {
        throw std::runtime_error("run tag must not contain whitespace: '" + tag + "'");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write run file: " + path.string());
    for (const auto& [topic_id, entries] : run.topics) {
        for (const RunEntry& e : entries) {
            if (has_whitespace(e.doc_id)) {
                throw std::runtime_error("doc_id must not contain whitespace: '" + e.doc_id +
                                         "'");
            }
            out << topic_id << " Q0 " << e.doc_id << " " << e.rank << " "
                << format_score(e.score) << " " << tag << "\n";
        }
    }
    if (!out) throw std::runtime_error("failed writing run file: " + path.string());
}

std::string to_string(EvidenceLabel label) {
    switch (label) {
        case EvidenceLabel::supports: return "supports";
        case EvidenceLabel::dissuades: return "dissuades";
        case EvidenceLabel::neutral: return "neutral";
    }
    return "neutral";
}

EvidenceLabel evidence_label_from_string(std::string_view s) {
    if (s == "supports") return EvidenceLabel::supports;
    if (s == "dissuades") return EvidenceLabel::dissuades;
    if (s == "neutral") return EvidenceLabel::neutral;
    throw std::invalid_argument("unknown evidence label: " + std::string(s));
}

std::vector<EvidenceJudgment> load_evidence(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open evidence file: " + path.string());

    std::vector<EvidenceJudgment> judgments;
    std::set<std::tuple<int, std::string, int>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            fail_line(path, line_no, "malformed json");
        }
        EvidenceJudgment j;
        if (!rec.contains("topic_id") || !rec["topic_id"].is_number_integer()) {
            fail_line(path, line_no, "topic_id required");
        }
        j.topic_id = rec["topic_id"].get<int>();
        if (!rec.contains("doc_id") || !rec["doc_id"].is_string()) {
            fail_line(path, line_no, "doc_id required");
        }
        j.doc_id = rec["doc_id"].get<std::string>();
        if (!rec.contains("evidence_index") || !rec["evidence_index"].is_number_integer()) {
            fail_line(path, line_no, "evidence_index required");
        }
        j.evidence_index = rec["evidence_index"].get<int>();
        if (j.evidence_index < 1) fail_line(path, line_no, "evidence_index must be >= 1");
        if (!rec.contains("label") || !rec["label"].is_string()) {
            fail_line(path, line_no, "label required");
        }
        try {
            j.label = evidence_label_from_string(rec["label"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            fail_line(path, line_no, e.what());
        }
        if (!rec.contains("confidence") || !rec["confidence"].is_number()) {
            fail_line(path, line_no, "confidence required");
        }
        j.confidence = rec["confidence"].get<double>();
        if (j.confidence < 0.0 || j.confidence > 1.0) {
            fail_line(path, line_no, "confidence out of range [0,1]");
        }
        if (!seen.insert({j.topic_id, j.doc_id, j.evidence_index}).second) {
            fail_line(path, line_no, "duplicate (topic_id, doc_id, evidence_index)");
        }
        judgments.push_back(std::move(j));
    }
    return judgments;
}

}  // namespace misir
