#include "misir/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace misir {

namespace {

using nlohmann::json;

std::string format6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

}  // namespace

Qrels Qrels::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open qrels file: " + path.string());

    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string topic_str, facet, doc_id, grade_str, extra;
        if (!(fields >> topic_str >> facet >> doc_id >> grade_str) || (fields >> extra)) {
            throw std::runtime_error("qrels line " + std::to_string(line_no) +
                                     ": expected `<topic> <help|harm> <doc> <grade>`");
        }
        int topic_id = 0;
        int grade = 0;
        try {
            topic_id = std::stoi(topic_str);
            grade = std::stoi(grade_str);
        } catch (const std::exception&) {
            throw std::runtime_error("qrels line " + std::to_string(line_no) +
                                     ": cannot parse numeric column");
        }
        if (grade < 0) {
            throw std::runtime_error("qrels line " + std::to_string(line_no) +
                                     ": grades must be non-negative");
        }
        if (facet != "help" && facet != "harm") {
            throw std::runtime_error("qrels line " + std::to_string(line_no) +
                                     ": facet must be help or harm, got '" + facet + "'");
        }
        qrels.set_grade(topic_id, facet, doc_id, grade);
    }
    return qrels;
}

void Qrels::set_grade(int topic_id, const std::string& facet, const std::string& doc_id,
                      int grade) {
    QrelGrades& grades = topics_[topic_id][doc_id];
    if (facet == "help") grades.helpful = grade;
    else if (facet == "harm") grades.harmful = grade;
    else throw std::invalid_argument("unknown qrels facet: " + facet);
}

std::map<std::string, int> Qrels::facet_grades(int topic_id, bool helpful) const {
    std::map<std::string, int> out;
    auto topic = topics_.find(topic_id);
    if (topic == topics_.end()) return out;
    for (const auto& [doc_id, grades] : topic->second) {
        const int grade = helpful ? grades.helpful : grades.harmful;
        if (grade > 0) out[doc_id] = grade;
    }
    return out;
}

double rbp_weighted_overlap(const std::vector<std::string>& ranking,
                            const std::map<std::string, int>& grades, double p,
                            std::size_t depth) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("persistence p must be in (0,1)");
    double sum = 0.0;
    double weight = 1.0;  // p^(i-1)
    for (std::size_t i = 0; i < ranking.size() && i < depth; ++i) {
        auto it = grades.find(ranking[i]);
        if (it != grades.end()) sum += weight * static_cast<double>(it->second);
        weight *= p;
    }
    return (1.0 - p) * sum;
}

double compatibility(const std::vector<std::string>& ranking,
                     const std::map<std::string, int>& grades, double p, std::size_t depth) {
    std::vector<std::pair<std::string, int>> ideal(grades.begin(), grades.end());
    std::sort(ideal.begin(), ideal.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> ideal_ranking;
    ideal_ranking.reserve(ideal.size());
    for (const auto& [doc_id, grade] : ideal) ideal_ranking.push_back(doc_id);

    const double ideal_score = rbp_weighted_overlap(ideal_ranking, grades, p, depth);
    if (ideal_score == 0.0) return 0.0;
    return rbp_weighted_overlap(ranking, grades, p, depth) / ideal_score;
}

std::size_t default_eval_depth(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("persistence p must be in (0,1)");
    return static_cast<std::size_t>(std::ceil(std::log(1e-4) / std::log(p)));
}

CompatibilityReport help_harm_report(const RankedRun& run, const Qrels& qrels, double p,
                                     std::size_t depth) {
    CompatibilityReport report;
    report.run_tag = run.tag;
    report.p = p;
    report.depth = depth;

    bool shared = false;
    for (const auto& [topic_id, grades] : qrels.topics()) {
        if (run.topics.count(topic_id) > 0) {
            shared = true;
            break;
        }
    }
    if (!shared) throw std::runtime_error("run and qrels share no topic");

    double help_sum = 0.0;
    double harm_sum = 0.0;
    for (const auto& [topic_id, grades] : qrels.topics()) {
        std::vector<std::string> ranking;
        if (const std::vector<RunEntry>* slice = run.slice(topic_id)) {
            ranking.reserve(slice->size());
            for (const RunEntry& e : *slice) ranking.push_back(e.doc_id);
        }
        TopicCompatibility topic;
        topic.help = compatibility(ranking, qrels.facet_grades(topic_id, true), p, depth);
        topic.harm = compatibility(ranking, qrels.facet_grades(topic_id, false), p, depth);
        topic.help_minus_harm = topic.help - topic.harm;
        help_sum += topic.help;
        harm_sum += topic.harm;
        report.topics[topic_id] = topic;
    }
    const double n = static_cast<double>(report.topics.size());
    report.help = help_sum / n;
    report.harm = harm_sum / n;
    report.help_minus_harm = report.help - report.harm;
    return report;
}

std::string report_summary_tsv(const CompatibilityReport& report) {
    std::string out = "run\thelp\tharm\thelp_minus_harm\n";
    out += report.run_tag + "\t" + format6(report.help) + "\t" + format6(report.harm) + "\t" +
           format6(report.help_minus_harm) + "\n";
    return out;
}

std::string report_topics_tsv(const CompatibilityReport& report) {
    std::string out = "topic\thelp\tharm\thelp_minus_harm\n";
    for (const auto& [topic_id, topic] : report.topics) {
        out += std::to_string(topic_id) + "\t" + format6(topic.help) + "\t" +
               format6(topic.harm) + "\t" + format6(topic.help_minus_harm) + "\n";
    }
    return out;
}

void write_report_json(const CompatibilityReport& report, const std::filesystem::path& path) {
    json topics = json::object();
    for (const auto& [topic_id, topic] : report.topics) {
        topics[std::to_string(topic_id)] = {{"help", topic.help},
                                            {"harm", topic.harm},
                                            {"help_minus_harm", topic.help_minus_harm}};
    }
    json root{{"run", report.run_tag},
              {"p", report.p},
              {"depth", report.depth},
              {"help", report.help},
              {"harm", report.harm},
              {"help_minus_harm", report.help_minus_harm},
              {"topics", std::move(topics)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + path.string());
    out << root.dump(2) << "\n";
}

CompatibilityReport load_report_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open report: " + path.string());
    json root = json::parse(in);
    CompatibilityReport report;
    report.run_tag = root["run"].get<std::string>();
    report.p = root["p"].get<double>();
    report.depth = root["depth"].get<std::size_t>();
    report.help = root["help"].get<double>();
    report.harm = root["harm"].get<double>();
    report.help_minus_harm = root["help_minus_harm"].get<double>();
    for (auto& [topic_str, topic] : root["topics"].items()) {
        TopicCompatibility t;
        t.help = topic["help"].get<double>();
        t.harm = topic["harm"].get<double>();
        t.help_minus_harm = topic["help_minus_harm"].get<double>();
        report.topics[std::stoi(topic_str)] = t;
    }
    return report;
}

}  // namespace misir
