#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "misir/run_io.hpp"

namespace misir {

struct QrelGrades {
    int helpful = 0;
    int harmful = 0;
};

/// Graded helpfulness/harmfulness judgments. File format is an extended
/// TREC qrels with a facet column: `<topic> <help|harm> <doc> <grade>`.
class Qrels {
public:
    static Qrels load(const std::filesystem::path& path);

    void set_grade(int topic_id, const std::string& facet, const std::string& doc_id, int grade);
    const std::map<int, std::map<std::string, QrelGrades>>& topics() const { return topics_; }
    bool has_topic(int topic_id) const { return topics_.count(topic_id) > 0; }

    // Only docs with a positive grade on the facet.
    std::map<std::string, int> facet_grades(int topic_id, bool helpful) const;

private:
    std::map<int, std::map<std::string, QrelGrades>> topics_;
};

// (1 - p) * sum_{i=1..depth} p^(i-1) * grade(d_i).
double rbp_weighted_overlap(const std::vector<std::string>& ranking,
                            const std::map<std::string, int>& grades, double p,
                            std::size_t depth);

// rbp(ranking) / rbp(ideal), where the ideal sorts graded docs by grade
// descending (ties by ascending doc_id); 0 when nothing is graded.
double compatibility(const std::vector<std::string>& ranking,
                     const std::map<std::string, int>& grades, double p, std::size_t depth);

// Smallest depth where the residual rank weight p^depth drops below 1e-4
// (180 at p = 0.95).
std::size_t default_eval_depth(double p);

struct TopicCompatibility {
    double help = 0.0;
    double harm = 0.0;
    double help_minus_harm = 0.0;
};

struct CompatibilityReport {
    std::string run_tag;
    double p = 0.95;
    std::size_t depth = 0;
    double help = 0.0;
    double harm = 0.0;
    double help_minus_harm = 0.0;
    std::map<int, TopicCompatibility> topics;
};

// Means over the qrels topics ("evaluated" topics); run topics without
// judgments are ignored. Throws when run and qrels share no topic.
CompatibilityReport help_harm_report(const RankedRun& run, const Qrels& qrels, double p,
                                     std::size_t depth);

// `<run>\t<help>\t<harm>\t<help_minus_harm>` with a header line.
std::string report_summary_tsv(const CompatibilityReport& report);
std::string report_topics_tsv(const CompatibilityReport& report);
void write_report_json(const CompatibilityReport& report, const std::filesystem::path& path);
CompatibilityReport load_report_json(const std::filesystem::path& path);

}  // namespace misir
