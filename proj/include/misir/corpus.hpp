#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace misir {

struct Document {
    std::string doc_id;
    std::string url;
    std::string domain;  // lowercase registrable host, "www." stripped
    std::string title;   // possibly empty
    std::string html;    // raw markup
    std::string text;    // extracted plain text, no markup
};

enum class Stance { helpful, unhelpful };

std::string to_string(Stance s);
Stance stance_from_string(std::string_view s);

struct Topic {
    int topic_id = 0;
    std::string query;
    std::string description;
    std::optional<std::string> narrative;
    std::optional<Stance> stance;
    std::optional<std::string> evidence;

    // Automatic runs use only query and description.
    std::string retrieval_text() const { return query + " " + description; }
};

struct IngestReport {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::map<std::string, std::size_t> reject_reasons;  // reason -> count

    std::size_t input_records() const { return accepted + rejected; }
};

enum class CorpusFormat { jsonl, warc_subset };

CorpusFormat corpus_format_from_string(std::string_view s);

/// Persistent document collection. The on-disk layout is a directory with a
/// versioned metadata file (corpus_meta.json) and a content file
/// (documents.jsonl) holding one document per line, sorted by doc_id, so
/// repeated ingestion of the same input produces identical bytes.
class CorpusStore {
public:
    // Ingests `source` into `store_dir`. Malformed records are skipped and
    // counted in the report; a duplicate doc_id is a hard error naming the id.
    static CorpusStore ingest(const std::filesystem::path& source, CorpusFormat format,
                              const std::filesystem::path& store_dir);

    static CorpusStore open(const std::filesystem::path& store_dir);

    const std::vector<Document>& docs() const { return docs_; }
    const Document* find(std::string_view doc_id) const;
    const Document& at(std::string_view doc_id) const;  // throws when absent
    const IngestReport& report() const { return report_; }
    std::size_t size() const { return docs_.size(); }

private:
    std::vector<Document> docs_;  // sorted by doc_id
    IngestReport report_;
};

// Topics sorted by topic_id. Missing or empty query/description is a hard
// error naming the line, as is a duplicate topic_id.
std::vector<Topic> load_topics(const std::filesystem::path& path);

}  // namespace misir
