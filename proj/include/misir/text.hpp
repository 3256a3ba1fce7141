#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace misir {

/// Token sequence with sentence boundaries. Tokens are lowercase ASCII
/// alphanumeric runs; everything else is a separator. A sentence ends at
/// '.', '?' or '!' followed by whitespace (or end of input); trailing
/// tokens without a terminator count as a final sentence.
struct TokenStream {
    std::vector<std::string> tokens;
    // Exclusive end index into `tokens` for each sentence, ascending.
    std::vector<std::size_t> sentence_breaks;

    std::size_t sentence_count() const { return sentence_breaks.size(); }
    bool empty() const { return tokens.empty(); }
};

// Deterministic: the same input always yields the same stream.
TokenStream tokenize(std::string_view text);

// Strips tags, <script>/<style> content and comments, decodes common
// entities and collapses whitespace. No boilerplate-removal heuristics.
std::string html_to_text(std::string_view html);

// Content of the first <title> element, cleaned like html_to_text.
// Empty string when there is none.
std::string extract_title(std::string_view html);

// Lowercased registrable host of a URL with any leading "www." removed.
// No public-suffix logic. nullopt when no usable host can be found.
std::optional<std::string> try_domain_of(std::string_view url);

// Like try_domain_of but throws std::invalid_argument on failure.
std::string domain_of(std::string_view url);

}  // namespace misir
