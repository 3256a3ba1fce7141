#include "misir/text.hpp"

#include <cctype>
#include <stdexcept>

namespace misir {

namespace {

bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char to_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_sentence_terminator(char c) {
    return c == '.' || c == '?' || c == '!';
}

// Case-insensitive match of `needle` at html[pos].
bool matches_at(std::string_view html, std::size_t pos, std::string_view needle) {
    if (pos + needle.size() > html.size()) return false;
    for (std::size_t i = 0; i < needle.size(); ++i) {
        if (to_lower(html[pos + i]) != needle[i]) return false;
    }
    return true;
}

std::size_t find_ci(std::string_view html, std::string_view needle, std::size_t from) {
    if (needle.empty()) return from;
    for (std::size_t i = from; i + needle.size() <= html.size(); ++i) {
        if (matches_at(html, i, needle)) return i;
    }
    return std::string_view::npos;
}

// Decodes one entity starting at html[pos] (which is '&'). Appends the
// replacement to out and returns the index just past the entity, or pos + 1
// with '&' appended when it is not a recognized entity.
std::size_t decode_entity(std::string_view html, std::size_t pos, std::string& out) {
    static const struct {
        std::string_view name;
        char replacement;
    } kNamed[] = {
        {"&amp;", '&'}, {"&lt;", '<'},   {"&gt;", '>'},
        {"&quot;", '"'}, {"&apos;", '\''}, {"&nbsp;", ' '},
    };
    for (const auto& e : kNamed) {
        if (matches_at(html, pos, e.name)) {
            out.push_back(e.replacement);
            return pos + e.name.size();
        }
    }
    if (pos + 2 < html.size() && html[pos + 1] == '#') {
        std::size_t i = pos + 2;
        int base = 10;
        if (i < html.size() && (html[i] == 'x' || html[i] == 'X')) {
            base = 16;
            ++i;
        }
        unsigned long code = 0;
        std::size_t digits = 0;
        while (i < html.size()) {
            char c = to_lower(html[i]);
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (base == 16 && c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else break;
            code = code * static_cast<unsigned long>(base) + static_cast<unsigned long>(v);
            ++digits;
            ++i;
        }
        if (digits > 0 && i < html.size() && html[i] == ';') {
            // Only ASCII replacements; anything else becomes a space.
            out.push_back(code < 128 ? static_cast<char>(code) : ' ');
            return i + 1;
        }
    }
    out.push_back('&');
    return pos + 1;
}

std::string collapse_whitespace(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

TokenStream tokenize(std::string_view text) {
    TokenStream stream;
    std::string current;
    std::size_t last_break = 0;

    auto flush_token = [&] {
        if (!current.empty()) {
            stream.tokens.push_back(current);
            current.clear();
        }
    };
    auto mark_sentence = [&] {
        if (stream.tokens.size() > last_break) {
            stream.sentence_breaks.push_back(stream.tokens.size());
            last_break = stream.tokens.size();
        }
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (is_alnum(c)) {
            current.push_back(to_lower(c));
            continue;
        }
        flush_token();
        if (is_sentence_terminator(c) &&
            (i + 1 == text.size() || is_space(text[i + 1]))) {
            mark_sentence();
        }
    }
    flush_token();
    mark_sentence();  // unterminated trailing tokens form a final sentence
    return stream;
}

std::string html_to_text(std::string_view html) {
    std::string raw;
    raw.reserve(html.size());
    std::size_t i = 0;
    while (i < html.size()) {
        char c = html[i];
        if (c == '<') {
            if (matches_at(html, i, "<!--")) {
                std::size_t end = html.find("-->", i + 4);
                i = (end == std::string_view::npos) ? html.size() : end + 3;
            } else if (matches_at(html, i, "<script")) {
                std::size_t end = find_ci(html, "</script", i + 7);
                if (end == std::string_view::npos) {
                    i = html.size();
                } else {
                    std::size_t close = html.find('>', end);
                    i = (close == std::string_view::npos) ? html.size() : close + 1;
                }
                raw.push_back(' ');
            } else if (matches_at(html, i, "<style")) {
                std::size_t end = find_ci(html, "</style", i + 6);
                if (end == std::string_view::npos) {
                    i = html.size();
                } else {
                    std::size_t close = html.find('>', end);
                    i = (close == std::string_view::npos) ? html.size() : close + 1;
                }
                raw.push_back(' ');
            } else {
                std::size_t end = html.find('>', i + 1);
                i = (end == std::string_view::npos) ? html.size() : end + 1;
                raw.push_back(' ');
            }
        } else if (c == '&') {
            i = decode_entity(html, i, raw);
        } else {
            raw.push_back(c);
            ++i;
        }
    }
    return collapse_whitespace(raw);
}

std::string extract_title(std::string_view html) {
    std::size_t open = find_ci(html, "<title", 0);
    if (open == std::string_view::npos) return "";
    std::size_t content = html.find('>', open);
    if (content == std::string_view::npos) return "";
    std::size_t close = find_ci(html, "</title", content + 1);
    if (close == std::string_view::npos) return "";
    return html_to_text(html.substr(content + 1, close - content - 1));
}

std::optional<std::string> try_domain_of(std::string_view url) {
    if (url.empty()) return std::nullopt;
    std::string_view rest = url;

    std::size_t scheme = rest.find("://");
    if (scheme != std::string_view::npos) {
        bool valid_scheme = scheme > 0;
        for (std::size_t i = 0; i < scheme; ++i) {
            char c = to_lower(rest[i]);
            if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' ||
                  c == '-' || c == '.')) {
                valid_scheme = false;
                break;
            }
        }
        if (valid_scheme) rest.remove_prefix(scheme + 3);
    } else if (rest.substr(0, 2) == "//") {
        rest.remove_prefix(2);
    }

    std::size_t end = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, end);
    std::size_t at = authority.rfind('@');
    if (at != std::string_view::npos) authority.remove_prefix(at + 1);

    std::string host;
    if (!authority.empty() && authority.front() == '[') {
        std::size_t bracket = authority.find(']');
        if (bracket == std::string_view::npos) return std::nullopt;
        host.assign(authority.substr(1, bracket - 1));
    } else {
        std::size_t colon = authority.find(':');
        host.assign(authority.substr(0, colon));
    }

    for (char& c : host) {
        c = to_lower(c);
        if (is_space(c)) return std::nullopt;
    }
    if (host.rfind("www.", 0) == 0) host.erase(0, 4);
    if (host.empty()) return std::nullopt;
    return host;
}

std::string domain_of(std::string_view url) {
    auto domain = try_domain_of(url);
    if (!domain) {
        throw std::invalid_argument("cannot extract domain from url: " + std::string(url));
    }
    return *domain;
}

}  // namespace misir
