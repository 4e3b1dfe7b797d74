#include "advprobe/text.hpp"

#include <cctype>
#include <cstdio>

namespace advprobe::text {

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t b = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) out.emplace_back(s.substr(b, i - b));
    }
    return out;
}

int count_words(std::string_view s) {
    int n = 0;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t b = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) ++n;
    }
    return n;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    size_t b = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(b, i - b));
            b = i + 1;
        }
    }
    return out;
}

std::string replace_all(std::string_view s, std::string_view from, std::string_view to) {
    if (from.empty()) return std::string(s);
    std::string out;
    size_t pos = 0;
    while (true) {
        size_t hit = s.find(from, pos);
        if (hit == std::string_view::npos) {
            out.append(s.substr(pos));
            return out;
        }
        out.append(s.substr(pos, hit - pos));
        out.append(to);
        pos = hit + from.size();
    }
}

int count_occurrences(std::string_view s, std::string_view needle) {
    if (needle.empty()) return 0;
    int n = 0;
    size_t pos = 0;
    while ((pos = s.find(needle, pos)) != std::string_view::npos) {
        ++n;
        pos += needle.size();
    }
    return n;
}

std::string normalize_surface(std::string_view piece) {
    std::string s(piece);
    // GPT-2/RoBERTa style word-initial marker U+0120 ("Ġ").
    while (s.size() >= 2 && static_cast<unsigned char>(s[0]) == 0xC4 &&
           static_cast<unsigned char>(s[1]) == 0xA0) {
        s.erase(0, 2);
    }
    // SentencePiece marker U+2581 ("▁").
    while (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xE2 &&
           static_cast<unsigned char>(s[1]) == 0x96 &&
           static_cast<unsigned char>(s[2]) == 0x81) {
        s.erase(0, 3);
    }
    // WordPiece continuation marker.
    if (s.rfind("##", 0) == 0) s.erase(0, 2);
    return to_lower(trim(s));
}

std::string first_alpha_word_lower(std::string_view s) {
    size_t i = 0;
    while (i < s.size() && !std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    size_t b = i;
    while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
    return to_lower(s.substr(b, i - b));
}

std::string format_double(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return std::string(buf);
}

} // namespace advprobe::text
