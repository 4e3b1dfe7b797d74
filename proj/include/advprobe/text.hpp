#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace advprobe::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Whitespace-separated tokens (used for word counts).
std::vector<std::string> split_ws(std::string_view s);
int count_words(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

// Number of non-overlapping occurrences of `needle`.
int count_occurrences(std::string_view s, std::string_view needle);

// Canonical surface form for matching model vocabulary pieces against the
// lexicon: strips word-boundary markers used by byte-pair tokenizers
// (U+0120, U+2581, leading "##"), trims whitespace and lowercases.
std::string normalize_surface(std::string_view piece);

// First run of [a-zA-Z]+ in `s`, lowercased; empty if none.
std::string first_alpha_word_lower(std::string_view s);

// Fixed-notation double with `prec` significant digits, locale independent.
std::string format_double(double v, int prec = 6);

} // namespace advprobe::text
