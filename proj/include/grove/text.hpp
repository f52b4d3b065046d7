#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grove::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool contains_case_insensitive(std::string_view haystack, std::string_view needle);

// Lowercased word tokens. ASCII letters and digits are word characters, as is
// every byte >= 0x80 so UTF-8 words stay intact; everything else separates.
std::vector<std::string> tokenize(std::string_view s);

// Splits a model-produced list into items. Accepted line shapes: "1. x",
// "2) x", "- x", "* x" or plain "x". Markers are stripped, blank lines dropped.
std::vector<std::string> parse_list(std::string_view response);

// First maximal run of decimal digits whose value lies in [lo, hi].
std::optional<long long> first_integer_in_range(std::string_view s, long long lo, long long hi);

// Trims whitespace and then a single trailing '.', for values that a
// template follows with its own period.
std::string without_terminal_period(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t value);

}  // namespace grove::text
