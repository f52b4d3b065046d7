#include "grove/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace grove::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_byte(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) != 0;
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// Length of a list marker ("12.", "3)", "-", "*", or a UTF-8 bullet) at the start of `line`, or 0.
std::size_t marker_length(std::string_view line) {
    if (line.empty()) return 0;
    if (line[0] == '-' || line[0] == '*') return 1;
    if (line.substr(0, 3) == "\xE2\x80\xA2") return 3;
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    // "1.5 million" is text, not a marker.
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')') &&
        (i + 1 == line.size() || is_space(line[i + 1]))) {
        return i + 1;
    }
    return 0;
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

bool contains_case_insensitive(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                          [](char a, char b) { return lower(a) == lower(b); });
    return it != haystack.end();
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (is_word_byte(c)) {
            current.push_back(lower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> parse_list(std::string_view response) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= response.size()) {
        std::size_t end = response.find('\n', start);
        if (end == std::string_view::npos) end = response.size();
        std::string line = trim(response.substr(start, end - start));
        const std::size_t marker = marker_length(line);
        if (marker > 0) line = trim(std::string_view(line).substr(marker));
        if (!line.empty()) items.push_back(std::move(line));
        start = end + 1;
    }
    return items;
}

std::optional<long long> first_integer_in_range(std::string_view s, long long lo, long long hi) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        const std::string_view digits = s.substr(i, j - i);
        // Runs longer than 18 digits cannot be in any range we use.
        if (digits.size() <= 18) {
            long long value = 0;
            for (char c : digits) value = value * 10 + (c - '0');
            if (value >= lo && value <= hi) return value;
        }
        i = j;
    }
    return std::nullopt;
}

std::string without_terminal_period(std::string_view s) {
    std::string out = trim(s);
    if (!out.empty() && out.back() == '.') {
        out.pop_back();
        out = trim(out);
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace grove::text
