#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grove/conditions.hpp"
#include "grove/session.hpp"

namespace grove {

enum class Metric { kGrammar, kCoherence, kLikability, kRelevance, kComplexity, kCreativity };

inline constexpr std::array<Metric, 6> kAllMetrics{Metric::kGrammar,    Metric::kCoherence,
                                                   Metric::kLikability, Metric::kRelevance,
                                                   Metric::kComplexity, Metric::kCreativity};

std::string_view metric_name(Metric metric);
// Template id of the metric's rubric, e.g. "likert_grammar".
std::string metric_template_id(Metric metric);

struct MetricScores {
    std::vector<int> raw;  // one per trial, each in [1, 5]
    double mean = 0.0;
    double variance = 0.0;  // population variance

    static MetricScores from_raw(std::vector<int> raw);
    friend bool operator==(const MetricScores&, const MetricScores&) = default;
};

struct LikertReport {
    std::size_t trials = 0;
    std::map<Metric, MetricScores> metrics;

    // Sum of the metric means.
    double overall() const;
    friend bool operator==(const LikertReport&, const LikertReport&) = default;
};

// "Genre: ... / Mood: ... / Subjects: ... / Plot: ..." for populated slots.
std::string describe_conditions(const ConditionSet& conditions);

// First integer in [1, 5] in the response.
std::optional<int> parse_rating(std::string_view response);

// One call per (metric, trial), re-asked within the malformed budget until a
// rating appears. Calls may run concurrently; records are ordered by
// (metric, trial).
LikertReport likert_eval(const Story& story, const ConditionSet& conditions,
                         const Session& session, std::size_t trials = 3);

// Mean list length over trials; trials whose list never parses are dropped,
// and an error is thrown only when every trial fails.
double count_plots(const Story& story, const Session& session, std::size_t trials = 1);

// Distinct n-grams of `generated` that also occur in `reference`, divided by
// the distinct n-grams of `generated`. Throws if generated has fewer than n tokens.
double ngram_overlap(std::string_view generated, std::string_view reference, std::size_t n);

struct OverlapReport {
    std::array<double, 4> ratios{};  // n = 1..4
    std::vector<std::size_t> too_short;  // n values longer than the generated text

    double ratio(std::size_t n) const { return ratios.at(n - 1); }
};

OverlapReport overlap_report(std::string_view generated, std::string_view reference);

// Categories reported by an external plagiarism service; copied into reports
// verbatim when the user supplies them.
struct ExternalPlagiarism {
    double identical = 0.0;
    double minor_changes = 0.0;
    double paraphrased = 0.0;
    double omitted_words = 0.0;
};

}  // namespace grove
