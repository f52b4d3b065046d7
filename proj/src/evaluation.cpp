#include "grove/evaluation.hpp"

#include <unordered_set>

#include "grove/error.hpp"
#include "grove/parallel.hpp"
#include "grove/text.hpp"

namespace grove {
namespace {

std::string ngram_key(const std::vector<std::string>& tokens, std::size_t begin, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) key += '\x1f';
        key += tokens[begin + i];
    }
    return key;
}

}  // namespace

std::string_view metric_name(Metric metric) {
    switch (metric) {
        case Metric::kGrammar: return "grammar";
        case Metric::kCoherence: return "coherence";
        case Metric::kLikability: return "likability";
        case Metric::kRelevance: return "relevance";
        case Metric::kComplexity: return "complexity";
        case Metric::kCreativity: return "creativity";
    }
    return "?";
}

std::string metric_template_id(Metric metric) { return "likert_" + std::string(metric_name(metric)); }

MetricScores MetricScores::from_raw(std::vector<int> raw) {
    MetricScores m;
    m.raw = std::move(raw);
    if (m.raw.empty()) return m;
    double sum = 0.0;
    for (int r : m.raw) sum += r;
    m.mean = sum / static_cast<double>(m.raw.size());
    double sq = 0.0;
    for (int r : m.raw) sq += (r - m.mean) * (r - m.mean);
    m.variance = sq / static_cast<double>(m.raw.size());
    return m;
}

double LikertReport::overall() const {
    double total = 0.0;
    for (const auto& [metric, scores] : metrics) total += scores.mean;
    return total;
}

std::string describe_conditions(const ConditionSet& conditions) {
    std::vector<std::string> lines;
    if (conditions.has(Slot::kGenre)) lines.push_back("Genre: " + conditions.slot_text(Slot::kGenre));
    if (conditions.has(Slot::kMood)) lines.push_back("Mood: " + conditions.slot_text(Slot::kMood));
    if (conditions.has(Slot::kSubjects)) lines.push_back("Subjects: " + conditions.slot_text(Slot::kSubjects));
    if (conditions.has(Slot::kPlot)) lines.push_back("Plot: " + conditions.slot_text(Slot::kPlot));
    if (lines.empty()) return "none";
    return text::join(lines, "\n");
}

std::optional<int> parse_rating(std::string_view response) {
    if (auto v = text::first_integer_in_range(response, 1, 5)) return static_cast<int>(*v);
    return std::nullopt;
}

LikertReport likert_eval(const Story& story, const ConditionSet& conditions, const Session& session,
                         std::size_t trials) {
    if (trials < 1) throw Error(ErrorKind::kPrecondition, "trials must be >= 1");
    if (text::trim(story.text).empty()) throw Error(ErrorKind::kPrecondition, "story text is empty");

    const std::string described = describe_conditions(conditions);
    const std::size_t tasks = kAllMetrics.size() * trials;
    std::vector<int> scores(tasks, 0);
    std::vector<Transcript> logs(tasks);
    auto merge = [&] {
        for (const auto& log : logs) session.transcript().append_all(log);
    };
    try {
        parallel_for(tasks, session.config().workers, [&](std::size_t t) {
            const Metric metric = kAllMetrics[t / trials];
            const std::size_t trial = t % trials;
            SamplingParams sampling = session.config().sampling;
            if (sampling.seed) *sampling.seed += trial;
            const std::string prompt =
                session.render(metric_template_id(metric), {{"STORY", story.text}, {"CONDITIONS", described}});
            const std::string label = std::string(metric_name(metric)) + " trial " + std::to_string(trial + 1);
            scores[t] = with_context("likert " + label, [&] {
                return session.with_transcript(logs[t]).ask<int>(
                    "likert", label, prompt, parse_rating, [](const int& s) { return nlohmann::json({{"score", s}}); },
                    sampling);
            });
        });
    } catch (...) {
        merge();
        throw;
    }
    merge();

    LikertReport report;
    report.trials = trials;
    for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
        std::vector<int> raw(scores.begin() + static_cast<long>(m * trials),
                             scores.begin() + static_cast<long>((m + 1) * trials));
        report.metrics.emplace(kAllMetrics[m], MetricScores::from_raw(std::move(raw)));
    }
    return report;
}

double count_plots(const Story& story, const Session& session, std::size_t trials) {
    if (trials < 1) throw Error(ErrorKind::kPrecondition, "trials must be >= 1");
    if (text::trim(story.text).empty()) throw Error(ErrorKind::kPrecondition, "story text is empty");
    const std::string prompt = session.render(template_id::kPlotCount, {{"STORY", story.text}});
    double total = 0.0;
    std::size_t counted = 0;
    std::string last_error;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        SamplingParams sampling = session.config().sampling;
        if (sampling.seed) *sampling.seed += trial;
        try {
            auto n = session.ask<std::size_t>(
                "plot-count", "trial " + std::to_string(trial + 1), prompt,
                [](const std::string& r) -> std::optional<std::size_t> {
                    auto items = text::parse_list(r);
                    if (items.empty()) return std::nullopt;
                    return items.size();
                },
                [](const std::size_t& n) { return nlohmann::json({{"plots", n}}); }, sampling);
            total += static_cast<double>(n);
            ++counted;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::kMalformedResponse && e.kind() != ErrorKind::kRefusal) throw;
            last_error = e.what();
        }
    }
    if (counted == 0) {
        throw Error(ErrorKind::kMalformedResponse, "plot count failed in every trial: " + last_error);
    }
    return total / static_cast<double>(counted);
}

double ngram_overlap(std::string_view generated, std::string_view reference, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::kPrecondition, "n must be >= 1");
    const auto gen = text::tokenize(generated);
    if (gen.size() < n) {
        throw Error(ErrorKind::kPrecondition, "generated text has " + std::to_string(gen.size()) +
                                                  " tokens, fewer than n = " + std::to_string(n));
    }
    const auto ref = text::tokenize(reference);
    std::unordered_set<std::string> ref_grams;
    for (std::size_t i = 0; i + n <= ref.size(); ++i) ref_grams.insert(ngram_key(ref, i, n));

    std::unordered_set<std::string> gen_grams;
    std::size_t shared = 0;
    for (std::size_t i = 0; i + n <= gen.size(); ++i) {
        auto [it, inserted] = gen_grams.insert(ngram_key(gen, i, n));
        if (inserted && ref_grams.count(*it)) ++shared;
    }
    return static_cast<double>(shared) / static_cast<double>(gen_grams.size());
}

OverlapReport overlap_report(std::string_view generated, std::string_view reference) {
    OverlapReport report;
    const std::size_t tokens = text::tokenize(generated).size();
    for (std::size_t n = 1; n <= 4; ++n) {
        if (tokens < n) {
            report.too_short.push_back(n);
            continue;
        }
        report.ratios[n - 1] = ngram_overlap(generated, reference, n);
    }
    return report;
}

}  // namespace grove
