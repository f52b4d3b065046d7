#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "grove/conditions.hpp"
#include "grove/evaluation.hpp"
#include "grove/pipeline.hpp"

namespace grove {

struct BenchmarkPlan {
    std::vector<std::string> plots;
    std::vector<std::string> moods;
    std::vector<std::string> genres;
    std::vector<std::vector<std::string>> subjects;
    std::vector<Strategy> strategies;

    static BenchmarkPlan from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    void validate() const;

    std::size_t cases_per_strategy() const;
    std::size_t total_runs() const { return cases_per_strategy() * strategies.size(); }
};

struct BenchmarkCase {
    std::size_t index = 0;  // position in enumeration order
    std::size_t plot = 0, mood = 0, genre = 0, subject = 0;
    Strategy strategy = Strategy::kGrove;
    ConditionSet conditions;
};

// Lexicographic over (plot, mood, genre, subject, strategy).
std::vector<BenchmarkCase> enumerate_cases(const BenchmarkPlan& plan);

// Per-case evaluation: Likert means per metric plus plot count. Prompt-E
// averages its four variants.
struct CaseScores {
    std::map<Metric, double> metrics;
    double plot_count = 0.0;
};

struct BenchmarkOptions {
    std::filesystem::path manifest_dir;
    std::size_t workers = 1;
    std::size_t plot_count_trials = 1;
    // Stop after this many newly executed cases; used to simulate interruption.
    std::optional<std::size_t> max_new_cases;
};

struct BenchmarkRun {
    nlohmann::json report;
    std::size_t executed = 0;
    std::size_t resumed = 0;
    bool complete = false;
};

// Content hash naming the manifest of a case.
std::string case_manifest_name(const BenchmarkCase& c, const PipelineConfig& config);

// Runs every case with every strategy, evaluates each output, and aggregates
// per-strategy means and population variances. Cases whose manifest already
// records a completed evaluation are not re-run. Case failures are recorded.
BenchmarkRun run_benchmark(const BenchmarkPlan& plan, const Repository& repo,
                           ChatProvider& provider, const Embedder& embedder,
                           const TemplateLibrary& templates, const PipelineConfig& config,
                           const BenchmarkOptions& options);

}  // namespace grove
