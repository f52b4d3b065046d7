#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace grove {

struct SamplingParams {
    double top_p = 0.73;
    double temperature = 0.72;
    // Honored by offline providers; forwarded to remote ones when set.
    std::optional<std::uint64_t> seed;

    void validate() const;
    friend bool operator==(const SamplingParams&, const SamplingParams&) = default;
};

struct RetryPolicy {
    std::size_t max_refusal_retries = 2;
    std::size_t max_malformed_retries = 2;

    friend bool operator==(const RetryPolicy&, const RetryPolicy&) = default;
};

std::vector<std::string> default_refusal_patterns();

struct PipelineConfig {
    std::size_t k = 1;           // retrieved exemplars
    std::size_t ambiguities = 2; // N
    std::size_t branching = 2;   // b
    std::size_t depth = 2;       // I
    SamplingParams sampling;
    RetryPolicy retry;
    std::vector<std::string> refusal_patterns = default_refusal_patterns();
    // Use the ambiguity template variant that restates the target conditions.
    bool conditioned_ambiguities = false;
    // Story-S sample count.
    std::size_t story_samples = 3;
    // Likert trials per metric.
    std::size_t eval_trials = 3;
    // Concurrency bound for independent provider calls. Results never depend on it.
    std::size_t workers = 1;

    void validate() const;
};

}  // namespace grove
