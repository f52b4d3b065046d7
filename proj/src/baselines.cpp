#include <cctype>

#include "grove/error.hpp"
#include "grove/evaluation.hpp"
#include "grove/parallel.hpp"
#include "grove/pipeline.hpp"
#include "grove/text.hpp"

namespace grove {
namespace {

constexpr std::string_view kCotMarker = "integrated story";

std::optional<std::string> parse_story(const std::string& response) {
    std::string s = text::trim(response);
    if (s.empty()) return std::nullopt;
    return s;
}

nlohmann::json summarize_text(const std::string& s) { return nlohmann::json(s); }

Story ask_story(const Session& session, Strategy strategy, const std::string& label, const std::string& prompt,
                std::optional<SamplingParams> sampling = std::nullopt) {
    const std::string name(strategy_name(strategy));
    auto text = session.ask<std::string>(name, label, prompt, parse_story, summarize_text, sampling);
    return make_generated_story(std::move(text), Provenance::kBaseline, name);
}

}  // namespace

std::string_view strategy_name(Strategy strategy) {
    switch (strategy) {
        case Strategy::kGrove: return "grove";
        case Strategy::kIcl: return "icl";
        case Strategy::kCot: return "cot";
        case Strategy::kPromptE: return "prompt-e";
        case Strategy::kStoryS: return "story-s";
    }
    return "?";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
    const std::string lowered = text::to_lower(name);
    for (Strategy s : {Strategy::kGrove, Strategy::kIcl, Strategy::kCot, Strategy::kPromptE, Strategy::kStoryS}) {
        if (strategy_name(s) == lowered) return s;
    }
    return std::nullopt;
}

CotParse parse_cot_response(std::string_view response) {
    const std::string lowered = text::to_lower(response);
    const std::size_t at = lowered.rfind(kCotMarker);
    if (at != std::string::npos) {
        std::size_t begin = at + kCotMarker.size();
        while (begin < response.size() &&
               (std::isspace(static_cast<unsigned char>(response[begin])) || response[begin] == ':' ||
                response[begin] == '*' || response[begin] == '"' || response[begin] == '#' ||
                response[begin] == '-')) {
            ++begin;
        }
        std::string story = text::trim(response.substr(begin));
        if (!story.empty()) return {std::move(story), true};
    }
    return {text::trim(response), false};
}

std::size_t select_best_sample(const std::vector<double>& scores) {
    if (scores.empty()) throw Error(ErrorKind::kPrecondition, "no samples to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

BaselineResult generate_baseline(Strategy strategy, const ConditionSet& conditions, const Repository& repo,
                                 const Session& session, const Embedder& embedder, const StoryScorer& scorer) {
    if (strategy == Strategy::kGrove) {
        throw Error(ErrorKind::kPrecondition, "GROVE is not a baseline; use run_grove");
    }
    const PipelineConfig& config = session.config();
    config.validate();
    if (config.k > 0 && repo.empty()) throw Error(ErrorKind::kPrecondition, "repository is empty but k > 0");

    BaselineResult result;
    result.strategy = strategy;
    ExampleSet examples;
    if (config.k > 0) examples.items = retrieve(repo, conditions, config.k, embedder);
    for (const auto& item : examples.items) result.retrieved_ids.push_back(item.id);
    const std::string instruction = render_initial_prompt(conditions, examples, session.templates());

    switch (strategy) {
        case Strategy::kIcl:
            result.final_story = ask_story(session, strategy, "", instruction);
            break;

        case Strategy::kCot: {
            const std::string prompt =
                instruction + "\n" + session.render(template_id::kCotSuffix, {{"N", std::to_string(config.depth)}});
            Story raw = ask_story(session, strategy, "", prompt);
            CotParse parsed = parse_cot_response(raw.text);
            if (!parsed.marker_found) result.flags.push_back("cot-marker-absent");
            result.final_story = make_generated_story(std::move(parsed.story), Provenance::kBaseline, "cot");
            break;
        }

        case Strategy::kPromptE: {
            constexpr std::size_t kVariants = 4;
            result.variants.resize(kVariants);
            std::vector<Transcript> logs(kVariants);
            try {
                parallel_for(kVariants, config.workers, [&](std::size_t i) {
                    const std::string suffix = session.render("prompt_e_" + std::to_string(i + 1), {});
                    result.variants[i] = ask_story(session.with_transcript(logs[i]), strategy,
                                                   "variant " + std::to_string(i + 1), instruction + " " + suffix);
                });
            } catch (...) {
                for (const auto& log : logs) session.transcript().append_all(log);
                throw;
            }
            for (const auto& log : logs) session.transcript().append_all(log);
            result.final_story = result.variants.front();
            break;
        }

        case Strategy::kStoryS: {
            // Samples share one prompt, so they run in order; a set seed is offset per sample.
            for (std::size_t i = 0; i < config.story_samples; ++i) {
                SamplingParams sampling = config.sampling;
                if (sampling.seed) *sampling.seed += i;
                result.samples.push_back(
                    ask_story(session, strategy, "sample " + std::to_string(i + 1), instruction, sampling));
            }
            for (const auto& sample : result.samples) {
                result.sample_scores.push_back(
                    scorer ? scorer(sample, conditions, session)
                           : likert_eval(sample, conditions, session, config.eval_trials).overall());
            }
            result.selected_sample = select_best_sample(result.sample_scores);
            result.final_story = result.samples[result.selected_sample];
            break;
        }

        case Strategy::kGrove: break;
    }
    return result;
}

}  // namespace grove
