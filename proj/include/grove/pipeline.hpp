#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grove/conditions.hpp"
#include "grove/evidence.hpp"
#include "grove/repository.hpp"
#include "grove/session.hpp"

namespace grove {

struct ExampleSet {
    std::vector<RepositoryItem> items;
};

struct GenerationResult {
    std::vector<std::string> retrieved_ids;
    Story initial;
    std::vector<Ambiguity> ambiguities;
    EvidenceForest forest;
    std::vector<EvidenceChain> selected;  // selected[i] comes from forest.trees[i]
    Story final_story;

    friend bool operator==(const GenerationResult&, const GenerationResult&) = default;
};

// Stage names used in transcripts.
namespace stage {
inline constexpr const char* kInitial = "initial";
inline constexpr const char* kAmbiguities = "ambiguities";
inline constexpr const char* kExpand = "expand";
inline constexpr const char* kSelect = "select";
inline constexpr const char* kRewrite = "rewrite";
}  // namespace stage

// The in-context instruction. With no exemplars the zero-shot variant is used
// and the exemplar block disappears entirely.
std::string render_initial_prompt(const ConditionSet& conditions, const ExampleSet& examples,
                                  const TemplateLibrary& templates);

Story generate_initial(const ConditionSet& conditions, const ExampleSet& examples,
                       const Session& session);

// `conditions` is only consulted when config.conditioned_ambiguities is set.
std::vector<Ambiguity> find_ambiguities(const Story& story, const Session& session,
                                        const ConditionSet* conditions = nullptr);

// Grows the complete b-ary tree level by level. Each expansion binds
// [EVIDENCE CHAIN] to the root-to-node texts joined by " ". Siblings at one
// depth may be expanded concurrently; node ids are fixed before dispatch.
EvidenceTree grow_tree(const Story& story, const Ambiguity& ambiguity, const Session& session);

EvidenceForest build_forest(const Story& story, const std::vector<Ambiguity>& ambiguities,
                            const Session& session);

// Chains numbered from 1, one per line.
std::string render_chain_list(const std::vector<EvidenceChain>& chains);

EvidenceChain select_chain(const Story& story, const EvidenceTree& tree, std::size_t tree_index,
                           const Session& session);

// Throws Error(kPrecondition) unless there is exactly one chain per tree.
Story rewrite(const Story& story, const std::vector<EvidenceChain>& chains, const Session& session);

GenerationResult run_grove(const ConditionSet& conditions, const Repository& repo,
                           const Session& session, const Embedder& embedder);

enum class Strategy { kGrove, kIcl, kCot, kPromptE, kStoryS };

std::string_view strategy_name(Strategy strategy);
std::optional<Strategy> strategy_from_name(std::string_view name);

struct CotParse {
    std::string story;
    bool marker_found = false;
};

// Text after the last "Integrated Story" marker, or the whole response.
CotParse parse_cot_response(std::string_view response);

// Index of the highest score; ties go to the lowest index.
std::size_t select_best_sample(const std::vector<double>& scores);

struct BaselineResult {
    Strategy strategy = Strategy::kIcl;
    std::vector<std::string> retrieved_ids;
    Story final_story;
    std::vector<Story> variants;       // Prompt-E
    std::vector<Story> samples;        // Story-S
    std::vector<double> sample_scores; // Story-S
    std::size_t selected_sample = 0;
    std::vector<std::string> flags;

    friend bool operator==(const BaselineResult&, const BaselineResult&) = default;
};

// Scores a Story-S sample. The default sums the six Likert metric means.
using StoryScorer = std::function<double(const Story&, const ConditionSet&, const Session&)>;

BaselineResult generate_baseline(Strategy strategy, const ConditionSet& conditions,
                                 const Repository& repo, const Session& session,
                                 const Embedder& embedder, const StoryScorer& scorer = {});

}  // namespace grove
