#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace grove {

using Bindings = std::map<std::string, std::string, std::less<>>;

// A prompt body with bracketed uppercase placeholders such as [STORY] or [N].
class PromptTemplate {
public:
    PromptTemplate(std::string id, std::string body);

    const std::string& id() const { return id_; }
    const std::string& body() const { return body_; }
    // Placeholder names without brackets, e.g. "EVIDENCE CHAIN".
    const std::set<std::string>& placeholders() const { return placeholders_; }

    // Substitutes every placeholder in one pass over the body; bound values are
    // inserted verbatim and never rescanned. Throws Error(kMissingBinding).
    std::string render(const Bindings& bindings) const;

private:
    std::string id_;
    std::string body_;
    std::set<std::string> placeholders_;
};

std::set<std::string> scan_placeholders(std::string_view body);

namespace template_id {
inline constexpr std::string_view kInitialStory = "initial_story";
inline constexpr std::string_view kInitialStoryZeroShot = "initial_story_zero_shot";
inline constexpr std::string_view kCotSuffix = "cot_suffix";
inline constexpr std::string_view kExtractMood = "extract_mood";
inline constexpr std::string_view kExtractSubjects = "extract_subjects";
inline constexpr std::string_view kExtractPlot = "extract_plot";
inline constexpr std::string_view kAmbiguity = "ambiguity";
inline constexpr std::string_view kAmbiguityConditioned = "ambiguity_conditioned";
inline constexpr std::string_view kAskingWhy = "asking_why";
inline constexpr std::string_view kSelectChain = "select_chain";
inline constexpr std::string_view kRewrite = "rewrite";
inline constexpr std::string_view kPlotCount = "plot_count";
}  // namespace template_id

// Returns the documented placeholder set for every shipped template id.
const std::map<std::string, std::set<std::string>, std::less<>>& documented_placeholders();

class TemplateLibrary {
public:
    // Templates compiled in from the templates/ asset directory.
    static TemplateLibrary builtin();
    // Builtins overridden by every <id>.txt found in `dir`.
    static TemplateLibrary load(const std::filesystem::path& dir);

    const PromptTemplate& get(std::string_view id) const;
    bool contains(std::string_view id) const;
    std::vector<std::string> ids() const;

    // Content hash per template, for run manifests.
    std::map<std::string, std::string> hashes() const;

    void put(PromptTemplate tpl);

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace grove
