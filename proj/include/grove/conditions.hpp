#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grove {

enum class Slot { kPlot, kMood, kGenre, kSubjects };

inline constexpr std::array<Slot, 4> kAllSlots{Slot::kPlot, Slot::kMood, Slot::kGenre,
                                               Slot::kSubjects};

std::string_view slot_name(Slot slot);
std::optional<Slot> slot_from_name(std::string_view name);

// Target control conditions, also used as the key of a repository item.
// A slot is "populated" when it holds non-blank text (or, for subjects, at
// least one entry). Setters trim and reject blank values.
class ConditionSet {
public:
    ConditionSet() = default;

    static ConditionSet make(std::string plot, std::string mood, std::string genre,
                             std::vector<std::string> subjects);

    const std::optional<std::string>& plot() const { return plot_; }
    const std::optional<std::string>& mood() const { return mood_; }
    const std::optional<std::string>& genre() const { return genre_; }
    const std::vector<std::string>& subjects() const { return subjects_; }

    ConditionSet& set_plot(std::string value);
    ConditionSet& set_mood(std::string value);
    ConditionSet& set_genre(std::string value);
    ConditionSet& set_subjects(std::vector<std::string> values);

    bool has(Slot slot) const;
    // Text used to embed the slot; subjects are joined with ", ".
    std::string slot_text(Slot slot) const;
    std::vector<Slot> populated() const;
    bool complete() const { return populated().size() == kAllSlots.size(); }

    friend bool operator==(const ConditionSet&, const ConditionSet&) = default;

private:
    std::optional<std::string> plot_;
    std::optional<std::string> mood_;
    std::optional<std::string> genre_;
    std::vector<std::string> subjects_;
};

std::vector<Slot> shared_slots(const ConditionSet& a, const ConditionSet& b);

enum class Provenance { kHumanCorpus, kGeneratedInitial, kGeneratedFinal, kBaseline };

std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view name);

struct Story {
    std::string id;
    std::string text;
    Provenance provenance = Provenance::kHumanCorpus;
    // Set for Provenance::kBaseline, e.g. "icl" or "story-s".
    std::string strategy;

    friend bool operator==(const Story&, const Story&) = default;
};

// A story whose id is derived from its content.
Story make_generated_story(std::string text, Provenance provenance, std::string strategy = {});

struct Ambiguity {
    std::string text;
    std::size_t index = 0;

    friend bool operator==(const Ambiguity&, const Ambiguity&) = default;
};

}  // namespace grove
