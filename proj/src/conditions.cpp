#include "grove/conditions.hpp"

#include "grove/error.hpp"
#include "grove/text.hpp"

namespace grove {
namespace {

std::string require_text(std::string value, std::string_view slot) {
    std::string trimmed = text::trim(value);
    if (trimmed.empty()) {
        throw Error(ErrorKind::kPrecondition,
                    "condition slot '" + std::string(slot) + "' must not be blank");
    }
    return trimmed;
}

}  // namespace

std::string_view slot_name(Slot slot) {
    switch (slot) {
        case Slot::kPlot: return "plot";
        case Slot::kMood: return "mood";
        case Slot::kGenre: return "genre";
        case Slot::kSubjects: return "subjects";
    }
    return "?";
}

std::optional<Slot> slot_from_name(std::string_view name) {
    for (Slot s : kAllSlots) {
        if (slot_name(s) == name) return s;
    }
    return std::nullopt;
}

ConditionSet ConditionSet::make(std::string plot, std::string mood, std::string genre,
                                std::vector<std::string> subjects) {
    ConditionSet c;
    c.set_plot(std::move(plot)).set_mood(std::move(mood)).set_genre(std::move(genre));
    c.set_subjects(std::move(subjects));
    return c;
}

ConditionSet& ConditionSet::set_plot(std::string value) {
    plot_ = require_text(std::move(value), "plot");
    return *this;
}

ConditionSet& ConditionSet::set_mood(std::string value) {
    mood_ = require_text(std::move(value), "mood");
    return *this;
}

ConditionSet& ConditionSet::set_genre(std::string value) {
    genre_ = require_text(std::move(value), "genre");
    return *this;
}

ConditionSet& ConditionSet::set_subjects(std::vector<std::string> values) {
    std::vector<std::string> cleaned;
    cleaned.reserve(values.size());
    for (auto& v : values) cleaned.push_back(require_text(std::move(v), "subjects"));
    subjects_ = std::move(cleaned);
    return *this;
}

bool ConditionSet::has(Slot slot) const {
    switch (slot) {
        case Slot::kPlot: return plot_.has_value();
        case Slot::kMood: return mood_.has_value();
        case Slot::kGenre: return genre_.has_value();
        case Slot::kSubjects: return !subjects_.empty();
    }
    return false;
}

std::string ConditionSet::slot_text(Slot slot) const {
    switch (slot) {
        case Slot::kPlot: return plot_.value_or("");
        case Slot::kMood: return mood_.value_or("");
        case Slot::kGenre: return genre_.value_or("");
        case Slot::kSubjects: return text::join(subjects_, ", ");
    }
    return {};
}

std::vector<Slot> ConditionSet::populated() const {
    std::vector<Slot> out;
    for (Slot s : kAllSlots) {
        if (has(s)) out.push_back(s);
    }
    return out;
}

std::vector<Slot> shared_slots(const ConditionSet& a, const ConditionSet& b) {
    std::vector<Slot> out;
    for (Slot s : kAllSlots) {
        if (a.has(s) && b.has(s)) out.push_back(s);
    }
    return out;
}

std::string_view provenance_name(Provenance p) {
    switch (p) {
        case Provenance::kHumanCorpus: return "human-corpus";
        case Provenance::kGeneratedInitial: return "generated-initial";
        case Provenance::kGeneratedFinal: return "generated-final";
        case Provenance::kBaseline: return "baseline";
    }
    return "?";
}

std::optional<Provenance> provenance_from_name(std::string_view name) {
    for (Provenance p : {Provenance::kHumanCorpus, Provenance::kGeneratedInitial,
                         Provenance::kGeneratedFinal, Provenance::kBaseline}) {
        if (provenance_name(p) == name) return p;
    }
    return std::nullopt;
}

Story make_generated_story(std::string text, Provenance provenance, std::string strategy) {
    Story s;
    std::string prefix = provenance == Provenance::kBaseline ? strategy : std::string(provenance_name(provenance));
    s.id = prefix + "-" + text::hex64(text::fnv1a64(text)).substr(0, 12);
    s.text = std::move(text);
    s.provenance = provenance;
    s.strategy = std::move(strategy);
    return s;
}

}  // namespace grove
