#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "grove/conditions.hpp"
#include "grove/config.hpp"
#include "grove/error.hpp"
#include "grove/lexical_embedder.hpp"
#include "grove/prompt_template.hpp"
#include "grove/provider.hpp"
#include "grove/repository.hpp"
#include "grove/scripted_provider.hpp"
#include "grove/session.hpp"
#include "grove/text.hpp"

namespace grove::testing {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(GROVE_FIXTURE_DIR) / name;
}

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("grove-test-" + text::hex64(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Answers every prompt of the generation and evaluation templates. Outputs
// carry ${hash} so distinct prompts get distinct text.
inline void add_story_rules(ScriptedProvider& p) {
    p.add_rule("on a scale of 1-5", "4");
    p.add_rule("complete the story by including", "The keeper understood the storm at last. Revision ${hash}.");
    p.add_rule("only generate the number", "1");
    p.add_rule("Except for pure coincidence",
               "1. The keeper had lost a brother at sea ${hash}.\n2. The lamp had been broken ${hash}.\n"
               "3. The harbor had closed ${hash}.");
    p.add_rule("missing background information in the story",
               "1. Why the keeper stayed alone.\n2. Where the ship came from.\n3. Who lit the fire.\n"
               "4. When the storm began.");
    p.add_rule("Use one or two words", "melancholy");
    p.add_rule("distinctive subjects", "keeper, lighthouse, storm");
    p.add_rule("Summarize the above story", "1. A storm arrives.\n2. A ship is lost.\n3. The keeper relights the lamp.");
    p.add_rule("each of which describes one plot",
               "1. A storm arrives.\n2. A ship is lost.\n3. The keeper waits.\n4. The lamp is relit.\n5. Dawn breaks.");
    p.add_rule("Integrated Story", "Unclear parts.\nIntegrated Story: The keeper lit the lamp before dawn ${hash}.");
    p.add_rule("[Pp]lease write a", "A keeper watched the sea while the wind rose ${hash}.", MatchMode::kRegex);
}

// Evidence text the why-responder gives for child `c` of a node whose
// root-to-node chain renders as `chain`.
inline std::string why_answer(const std::string& chain, std::size_t c) {
    return "Reason " + text::hex64(text::fnv1a64(chain + "#" + std::to_string(c))).substr(0, 10) + ".";
}

// Answers asking-why prompts with why_answer items, [B] of them.
inline void add_why_responder(ScriptedProvider& p) {
    p.add_responder([](const std::string& prompt, std::uint64_t) -> std::optional<std::string> {
        static const std::regex re(R"(A missing detail is: ([\s\S]*)\. Except for pure coincidence, point out (\d+) )");
        std::smatch m;
        if (!std::regex_search(prompt, m, re)) return std::nullopt;
        const std::size_t b = std::stoul(m[2].str());
        std::string out;
        for (std::size_t c = 0; c < b; ++c) out += std::to_string(c + 1) + ". " + why_answer(m[1].str(), c) + "\n";
        return out;
    });
}

// Benchmark fixture. Plots carry the tag "zephyr" or "quartz" and moods
// "serene" or "uneasy"; every generated story repeats both tags, so each model
// answer can be keyed on them. Likert ratings are constant per case:
// (zephyr, serene) 2, (zephyr, uneasy) 3, (quartz, serene) 4, (quartz, uneasy) 5.
// Plot counts are 3 for zephyr and 5 for quartz.
inline int bench_rating(bool quartz, bool uneasy) { return 2 + (quartz ? 2 : 0) + (uneasy ? 1 : 0); }

inline void add_bench_responder(ScriptedProvider& p) {
    p.add_responder([](const std::string& prompt, std::uint64_t) -> std::optional<std::string> {
        const bool zephyr = prompt.find("zephyr") != std::string::npos;
        const bool quartz = prompt.find("quartz") != std::string::npos;
        const bool serene = prompt.find("serene") != std::string::npos;
        const bool uneasy = prompt.find("uneasy") != std::string::npos;
        if (zephyr == quartz || serene == uneasy) return std::nullopt;
        const std::string tags = std::string(quartz ? "quartz" : "zephyr") + " " + (uneasy ? "uneasy" : "serene");
        auto count_in = [&](const std::regex& re) -> std::size_t {
            std::smatch m;
            return std::regex_search(prompt, m, re) ? std::stoul(m[1].str()) : 0;
        };
        auto list = [](std::size_t n, const std::string& item) {
            std::string out;
            for (std::size_t i = 0; i < n; ++i) out += std::to_string(i + 1) + ". " + item + " " + std::to_string(i) + ".\n";
            return out;
        };
        static const std::regex why(R"(point out (\d+) factual)");
        static const std::regex missing(R"(point out (\d+) missing)");
        if (prompt.find("on a scale of 1-5") != std::string::npos) return std::to_string(bench_rating(quartz, uneasy));
        if (prompt.find("complete the story by including") != std::string::npos) return "Final " + tags + " story.";
        if (prompt.find("only generate the number") != std::string::npos) return std::string("1");
        if (prompt.find("Except for pure coincidence") != std::string::npos) return list(count_in(why), "Fact");
        if (prompt.find("missing background information") != std::string::npos) return list(count_in(missing), "Gap");
        if (prompt.find("each of which describes one plot") != std::string::npos) return list(quartz ? 5 : 3, "Plot");
        if (prompt.find("Integrated Story") != std::string::npos) return "Notes.\nIntegrated Story: A " + tags + " tale.";
        if (prompt.find("lease write a") != std::string::npos) return "A " + tags + " tale.";
        return std::nullopt;
    });
}

inline ConditionSet sample_conditions() {
    return ConditionSet::make("A lighthouse keeper waits for a ship that never arrives.", "melancholy",
                              "fairy tale", {"lighthouse keeper", "storm"});
}

// Provider, templates, config and transcript for one test.
struct Harness {
    ScriptedProvider provider;
    TemplateLibrary templates = TemplateLibrary::builtin();
    PipelineConfig config;
    Transcript transcript;
    LexicalEmbedder embedder;

    Harness() { add_story_rules(provider); }
    explicit Harness(bool with_rules) {
        if (with_rules) add_story_rules(provider);
    }

    Session session() { return Session(provider, templates, config, transcript); }
};

inline Repository small_repository(const Embedder& embedder) {
    Repository repo(embedder.fingerprint());
    repo.add({"r1", "The old keeper climbed the tower every night.", Provenance::kHumanCorpus, ""},
             ConditionSet::make("A keeper tends a lighthouse.", "lonely", "fairy tale", {"keeper", "tower"}),
             embedder);
    repo.add({"r2", "A fox argued with a crow over cheese.", Provenance::kHumanCorpus, ""},
             ConditionSet::make("A fox tricks a crow.", "amused", "fable", {"fox", "crow"}), embedder);
    repo.add({"r3", "The captain sailed into the storm.", Provenance::kHumanCorpus, ""},
             ConditionSet::make("A captain braves a storm.", "tense", "adventure", {"captain", "storm"}), embedder);
    return repo;
}

// Word list for synthetic corpora.
inline const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "river", "castle", "dragon", "winter", "lantern", "forest", "sailor", "queen",  "mirror", "garden",
        "thief", "storm",  "violin", "desert", "orchard", "wolf",  "letter", "bridge", "candle", "harbor",
        "tower", "moon",   "fox",    "crow",   "baker",  "clock",  "island", "poet",   "ghost",  "meadow",
        "joyful", "tense", "somber", "hopeful", "eerie", "calm",   "fable",  "myth",   "legend", "tale"};
    return words;
}

inline std::string random_phrase(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
    const auto& words = vocabulary();
    std::uniform_int_distribution<std::size_t> len(min_words, max_words);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    const std::size_t n = len(rng);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += words[pick(rng)];
    }
    return out;
}

// Kind of the grove::Error thrown by fn, or nullopt when nothing is thrown.
template <class Fn>
std::optional<ErrorKind> error_kind(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

template <class Fn>
double elapsed_seconds(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace grove::testing
