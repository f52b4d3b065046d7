#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "grove/provider.hpp"

namespace grove {

enum class MatchMode { kSubstring, kRegex, kExact };

// Deterministic offline provider. Rules are tried in order; the first whose
// pattern matches the prompt answers it. A rule holding several responses
// hands them out in turn, one per matching call.
//
// Response text may reference:
//   ${hash}   8 hex digits derived from (effective seed, prompt)
//   ${seed}   the effective seed (sampling seed if set, else the provider seed)
//   ${1}..${9} capture groups of a regex rule
class ScriptedProvider final : public ChatProvider {
public:
    using Responder =
        std::function<std::optional<std::string>(const std::string& prompt, std::uint64_t seed)>;

    struct Rule {
        std::string pattern;
        std::vector<std::string> responses;
        MatchMode mode = MatchMode::kSubstring;
    };

    explicit ScriptedProvider(std::uint64_t seed = 0);

    ScriptedProvider& add_rule(Rule rule);
    ScriptedProvider& add_rule(std::string pattern, std::string response,
                               MatchMode mode = MatchMode::kSubstring);
    // Callable rule; returning nullopt passes the prompt on to later rules.
    ScriptedProvider& add_responder(Responder responder);

    // Rules file: JSON list of {pattern, response | responses[], mode}.
    static std::unique_ptr<ScriptedProvider> from_rules_file(const std::filesystem::path& path,
                                                             std::uint64_t seed = 0);
    static std::unique_ptr<ScriptedProvider> from_rules_json(const nlohmann::json& rules,
                                                             std::uint64_t seed = 0);
    // Exact-prompt rules reproducing the response sequence of `records`.
    static std::unique_ptr<ScriptedProvider> from_records(const std::vector<CallRecord>& records);

    std::string id() const override { return "scripted"; }
    ProviderCapabilities capabilities() const override { return capabilities_; }
    void set_capabilities(ProviderCapabilities caps) { capabilities_ = caps; }

    struct LoggedCall {
        std::string prompt;
        std::string response;
    };
    std::vector<LoggedCall> call_log() const;
    std::size_t call_count() const;

protected:
    std::string generate(std::string_view prompt, const SamplingParams& sampling) override;

private:
    struct CompiledRule {
        Rule rule;
        std::optional<std::regex> regex;
        Responder responder;
        std::size_t uses = 0;
    };

    std::uint64_t seed_;
    ProviderCapabilities capabilities_{1u << 20, true};
    mutable std::mutex mutex_;
    std::vector<CompiledRule> rules_;
    std::vector<LoggedCall> log_;
};

}  // namespace grove
