#include "grove/scripted_provider.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "grove/error.hpp"
#include "grove/text.hpp"

namespace grove {
namespace {

MatchMode parse_mode(const std::string& mode) {
    if (mode == "substring") return MatchMode::kSubstring;
    if (mode == "regex") return MatchMode::kRegex;
    if (mode == "exact") return MatchMode::kExact;
    throw Error(ErrorKind::kParse, "unknown rule mode '" + mode + "'");
}

std::string expand(const std::string& response, const std::string& prompt, std::uint64_t seed,
                   const std::smatch* captures) {
    std::string out;
    out.reserve(response.size());
    for (std::size_t i = 0; i < response.size();) {
        if (response.compare(i, 2, "${") == 0) {
            const std::size_t close = response.find('}', i + 2);
            if (close != std::string::npos) {
                const std::string key = response.substr(i + 2, close - i - 2);
                if (key == "hash") {
                    const std::uint64_t h = text::fnv1a64(prompt, text::fnv1a64(std::to_string(seed)));
                    out += text::hex64(h).substr(0, 8);
                    i = close + 1;
                    continue;
                }
                if (key == "seed") {
                    out += std::to_string(seed);
                    i = close + 1;
                    continue;
                }
                if (key.size() == 1 && key[0] >= '1' && key[0] <= '9' && captures) {
                    const auto group = static_cast<std::size_t>(key[0] - '0');
                    if (group < captures->size()) out += (*captures)[group].str();
                    i = close + 1;
                    continue;
                }
            }
        }
        out += response[i++];
    }
    return out;
}

}  // namespace

ScriptedProvider::ScriptedProvider(std::uint64_t seed) : seed_(seed) {}

ScriptedProvider& ScriptedProvider::add_rule(Rule rule) {
    if (rule.responses.empty()) throw Error(ErrorKind::kPrecondition, "scripted rule needs a response");
    CompiledRule compiled;
    if (rule.mode == MatchMode::kRegex) {
        try {
            compiled.regex.emplace(rule.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw Error(ErrorKind::kParse, "invalid rule regex '" + rule.pattern + "': " + e.what());
        }
    }
    compiled.rule = std::move(rule);
    std::lock_guard lock(mutex_);
    rules_.push_back(std::move(compiled));
    return *this;
}

ScriptedProvider& ScriptedProvider::add_rule(std::string pattern, std::string response, MatchMode mode) {
    return add_rule(Rule{std::move(pattern), {std::move(response)}, mode});
}

ScriptedProvider& ScriptedProvider::add_responder(Responder responder) {
    CompiledRule compiled;
    compiled.responder = std::move(responder);
    std::lock_guard lock(mutex_);
    rules_.push_back(std::move(compiled));
    return *this;
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_rules_json(const nlohmann::json& rules,
                                                                    std::uint64_t seed) {
    if (!rules.is_array()) throw Error(ErrorKind::kParse, "scripted rules must be a JSON list");
    auto provider = std::make_unique<ScriptedProvider>(seed);
    for (const auto& r : rules) {
        try {
            Rule rule;
            rule.pattern = r.at("pattern").get<std::string>();
            rule.mode = parse_mode(r.value("mode", std::string("substring")));
            if (r.contains("responses")) {
                rule.responses = r.at("responses").get<std::vector<std::string>>();
            } else {
                rule.responses.push_back(r.at("response").get<std::string>());
            }
            provider->add_rule(std::move(rule));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::kParse, std::string("invalid scripted rule: ") + e.what());
        }
    }
    return provider;
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_rules_file(const std::filesystem::path& path,
                                                                    std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open rules file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kParse, "rules file " + path.string() + ": " + e.what());
    }
    return from_rules_json(j, seed);
}

std::unique_ptr<ScriptedProvider> ScriptedProvider::from_records(const std::vector<CallRecord>& records) {
    std::map<std::string, std::vector<std::string>> by_prompt;
    std::vector<std::string> order;
    for (const auto& r : records) {
        auto [it, inserted] = by_prompt.try_emplace(r.prompt);
        if (inserted) order.push_back(r.prompt);
        it->second.push_back(r.response);
    }
    auto provider = std::make_unique<ScriptedProvider>();
    for (const auto& prompt : order) {
        provider->add_rule(Rule{prompt, by_prompt[prompt], MatchMode::kExact});
    }
    return provider;
}

std::vector<ScriptedProvider::LoggedCall> ScriptedProvider::call_log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

std::size_t ScriptedProvider::call_count() const {
    std::lock_guard lock(mutex_);
    return log_.size();
}

std::string ScriptedProvider::generate(std::string_view prompt_view, const SamplingParams& sampling) {
    const std::string prompt(prompt_view);
    const std::uint64_t seed = sampling.seed.value_or(seed_);
    std::lock_guard lock(mutex_);
    for (auto& r : rules_) {
        std::string response;
        if (r.responder) {
            auto answer = r.responder(prompt, seed);
            if (!answer) continue;
            response = std::move(*answer);
        } else {
            std::smatch match;
            bool matched = false;
            switch (r.rule.mode) {
                case MatchMode::kSubstring: matched = prompt.find(r.rule.pattern) != std::string::npos; break;
                case MatchMode::kExact: matched = prompt == r.rule.pattern; break;
                case MatchMode::kRegex: matched = std::regex_search(prompt, match, *r.regex); break;
            }
            if (!matched) continue;
            const auto& chosen = r.rule.responses[r.uses % r.rule.responses.size()];
            response = expand(chosen, prompt, seed, r.rule.mode == MatchMode::kRegex ? &match : nullptr);
        }
        ++r.uses;
        log_.push_back({prompt, response});
        return response;
    }
    throw Error(ErrorKind::kProvider,
                "no scripted rule matches prompt: " + prompt.substr(0, std::min<std::size_t>(prompt.size(), 120)));
}

}  // namespace grove
