#pragma once

#include <functional>
#include <optional>
#include <string>

#include "grove/config.hpp"
#include "grove/error.hpp"
#include "grove/prompt_template.hpp"
#include "grove/provider.hpp"

namespace grove {

// Everything a pipeline stage needs to talk to the model: provider, templates,
// configuration, and the transcript that receives each call.
class Session {
public:
    Session(ChatProvider& provider, const TemplateLibrary& templates, const PipelineConfig& config,
            Transcript& transcript)
        : provider_(&provider), templates_(&templates), config_(&config), transcript_(&transcript) {}

    ChatProvider& provider() const { return *provider_; }
    const TemplateLibrary& templates() const { return *templates_; }
    const PipelineConfig& config() const { return *config_; }
    Transcript& transcript() const { return *transcript_; }

    // Same provider/templates/config, different transcript. Used to give
    // concurrent tasks private logs that are merged in a fixed order.
    Session with_transcript(Transcript& transcript) const {
        return Session(*provider_, *templates_, *config_, transcript);
    }

    std::string render(std::string_view template_id, const Bindings& bindings) const {
        return templates_->get(template_id).render(bindings);
    }

    // Issues `prompt` until `parse` yields a value. Refusals consume the refusal
    // budget, unparseable responses the malformed budget; every attempt is
    // recorded. Exhausting a budget throws with the last raw response attached.
    template <class T>
    T ask(const std::string& stage, const std::string& label, const std::string& prompt,
          const std::function<std::optional<T>(const std::string&)>& parse,
          const std::function<nlohmann::json(const T&)>& summarize,
          std::optional<SamplingParams> sampling = std::nullopt) const;

private:
    ChatProvider* provider_;
    const TemplateLibrary* templates_;
    const PipelineConfig* config_;
    Transcript* transcript_;
};

template <class T>
T Session::ask(const std::string& stage, const std::string& label, const std::string& prompt,
               const std::function<std::optional<T>(const std::string&)>& parse,
               const std::function<nlohmann::json(const T&)>& summarize,
               std::optional<SamplingParams> sampling) const {
    const SamplingParams params = sampling.value_or(config_->sampling);
    std::size_t refusals = 0;
    std::size_t malformed = 0;
    while (true) {
        std::string response = provider_->complete(prompt, params);
        CallRecord record{stage, label, prompt, response, nullptr, params};
        if (detect_refusal(response, config_->refusal_patterns)) {
            record.parsed = {{"refusal", true}};
            transcript_->append(std::move(record));
            if (refusals++ >= config_->retry.max_refusal_retries) {
                throw Error(ErrorKind::kRefusal,
                            stage + ": model refused " + std::to_string(refusals) + " time(s)",
                            response);
            }
            continue;
        }
        std::optional<T> value = parse(response);
        if (!value) {
            record.parsed = {{"malformed", true}};
            transcript_->append(std::move(record));
            if (malformed++ >= config_->retry.max_malformed_retries) {
                throw Error(ErrorKind::kMalformedResponse,
                            stage + ": unusable response after " + std::to_string(malformed) +
                                " attempt(s)",
                            response);
            }
            continue;
        }
        record.parsed = summarize(*value);
        transcript_->append(std::move(record));
        return std::move(*value);
    }
}

}  // namespace grove
