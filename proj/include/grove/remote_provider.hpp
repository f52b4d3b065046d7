#pragma once

#include <chrono>
#include <string>

#include "grove/provider.hpp"

namespace grove {

struct RemoteProviderConfig {
    // Full URL of a chat-completions endpoint, e.g.
    // https://api.openai.com/v1/chat/completions
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    std::string api_key;
    double timeout_seconds = 60.0;
    std::size_t max_input_chars = 16000;
    std::size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
};

// Chat-completions style HTTP JSON provider. One request per complete() call;
// transport failures (connection errors, HTTP 429 and 5xx) are retried with
// exponential backoff, everything else surfaces immediately.
class RemoteProvider final : public ChatProvider {
public:
    explicit RemoteProvider(RemoteProviderConfig config);

    std::string id() const override { return "remote:" + config_.model; }
    ProviderCapabilities capabilities() const override;

    // The request body sent for `prompt`.
    nlohmann::json request_payload(std::string_view prompt, const SamplingParams& sampling) const;

protected:
    std::string generate(std::string_view prompt, const SamplingParams& sampling) override;

private:
    RemoteProviderConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

}  // namespace grove
