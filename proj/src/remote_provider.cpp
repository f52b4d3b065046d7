#include "grove/remote_provider.hpp"

#include <regex>
#include <thread>

#include <httplib.h>

#include "grove/error.hpp"

namespace grove {

RemoteProvider::RemoteProvider(RemoteProviderConfig config) : config_(std::move(config)) {
    static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url)) {
        throw Error(ErrorKind::kPrecondition, "invalid provider endpoint URL '" + config_.endpoint + "'");
    }
    scheme_host_port_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
    if (config_.max_attempts == 0) config_.max_attempts = 1;
}

ProviderCapabilities RemoteProvider::capabilities() const {
    return {config_.max_input_chars, true};
}

nlohmann::json RemoteProvider::request_payload(std::string_view prompt, const SamplingParams& sampling) const {
    nlohmann::json body = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
        {"top_p", sampling.top_p},
        {"temperature", sampling.temperature},
    };
    if (sampling.seed) body["seed"] = *sampling.seed;
    return body;
}

std::string RemoteProvider::generate(std::string_view prompt, const SamplingParams& sampling) {
    const std::string body = request_payload(prompt, sampling).dump();
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    auto backoff = config_.initial_backoff;
    for (std::size_t attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        httplib::Client client(scheme_host_port_);
        const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
        const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout).count();
        client.set_connection_timeout(micros / 1000000, micros % 1000000);
        client.set_read_timeout(micros / 1000000, micros % 1000000);
        client.set_write_timeout(micros / 1000000, micros % 1000000);

        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "request failed: " + httplib::to_string(res.error());
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else if (res->status != 200) {
            throw Error(ErrorKind::kProvider,
                        "HTTP " + std::to_string(res->status) + " from " + config_.endpoint, res->body);
        } else {
            try {
                auto j = nlohmann::json::parse(res->body);
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::kProvider, std::string("unexpected response body: ") + e.what(),
                            res->body);
            }
        }
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(ErrorKind::kTransport, config_.endpoint + ": " + last_error + " after " +
                                           std::to_string(config_.max_attempts) + " attempt(s)");
}

}  // namespace grove
