#pragma once

#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grove/config.hpp"

namespace grove {

struct ProviderCapabilities {
    // Character-length proxy for the model context.
    std::size_t max_input_chars = 16000;
    bool supports_sampling_seed = false;
};

// Chat-style text generation backend.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;

    virtual std::string id() const = 0;
    virtual ProviderCapabilities capabilities() const = 0;

    // Validates the prompt, delegates to generate(), and rejects empty output.
    // Safe to call concurrently.
    std::string complete(std::string_view prompt, const SamplingParams& sampling);

protected:
    virtual std::string generate(std::string_view prompt, const SamplingParams& sampling) = 0;
};

bool detect_refusal(std::string_view response, const std::vector<std::string>& patterns);

using Embedding = std::vector<float>;

struct EmbedderFingerprint {
    std::string id;
    std::size_t dimension = 0;

    std::string to_string() const;
    friend bool operator==(const EmbedderFingerprint&, const EmbedderFingerprint&) = default;
};

class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::size_t dimension() const = 0;
    virtual std::string id() const = 0;
    // Returns exactly dimension() finite values with L2 norm 1 or 0.
    // Throws Error(kPrecondition) on empty text.
    virtual Embedding embed(std::string_view text) const = 0;

    EmbedderFingerprint fingerprint() const { return {id(), dimension()}; }
};

double cosine(const Embedding& a, const Embedding& b);

// One provider call as it appears in a run manifest.
struct CallRecord {
    std::string stage;
    std::string label;
    std::string prompt;
    std::string response;
    nlohmann::json parsed;
    SamplingParams sampling;
};

// Append-only, mutex-guarded call log.
class Transcript {
public:
    Transcript() = default;
    Transcript(const Transcript& other);
    Transcript& operator=(const Transcript& other);

    void append(CallRecord record);
    void append_all(const Transcript& other);
    std::vector<CallRecord> records() const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<CallRecord> records_;
};

}  // namespace grove
