#include "grove/provider.hpp"

#include <cmath>

#include "grove/error.hpp"
#include "grove/text.hpp"

namespace grove {

std::string ChatProvider::complete(std::string_view prompt, const SamplingParams& sampling) {
    if (prompt.empty()) throw Error(ErrorKind::kPrecondition, "prompt must not be empty");
    const auto caps = capabilities();
    if (prompt.size() > caps.max_input_chars) {
        throw Error(ErrorKind::kOverLength, "prompt of " + std::to_string(prompt.size()) +
                                                " characters exceeds the provider limit of " +
                                                std::to_string(caps.max_input_chars));
    }
    sampling.validate();
    std::string response = generate(prompt, sampling);
    if (text::trim(response).empty()) {
        throw Error(ErrorKind::kProvider, id() + " returned an empty response");
    }
    return response;
}

bool detect_refusal(std::string_view response, const std::vector<std::string>& patterns) {
    if (patterns.empty()) throw Error(ErrorKind::kPrecondition, "refusal patterns must not be empty");
    for (const auto& p : patterns) {
        if (!p.empty() && text::contains_case_insensitive(response, p)) return true;
    }
    return false;
}

std::string EmbedderFingerprint::to_string() const { return id + "/" + std::to_string(dimension); }

double cosine(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::kPrecondition, "cosine: dimension mismatch");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Transcript::Transcript(const Transcript& other) : records_(other.records()) {}

Transcript& Transcript::operator=(const Transcript& other) {
    if (this != &other) {
        auto copy = other.records();
        std::lock_guard lock(mutex_);
        records_ = std::move(copy);
    }
    return *this;
}

void Transcript::append(CallRecord record) {
    std::lock_guard lock(mutex_);
    records_.push_back(std::move(record));
}

void Transcript::append_all(const Transcript& other) {
    auto copy = other.records();
    std::lock_guard lock(mutex_);
    for (auto& r : copy) records_.push_back(std::move(r));
}

std::vector<CallRecord> Transcript::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

}  // namespace grove
