#pragma once

#include <stdexcept>
#include <string>

namespace grove {

enum class ErrorKind {
    kPrecondition,
    kMissingBinding,
    kTemplate,
    kRefusal,
    kMalformedResponse,
    kOverLength,
    kTransport,
    kProvider,
    kParse,
    kFingerprint,
    kIo,
    kBuild,
};

const char* to_string(ErrorKind kind);

// Base exception for every failure the engine reports. `raw_response` holds the
// last model output when the failure came from parsing or refusal handling.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string raw_response = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& raw_response() const noexcept { return raw_response_; }

    // Returns a copy whose message is prefixed with `context: `.
    Error with_context(const std::string& context) const;

private:
    ErrorKind kind_;
    std::string raw_response_;
};

// Runs `fn`, rethrowing any grove::Error with `context` prepended.
template <class Fn>
decltype(auto) with_context(const std::string& context, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw e.with_context(context);
    }
}

}  // namespace grove
