#include "grove/error.hpp"

namespace grove {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::kPrecondition: return "precondition";
        case ErrorKind::kMissingBinding: return "missing-binding";
        case ErrorKind::kTemplate: return "template";
        case ErrorKind::kRefusal: return "refusal";
        case ErrorKind::kMalformedResponse: return "malformed-response";
        case ErrorKind::kOverLength: return "over-length";
        case ErrorKind::kTransport: return "transport";
        case ErrorKind::kProvider: return "provider";
        case ErrorKind::kParse: return "parse";
        case ErrorKind::kFingerprint: return "fingerprint";
        case ErrorKind::kIo: return "io";
        case ErrorKind::kBuild: return "build";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::string raw_response)
    : std::runtime_error(message), kind_(kind), raw_response_(std::move(raw_response)) {}

Error Error::with_context(const std::string& context) const {
    return Error(kind_, context + ": " + what(), raw_response_);
}

}  // namespace grove
