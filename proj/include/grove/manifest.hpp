#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "grove/config.hpp"
#include "grove/provider.hpp"

namespace grove {

// Replayable transcript of one run: configuration snapshot, every provider
// call in order, and the run's result.
struct RunManifest {
    nlohmann::json config;
    std::string provider_id;
    std::optional<EmbedderFingerprint> embedder;
    std::map<std::string, std::string> template_hashes;
    std::vector<CallRecord> calls;
    nlohmann::json result;
    std::vector<std::string> flags;
    std::string started_at;
    std::string finished_at;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);

    std::vector<const CallRecord*> calls_for_stage(const std::string& stage) const;
};

std::string utc_timestamp();

}  // namespace grove
