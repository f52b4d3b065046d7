#include "grove/manifest.hpp"

#include <chrono>
#include <ctime>

#include "grove/error.hpp"
#include "grove/serialization.hpp"

namespace grove {

using nlohmann::json;

json RunManifest::to_json() const {
    json calls_json = json::array();
    for (const auto& c : calls) calls_json.push_back(grove::to_json(c));
    return {{"config", config},
            {"provider", provider_id},
            {"embedder", embedder ? json{{"id", embedder->id}, {"dimension", embedder->dimension}} : json(nullptr)},
            {"template_hashes", template_hashes},
            {"calls", std::move(calls_json)},
            {"result", result},
            {"flags", flags},
            {"started_at", started_at},
            {"finished_at", finished_at}};
}

RunManifest RunManifest::from_json(const json& j) {
    try {
        RunManifest m;
        m.config = j.value("config", json::object());
        m.provider_id = j.value("provider", std::string());
        if (j.contains("embedder") && !j.at("embedder").is_null()) {
            m.embedder = EmbedderFingerprint{j.at("embedder").at("id").get<std::string>(),
                                             j.at("embedder").at("dimension").get<std::size_t>()};
        }
        m.template_hashes = j.value("template_hashes", std::map<std::string, std::string>{});
        for (const auto& c : j.at("calls")) m.calls.push_back(call_record_from_json(c));
        m.result = j.value("result", json(nullptr));
        m.flags = j.value("flags", std::vector<std::string>{});
        m.started_at = j.value("started_at", std::string());
        m.finished_at = j.value("finished_at", std::string());
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, std::string("run manifest: ") + e.what());
    }
}

std::vector<const CallRecord*> RunManifest::calls_for_stage(const std::string& stage) const {
    std::vector<const CallRecord*> out;
    for (const auto& c : calls) {
        if (c.stage == stage) out.push_back(&c);
    }
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace grove
