#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "grove/conditions.hpp"
#include "grove/config.hpp"
#include "grove/evaluation.hpp"
#include "grove/evidence.hpp"
#include "grove/pipeline.hpp"
#include "grove/provider.hpp"

namespace grove {

nlohmann::json to_json(const ConditionSet& conditions);
ConditionSet conditions_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Story& story);
Story story_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SamplingParams& sampling);
SamplingParams sampling_from_json(const nlohmann::json& j);

// Snapshot of everything that influences results; `workers` is excluded.
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});

nlohmann::json to_json(const EvidenceTree& tree);
EvidenceTree evidence_tree_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvidenceChain& chain);
EvidenceChain evidence_chain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GenerationResult& result);
GenerationResult generation_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BaselineResult& result);
BaselineResult baseline_result_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CallRecord& record);
CallRecord call_record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LikertReport& report);
LikertReport likert_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OverlapReport& report);
nlohmann::json to_json(const ExternalPlagiarism& p);
ExternalPlagiarism external_plagiarism_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Writes through a temporary file and rename, so readers never see partial output.
void write_text_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace grove
