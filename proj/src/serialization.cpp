#include "grove/serialization.hpp"

#include <fstream>
#include <sstream>

#include "grove/error.hpp"

namespace grove {

using nlohmann::json;

json to_json(const ConditionSet& c) {
    json j = json::object();
    if (c.plot()) j["plot"] = *c.plot();
    if (c.mood()) j["mood"] = *c.mood();
    if (c.genre()) j["genre"] = *c.genre();
    j["subjects"] = c.subjects();
    return j;
}

ConditionSet conditions_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::kParse, "conditions must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!slot_from_name(key)) throw Error(ErrorKind::kParse, "unknown condition slot '" + key + "'");
    }
    ConditionSet c;
    try {
        auto text_slot = [&](const char* name) -> std::optional<std::string> {
            if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
            return j.at(name).get<std::string>();
        };
        if (auto v = text_slot("plot")) c.set_plot(*v);
        if (auto v = text_slot("mood")) c.set_mood(*v);
        if (auto v = text_slot("genre")) c.set_genre(*v);
        if (j.contains("subjects") && !j.at("subjects").is_null()) {
            const auto& s = j.at("subjects");
            c.set_subjects(s.is_string() ? std::vector<std::string>{s.get<std::string>()}
                                         : s.get<std::vector<std::string>>());
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, std::string("conditions: ") + e.what());
    }
    return c;
}

json to_json(const Story& s) {
    json j = {{"id", s.id}, {"text", s.text}, {"provenance", std::string(provenance_name(s.provenance))}};
    if (!s.strategy.empty()) j["strategy"] = s.strategy;
    return j;
}

Story story_from_json(const json& j) {
    Story s;
    s.id = j.at("id").get<std::string>();
    s.text = j.at("text").get<std::string>();
    auto p = provenance_from_name(j.value("provenance", std::string("human-corpus")));
    if (!p) throw Error(ErrorKind::kParse, "unknown story provenance");
    s.provenance = *p;
    s.strategy = j.value("strategy", std::string());
    return s;
}

json to_json(const SamplingParams& s) {
    return {{"top_p", s.top_p}, {"temperature", s.temperature}, {"seed", s.seed ? json(*s.seed) : json(nullptr)}};
}

SamplingParams sampling_from_json(const json& j) {
    SamplingParams s;
    s.top_p = j.value("top_p", s.top_p);
    s.temperature = j.value("temperature", s.temperature);
    if (j.contains("seed") && !j.at("seed").is_null()) s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

json to_json(const PipelineConfig& c) {
    return {
        {"k", c.k},
        {"n", c.ambiguities},
        {"b", c.branching},
        {"i", c.depth},
        {"sampling", to_json(c.sampling)},
        {"retry", {{"max_refusal_retries", c.retry.max_refusal_retries},
                   {"max_malformed_retries", c.retry.max_malformed_retries}}},
        {"refusal_patterns", c.refusal_patterns},
        {"conditioned_ambiguities", c.conditioned_ambiguities},
        {"story_samples", c.story_samples},
        {"eval_trials", c.eval_trials},
    };
}

PipelineConfig pipeline_config_from_json(const json& j, PipelineConfig c) {
    try {
        c.k = j.value("k", c.k);
        c.ambiguities = j.value("n", c.ambiguities);
        c.branching = j.value("b", c.branching);
        c.depth = j.value("i", c.depth);
        if (j.contains("sampling")) {
            const auto& s = j.at("sampling");
            c.sampling.top_p = s.value("top_p", c.sampling.top_p);
            c.sampling.temperature = s.value("temperature", c.sampling.temperature);
            if (s.contains("seed")) {
                c.sampling.seed = s.at("seed").is_null() ? std::nullopt
                                                         : std::optional(s.at("seed").get<std::uint64_t>());
            }
        }
        c.sampling.top_p = j.value("top_p", c.sampling.top_p);
        c.sampling.temperature = j.value("temperature", c.sampling.temperature);
        if (j.contains("seed")) {
            c.sampling.seed =
                j.at("seed").is_null() ? std::nullopt : std::optional(j.at("seed").get<std::uint64_t>());
        }
        const json& retry = j.contains("retry") ? j.at("retry") : j;
        c.retry.max_refusal_retries = retry.value("max_refusal_retries", c.retry.max_refusal_retries);
        c.retry.max_malformed_retries = retry.value("max_malformed_retries", c.retry.max_malformed_retries);
        if (j.contains("refusal_patterns")) {
            c.refusal_patterns = j.at("refusal_patterns").get<std::vector<std::string>>();
        }
        c.conditioned_ambiguities = j.value("conditioned_ambiguities", c.conditioned_ambiguities);
        c.story_samples = j.value("story_samples", c.story_samples);
        c.eval_trials = j.value("eval_trials", c.eval_trials);
        c.workers = j.value("workers", c.workers);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, std::string("pipeline config: ") + e.what());
    }
    return c;
}

json to_json(const EvidenceTree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
        nodes.push_back({{"id", n.id}, {"parent", n.parent}, {"depth", n.depth}, {"text", n.text}});
    }
    return {{"root", {{"index", t.root().index}, {"text", t.root().text}}},
            {"branching", t.branching()},
            {"depth", t.depth()},
            {"nodes", std::move(nodes)}};
}

EvidenceTree evidence_tree_from_json(const json& j) {
    Ambiguity root{j.at("root").at("text").get<std::string>(), j.at("root").at("index").get<std::size_t>()};
    std::vector<EvidenceNode> nodes;
    for (const auto& n : j.at("nodes")) {
        nodes.push_back({n.at("id").get<std::size_t>(), n.at("parent").get<long>(), n.at("depth").get<std::size_t>(),
                         n.at("text").get<std::string>()});
    }
    return EvidenceTree(std::move(root), j.at("branching").get<std::size_t>(), j.at("depth").get<std::size_t>(),
                        std::move(nodes));
}

json to_json(const EvidenceChain& c) {
    return {{"tree", c.tree_index}, {"nodes", c.node_ids}, {"texts", c.texts}};
}

EvidenceChain evidence_chain_from_json(const json& j) {
    return {j.at("tree").get<std::size_t>(), j.at("nodes").get<std::vector<std::size_t>>(),
            j.at("texts").get<std::vector<std::string>>()};
}

json to_json(const GenerationResult& r) {
    json ambiguities = json::array();
    for (const auto& a : r.ambiguities) ambiguities.push_back({{"index", a.index}, {"text", a.text}});
    json trees = json::array();
    for (const auto& t : r.forest.trees) trees.push_back(to_json(t));
    json selected = json::array();
    for (const auto& c : r.selected) selected.push_back(to_json(c));
    return {{"strategy", "grove"},
            {"retrieved", r.retrieved_ids},
            {"initial", to_json(r.initial)},
            {"ambiguities", std::move(ambiguities)},
            {"forest", {{"trees", std::move(trees)}}},
            {"selected", std::move(selected)},
            {"final", to_json(r.final_story)}};
}

GenerationResult generation_result_from_json(const json& j) {
    try {
        GenerationResult r;
        r.retrieved_ids = j.at("retrieved").get<std::vector<std::string>>();
        r.initial = story_from_json(j.at("initial"));
        for (const auto& a : j.at("ambiguities")) {
            r.ambiguities.push_back({a.at("text").get<std::string>(), a.at("index").get<std::size_t>()});
        }
        for (const auto& t : j.at("forest").at("trees")) r.forest.trees.push_back(evidence_tree_from_json(t));
        for (const auto& c : j.at("selected")) r.selected.push_back(evidence_chain_from_json(c));
        r.final_story = story_from_json(j.at("final"));
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, std::string("generation result: ") + e.what());
    }
}

json to_json(const BaselineResult& r) {
    json j = {{"strategy", std::string(strategy_name(r.strategy))},
              {"retrieved", r.retrieved_ids},
              {"final", to_json(r.final_story)},
              {"flags", r.flags}};
    if (!r.variants.empty()) {
        json v = json::array();
        for (const auto& s : r.variants) v.push_back(to_json(s));
        j["variants"] = std::move(v);
    }
    if (!r.samples.empty()) {
        json v = json::array();
        for (const auto& s : r.samples) v.push_back(to_json(s));
        j["samples"] = std::move(v);
        j["sample_scores"] = r.sample_scores;
        j["selected_sample"] = r.selected_sample;
    }
    return j;
}

BaselineResult baseline_result_from_json(const json& j) {
    try {
        BaselineResult r;
        auto s = strategy_from_name(j.at("strategy").get<std::string>());
        if (!s) throw Error(ErrorKind::kParse, "unknown strategy");
        r.strategy = *s;
        r.retrieved_ids = j.at("retrieved").get<std::vector<std::string>>();
        r.final_story = story_from_json(j.at("final"));
        r.flags = j.value("flags", std::vector<std::string>{});
        if (j.contains("variants")) {
            for (const auto& v : j.at("variants")) r.variants.push_back(story_from_json(v));
        }
        if (j.contains("samples")) {
            for (const auto& v : j.at("samples")) r.samples.push_back(story_from_json(v));
            r.sample_scores = j.at("sample_scores").get<std::vector<double>>();
            r.selected_sample = j.at("selected_sample").get<std::size_t>();
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, std::string("baseline result: ") + e.what());
    }
}

json to_json(const CallRecord& r) {
    return {{"stage", r.stage},   {"label", r.label},   {"prompt", r.prompt},
            {"response", r.response}, {"parsed", r.parsed}, {"sampling", to_json(r.sampling)}};
}

CallRecord call_record_from_json(const json& j) {
    CallRecord r;
    r.stage = j.at("stage").get<std::string>();
    r.label = j.value("label", std::string());
    r.prompt = j.at("prompt").get<std::string>();
    r.response = j.at("response").get<std::string>();
    r.parsed = j.value("parsed", json(nullptr));
    if (j.contains("sampling")) r.sampling = sampling_from_json(j.at("sampling"));
    return r;
}

json to_json(const LikertReport& report) {
    json j = json::object();
    for (const auto& [metric, s] : report.metrics) {
        j[std::string(metric_name(metric))] = {{"mean", s.mean}, {"variance", s.variance}, {"raw", s.raw}};
    }
    return j;
}

LikertReport likert_report_from_json(const json& j) {
    LikertReport report;
    for (Metric m : kAllMetrics) {
        const std::string name(metric_name(m));
        if (!j.contains(name)) continue;
        report.metrics.emplace(m, MetricScores::from_raw(j.at(name).at("raw").get<std::vector<int>>()));
        report.trials = report.metrics.at(m).raw.size();
    }
    return report;
}

json to_json(const OverlapReport& report) {
    json j = json::object();
    for (std::size_t n = 1; n <= 4; ++n) j[std::to_string(n)] = report.ratio(n);
    if (!report.too_short.empty()) j["too_short"] = report.too_short;
    return j;
}

json to_json(const ExternalPlagiarism& p) {
    return {{"identical", p.identical},
            {"minor_changes", p.minor_changes},
            {"paraphrased", p.paraphrased},
            {"omitted_words", p.omitted_words}};
}

ExternalPlagiarism external_plagiarism_from_json(const json& j) {
    ExternalPlagiarism p;
    p.identical = j.value("identical", 0.0);
    p.minor_changes = j.value("minor_changes", 0.0);
    p.paraphrased = j.value("paraphrased", 0.0);
    p.omitted_words = j.value("omitted_words", 0.0);
    return p;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

json read_json_file(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    try {
        return json::parse(content);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
    }
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
        out << content;
        if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace grove
