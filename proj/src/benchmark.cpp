#include "grove/benchmark.hpp"

#include <filesystem>
#include <optional>

#include "grove/error.hpp"
#include "grove/manifest.hpp"
#include "grove/parallel.hpp"
#include "grove/serialization.hpp"
#include "grove/text.hpp"

namespace grove {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
    if (!j.contains(key)) return {};
    return j.at(key).get<std::vector<std::string>>();
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

Moments moments(const std::vector<double>& values) {
    Moments m;
    if (values.empty()) return m;
    for (double v : values) m.mean += v;
    m.mean /= static_cast<double>(values.size());
    for (double v : values) m.variance += (v - m.mean) * (v - m.mean);
    m.variance /= static_cast<double>(values.size());
    return m;
}

json scores_to_json(const CaseScores& s) {
    json metrics = json::object();
    for (const auto& [m, v] : s.metrics) metrics[std::string(metric_name(m))] = v;
    return {{"metrics", std::move(metrics)}, {"plot_count", s.plot_count}};
}

CaseScores scores_from_json(const json& j) {
    CaseScores s;
    for (Metric m : kAllMetrics) {
        s.metrics[m] = j.at("metrics").at(std::string(metric_name(m))).get<double>();
    }
    s.plot_count = j.at("plot_count").get<double>();
    return s;
}

json case_to_json(const BenchmarkCase& c) {
    return {{"index", c.index},   {"plot", c.plot},     {"mood", c.mood},
            {"genre", c.genre},   {"subject", c.subject}, {"strategy", std::string(strategy_name(c.strategy))}};
}

CaseScores evaluate_story(const Story& story, const ConditionSet& conditions, const Session& session,
                          std::size_t plot_trials) {
    CaseScores s;
    const LikertReport report = likert_eval(story, conditions, session, session.config().eval_trials);
    for (const auto& [m, v] : report.metrics) s.metrics[m] = v.mean;
    s.plot_count = count_plots(story, session, plot_trials);
    return s;
}

struct Outcome {
    std::optional<CaseScores> scores;
    std::string error;
};

Outcome run_case(const BenchmarkCase& c, const Repository& repo, const Embedder& embedder, const Session& session,
                 std::size_t plot_trials, json& output) {
    Outcome out;
    try {
        if (c.strategy == Strategy::kGrove) {
            GenerationResult r = run_grove(c.conditions, repo, session, embedder);
            output = to_json(r);
            out.scores = evaluate_story(r.final_story, c.conditions, session, plot_trials);
        } else {
            BaselineResult r = generate_baseline(c.strategy, c.conditions, repo, session, embedder);
            output = to_json(r);
            if (c.strategy == Strategy::kPromptE && !r.variants.empty()) {
                CaseScores avg;
                for (const auto& v : r.variants) {
                    CaseScores s = evaluate_story(v, c.conditions, session, plot_trials);
                    for (const auto& [m, x] : s.metrics) avg.metrics[m] += x;
                    avg.plot_count += s.plot_count;
                }
                const double n = static_cast<double>(r.variants.size());
                for (auto& [m, x] : avg.metrics) x /= n;
                avg.plot_count /= n;
                out.scores = avg;
            } else {
                out.scores = evaluate_story(r.final_story, c.conditions, session, plot_trials);
            }
        }
    } catch (const std::exception& e) {
        out.scores.reset();
        out.error = e.what();
    }
    return out;
}

std::optional<CaseScores> completed_scores(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
        const json j = read_json_file(path);
        const json& result = j.at("result");
        if (result.value("status", std::string()) != "ok") return std::nullopt;
        return scores_from_json(result.at("scores"));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace

BenchmarkPlan BenchmarkPlan::from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::kParse, "benchmark plan must be a JSON object");
    BenchmarkPlan plan;
    try {
        plan.plots = string_list(j, "plots");
        plan.moods = string_list(j, "moods");
        plan.genres = string_list(j, "genres");
        if (j.contains("subjects")) {
            for (const auto& s : j.at("subjects")) {
                if (s.is_string()) {
                    plan.subjects.push_back({s.get<std::string>()});
                } else {
                    plan.subjects.push_back(s.get<std::vector<std::string>>());
                }
            }
        }
        if (j.contains("strategies")) {
            for (const auto& s : j.at("strategies")) {
                auto strategy = strategy_from_name(s.get<std::string>());
                if (!strategy) throw Error(ErrorKind::kParse, "unknown strategy '" + s.get<std::string>() + "'");
                plan.strategies.push_back(*strategy);
            }
        } else {
            plan.strategies = {Strategy::kGrove, Strategy::kIcl, Strategy::kCot, Strategy::kPromptE,
                               Strategy::kStoryS};
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, std::string("benchmark plan: ") + e.what());
    }
    return plan;
}

json BenchmarkPlan::to_json() const {
    json strategy_names = json::array();
    for (Strategy s : strategies) strategy_names.push_back(std::string(strategy_name(s)));
    return {{"plots", plots},
            {"moods", moods},
            {"genres", genres},
            {"subjects", subjects},
            {"strategies", std::move(strategy_names)}};
}

void BenchmarkPlan::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::kPrecondition, std::string("benchmark plan has no ") + what);
    };
    require(!plots.empty(), "plots");
    require(!moods.empty(), "moods");
    require(!genres.empty(), "genres");
    require(!subjects.empty(), "subjects");
    require(!strategies.empty(), "strategies");
    for (const auto& s : subjects) require(!s.empty(), "entries in a subjects item");
}

std::size_t BenchmarkPlan::cases_per_strategy() const {
    return plots.size() * moods.size() * genres.size() * subjects.size();
}

std::vector<BenchmarkCase> enumerate_cases(const BenchmarkPlan& plan) {
    plan.validate();
    std::vector<BenchmarkCase> cases;
    cases.reserve(plan.total_runs());
    for (std::size_t p = 0; p < plan.plots.size(); ++p)
        for (std::size_t m = 0; m < plan.moods.size(); ++m)
            for (std::size_t g = 0; g < plan.genres.size(); ++g)
                for (std::size_t s = 0; s < plan.subjects.size(); ++s) {
                    ConditionSet conditions =
                        ConditionSet::make(plan.plots[p], plan.moods[m], plan.genres[g], plan.subjects[s]);
                    for (Strategy strategy : plan.strategies) {
                        cases.push_back({cases.size(), p, m, g, s, strategy, conditions});
                    }
                }
    return cases;
}

std::string case_manifest_name(const BenchmarkCase& c, const PipelineConfig& config) {
    const json key = {{"conditions", to_json(c.conditions)},
                      {"strategy", std::string(strategy_name(c.strategy))},
                      {"config", to_json(config)}};
    return "case-" + text::hex64(text::fnv1a64(key.dump())) + ".json";
}

BenchmarkRun run_benchmark(const BenchmarkPlan& plan, const Repository& repo, ChatProvider& provider,
                           const Embedder& embedder, const TemplateLibrary& templates, const PipelineConfig& config,
                           const BenchmarkOptions& options) {
    config.validate();
    const std::vector<BenchmarkCase> cases = enumerate_cases(plan);
    if (options.plot_count_trials == 0) throw Error(ErrorKind::kPrecondition, "plot_count_trials must be >= 1");
    if (!options.manifest_dir.empty()) std::filesystem::create_directories(options.manifest_dir);

    std::vector<std::optional<CaseScores>> scores(cases.size());
    std::vector<std::string> errors(cases.size());
    std::vector<std::size_t> pending;
    BenchmarkRun run;
    for (const auto& c : cases) {
        if (!options.manifest_dir.empty()) {
            scores[c.index] = completed_scores(options.manifest_dir / case_manifest_name(c, config));
        }
        if (scores[c.index]) {
            ++run.resumed;
        } else {
            pending.push_back(c.index);
        }
    }
    if (options.max_new_cases && pending.size() > *options.max_new_cases) {
        pending.resize(*options.max_new_cases);
    }

    std::vector<bool> attempted(cases.size(), false);
    parallel_for(pending.size(), options.workers, [&](std::size_t slot) {
        const BenchmarkCase& c = cases[pending[slot]];
        Transcript transcript;
        Session session(provider, templates, config, transcript);
        RunManifest manifest;
        manifest.config = to_json(config);
        manifest.provider_id = provider.id();
        manifest.embedder = embedder.fingerprint();
        manifest.template_hashes = templates.hashes();
        manifest.started_at = utc_timestamp();
        json output = nullptr;
        Outcome outcome = run_case(c, repo, embedder, session, options.plot_count_trials, output);
        manifest.finished_at = utc_timestamp();
        manifest.calls = transcript.records();
        manifest.result = {{"case", case_to_json(c)}, {"output", output}};
        if (outcome.scores) {
            manifest.result["status"] = "ok";
            manifest.result["scores"] = scores_to_json(*outcome.scores);
            if (output.is_object() && output.contains("flags")) manifest.flags = output["flags"].get<std::vector<std::string>>();
        } else {
            manifest.result["status"] = "failed";
            manifest.result["error"] = outcome.error;
        }
        if (!options.manifest_dir.empty()) {
            write_text_file_atomic(options.manifest_dir / case_manifest_name(c, config), manifest.to_json().dump(2));
        }
        scores[c.index] = outcome.scores;
        errors[c.index] = outcome.error;
        attempted[c.index] = true;
    });
    run.executed = pending.size();

    json strategies = json::object();
    json case_rows = json::array();
    bool complete = true;
    for (Strategy strategy : plan.strategies) {
        std::map<Metric, std::vector<double>> per_metric;
        std::vector<double> plot_counts;
        std::size_t total = 0, failed = 0, missing = 0;
        for (const auto& c : cases) {
            if (c.strategy != strategy) continue;
            ++total;
            if (scores[c.index]) {
                for (const auto& [m, v] : scores[c.index]->metrics) per_metric[m].push_back(v);
                plot_counts.push_back(scores[c.index]->plot_count);
            } else if (attempted[c.index]) {
                ++failed;
            } else {
                ++missing;
            }
        }
        if (missing) complete = false;
        json metrics = json::object();
        for (Metric m : kAllMetrics) {
            const Moments mm = moments(per_metric[m]);
            metrics[std::string(metric_name(m))] = {{"mean", mm.mean}, {"variance", mm.variance}};
        }
        const Moments pc = moments(plot_counts);
        strategies[std::string(strategy_name(strategy))] = {
            {"cases", total},
            {"completed", plot_counts.size()},
            {"failed", failed},
            {"pending", missing},
            {"failure_rate", total ? static_cast<double>(failed) / static_cast<double>(total) : 0.0},
            {"metrics", std::move(metrics)},
            {"plot_count", {{"mean", pc.mean}, {"variance", pc.variance}}},
        };
    }
    for (const auto& c : cases) {
        json row = case_to_json(c);
        if (scores[c.index]) {
            row["status"] = "ok";
            row["scores"] = scores_to_json(*scores[c.index]);
        } else if (attempted[c.index]) {
            row["status"] = "failed";
            row["error"] = errors[c.index];
        } else {
            row["status"] = "pending";
        }
        case_rows.push_back(std::move(row));
    }
    run.complete = complete;
    run.report = {{"plan", plan.to_json()},
                  {"cases_per_strategy", plan.cases_per_strategy()},
                  {"total_runs", plan.total_runs()},
                  {"complete", complete},
                  {"strategies", std::move(strategies)},
                  {"cases", std::move(case_rows)}};
    return run;
}

}  // namespace grove
