#include "grove/app.hpp"

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "grove/benchmark.hpp"
#include "grove/error.hpp"
#include "grove/lexical_embedder.hpp"
#include "grove/manifest.hpp"
#include "grove/remote_provider.hpp"
#include "grove/scripted_provider.hpp"
#include "grove/serialization.hpp"
#include "grove/text.hpp"

namespace grove::app {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Provider and runtime settings, layered file < env < flags.
struct Settings {
    std::string provider = "scripted";
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    std::string api_key;
    double timeout = 60.0;
    std::string rules;
    std::string templates;
    std::size_t workers = 1;
    std::size_t dimension = 256;
    std::uint64_t provider_seed = 0;
};

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> provider, endpoint, model, api_key, rules, templates;
    std::optional<double> timeout;
    std::optional<std::size_t> workers, dimension;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> k, n, b, i;
};

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

template <class T>
T parse_env_number(const char* name, const std::string& text) {
    std::istringstream in(text);
    T value{};
    if (!(in >> value) || !in.eof()) throw UsageError(std::string("invalid value for ") + name + ": " + text);
    return value;
}

struct Context {
    Settings settings;
    PipelineConfig config;
    TemplateLibrary templates;
    std::unique_ptr<ChatProvider> provider;
    LexicalEmbedder embedder;

    explicit Context(std::size_t dim) : embedder(dim) {}
};

std::unique_ptr<Context> make_context(const Flags& flags, bool need_provider) {
    Settings s;
    PipelineConfig config;
    if (flags.config) {
        const json j = read_json_file(*flags.config);
        config = pipeline_config_from_json(j);
        s.provider = j.value("provider", s.provider);
        s.endpoint = j.value("endpoint", s.endpoint);
        s.model = j.value("model", s.model);
        s.timeout = j.value("timeout", s.timeout);
        s.rules = j.value("rules", s.rules);
        s.templates = j.value("templates", s.templates);
        s.workers = j.value("workers", config.workers);
        s.dimension = j.value("dimension", s.dimension);
        s.provider_seed = j.value("provider_seed", s.provider_seed);
    }
    if (auto v = env("GROVE_PROVIDER")) s.provider = *v;
    if (auto v = env("GROVE_ENDPOINT")) s.endpoint = *v;
    if (auto v = env("GROVE_MODEL")) s.model = *v;
    if (auto v = env("GROVE_API_KEY")) s.api_key = *v;
    if (auto v = env("GROVE_TIMEOUT")) s.timeout = parse_env_number<double>("GROVE_TIMEOUT", *v);
    if (auto v = env("GROVE_RULES")) s.rules = *v;
    if (auto v = env("GROVE_TEMPLATES")) s.templates = *v;
    if (auto v = env("GROVE_WORKERS")) s.workers = parse_env_number<std::size_t>("GROVE_WORKERS", *v);

    if (flags.provider) s.provider = *flags.provider;
    if (flags.endpoint) s.endpoint = *flags.endpoint;
    if (flags.model) s.model = *flags.model;
    if (flags.api_key) s.api_key = *flags.api_key;
    if (flags.timeout) s.timeout = *flags.timeout;
    if (flags.rules) s.rules = *flags.rules;
    if (flags.templates) s.templates = *flags.templates;
    if (flags.workers) s.workers = *flags.workers;
    if (flags.dimension) s.dimension = *flags.dimension;
    if (flags.seed) config.sampling.seed = *flags.seed;
    if (flags.k) config.k = *flags.k;
    if (flags.n) config.ambiguities = *flags.n;
    if (flags.b) config.branching = *flags.b;
    if (flags.i) config.depth = *flags.i;
    config.workers = s.workers;
    config.validate();

    auto ctx = std::make_unique<Context>(s.dimension);
    ctx->settings = s;
    ctx->config = config;
    ctx->templates = s.templates.empty() ? TemplateLibrary::builtin() : TemplateLibrary::load(s.templates);

    if (need_provider) {
        if (s.provider == "scripted") {
            if (s.rules.empty()) throw UsageError("the scripted provider needs --rules or GROVE_RULES");
            ctx->provider = ScriptedProvider::from_rules_file(s.rules, s.provider_seed);
        } else if (s.provider == "remote") {
            if (s.endpoint.empty()) throw UsageError("the remote provider needs --endpoint or GROVE_ENDPOINT");
            RemoteProviderConfig rc;
            rc.endpoint = s.endpoint;
            rc.model = s.model;
            rc.api_key = s.api_key;
            rc.timeout_seconds = s.timeout;
            ctx->provider = std::make_unique<RemoteProvider>(rc);
        } else {
            throw UsageError("unknown provider '" + s.provider + "' (expected scripted or remote)");
        }
    }
    return ctx;
}

ConditionSet load_conditions(const std::string& arg) {
    const std::string trimmed = text::trim(arg);
    if (!trimmed.empty() && trimmed.front() == '{') {
        try {
            return conditions_from_json(json::parse(trimmed));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::kParse, std::string("--conditions: ") + e.what());
        }
    }
    return conditions_from_json(read_json_file(trimmed));
}

// Plain text, or a JSON story object / generation output.
std::string load_story_text(const std::string& path) {
    const std::string content = read_text_file(path);
    const std::string trimmed = text::trim(content);
    if (!trimmed.empty() && trimmed.front() == '{') {
        try {
            const json j = json::parse(trimmed);
            if (j.contains("final")) return j.at("final").at("text").get<std::string>();
            if (j.contains("result") && j.at("result").contains("final")) {
                return j.at("result").at("final").at("text").get<std::string>();
            }
            if (j.contains("text")) return j.at("text").get<std::string>();
        } catch (const json::exception&) {
        }
    }
    return content;
}

RunManifest start_manifest(const Context& ctx) {
    RunManifest m;
    m.config = to_json(ctx.config);
    if (ctx.provider) m.provider_id = ctx.provider->id();
    m.embedder = ctx.embedder.fingerprint();
    m.template_hashes = ctx.templates.hashes();
    m.started_at = utc_timestamp();
    return m;
}

void emit(std::ostream& out, const json& j, const std::string& path) {
    if (path.empty()) {
        out << j.dump(2) << "\n";
    } else {
        write_text_file_atomic(path, j.dump(2) + "\n");
    }
}

Repository load_repo_or_empty(const std::string& path, const Context& ctx, std::ostream& err) {
    if (path.empty()) return Repository(ctx.embedder.fingerprint());
    std::vector<std::string> warnings;
    Repository repo = load_repository(path, ctx.embedder, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    return repo;
}

void add_common(CLI::App& cmd, Flags& f, bool pipeline_shape) {
    cmd.add_option("--config", f.config, "JSON config file");
    cmd.add_option("--provider", f.provider, "scripted | remote");
    cmd.add_option("--rules", f.rules, "rules file for the scripted provider");
    cmd.add_option("--endpoint", f.endpoint, "chat-completions URL for the remote provider");
    cmd.add_option("--model", f.model, "model name sent to the remote provider");
    cmd.add_option("--api-key", f.api_key, "API key for the remote provider");
    cmd.add_option("--timeout", f.timeout, "request timeout in seconds");
    cmd.add_option("--templates", f.templates, "directory of template overrides");
    cmd.add_option("--workers", f.workers, "concurrent provider calls")->check(CLI::PositiveNumber);
    cmd.add_option("--dim", f.dimension, "lexical embedder dimension")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", f.seed, "sampling seed");
    if (pipeline_shape) {
        cmd.add_option("--k", f.k, "retrieved exemplars");
        cmd.add_option("--n", f.n, "ambiguities per story");
        cmd.add_option("--b", f.b, "branching factor");
        cmd.add_option("--i", f.i, "evidence tree depth");
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"GROVE story generation and evaluation"};
    app.name("grove");
    app.require_subcommand(1);

    Flags flags;

    std::string corpus, out_path, manifest_out;
    auto* build_cmd = app.add_subcommand("build-repo", "extract conditions from a corpus into a repository");
    build_cmd->add_option("--corpus", corpus, "JSONL file or directory of text files")->required();
    build_cmd->add_option("--out", out_path, "repository output path")->required();
    build_cmd->add_option("--manifest-out", manifest_out, "write the extraction transcript here");
    add_common(*build_cmd, flags, false);

    std::string conditions_arg, repo_path, strategy_arg = "grove";
    auto* gen_cmd = app.add_subcommand("generate", "generate a story for target conditions");
    gen_cmd->add_option("--conditions", conditions_arg, "conditions JSON file or inline object")->required();
    gen_cmd->add_option("--repo", repo_path, "repository file");
    gen_cmd->add_option("--strategy", strategy_arg, "grove | icl | cot | prompt-e | story-s");
    gen_cmd->add_option("--manifest-out", manifest_out, "write the run manifest here");
    gen_cmd->add_option("--out", out_path, "write the result here instead of standard output");
    add_common(*gen_cmd, flags, true);

    std::string story_path, reference_path, plagiarism_path;
    std::optional<std::size_t> trials;
    std::size_t plot_trials = 1;
    auto* eval_cmd = app.add_subcommand("evaluate", "score a story");
    eval_cmd->add_option("--story", story_path, "story text file")->required();
    eval_cmd->add_option("--conditions", conditions_arg, "conditions JSON file or inline object")->required();
    eval_cmd->add_option("--reference", reference_path, "reference story for n-gram overlap");
    eval_cmd->add_option("--trials", trials, "Likert trials per metric")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--plot-trials", plot_trials, "plot-count trials")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--external-plagiarism", plagiarism_path, "JSON from an external plagiarism checker");
    eval_cmd->add_option("--out", out_path, "report path");
    eval_cmd->add_option("--manifest-out", manifest_out, "write the evaluation transcript here");
    add_common(*eval_cmd, flags, false);

    std::string plan_path, manifest_dir;
    bool dry_run = false;
    std::optional<std::size_t> max_new_cases;
    auto* bench_cmd = app.add_subcommand("bench", "run every strategy over a plan of conditions");
    bench_cmd->add_option("--plan", plan_path, "plan JSON")->required();
    bench_cmd->add_option("--repo", repo_path, "repository file");
    bench_cmd->add_option("--manifest-dir", manifest_dir, "per-case manifests; enables resume");
    bench_cmd->add_option("--out", out_path, "report path");
    bench_cmd->add_option("--plot-trials", plot_trials, "plot-count trials")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--max-new-cases", max_new_cases, "stop after this many executed cases");
    bench_cmd->add_flag("--dry-run", dry_run, "print the case count and exit");
    add_common(*bench_cmd, flags, true);

    std::string manifest_path, stage_arg, label_arg;
    bool as_json = false;
    auto* inspect_cmd = app.add_subcommand("inspect-run", "print calls recorded in a run manifest");
    inspect_cmd->add_option("--manifest", manifest_path, "manifest file")->required();
    inspect_cmd->add_option("--stage", stage_arg, "only calls from this stage");
    inspect_cmd->add_option("--label", label_arg, "only calls with this label");
    inspect_cmd->add_flag("--json", as_json, "print records as JSON");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const CLI::App* failing = &app;
        for (auto* sub : app.get_subcommands()) failing = sub;
        err << failing->help();
        return 1;
    }

    try {
        if (build_cmd->parsed()) {
            auto ctx = make_context(flags, true);
            const auto entries = load_corpus(corpus);
            Transcript transcript;
            Session session(*ctx->provider, ctx->templates, ctx->config, transcript);
            RunManifest manifest = start_manifest(*ctx);
            BuildResult built = build_repository(entries, session, ctx->embedder);
            save_repository(built.repository, out_path);
            json skipped = json::array();
            for (const auto& s : built.skipped) {
                skipped.push_back({{"id", s.id}, {"reason", s.reason}});
                err << "warning: skipped " << s.id << ": " << s.reason << "\n";
            }
            if (!manifest_out.empty()) {
                manifest.calls = transcript.records();
                manifest.result = {{"items", built.repository.size()}, {"skipped", skipped}};
                manifest.finished_at = utc_timestamp();
                write_text_file_atomic(manifest_out, manifest.to_json().dump(2) + "\n");
            }
            out << json{{"items", built.repository.size()}, {"skipped", skipped}}.dump(2) << "\n";
            return 0;
        }

        if (gen_cmd->parsed()) {
            const auto strategy = strategy_from_name(strategy_arg);
            if (!strategy) throw UsageError("unknown strategy '" + strategy_arg + "'");
            auto ctx = make_context(flags, true);
            const ConditionSet conditions = load_conditions(conditions_arg);
            const Repository repo = load_repo_or_empty(repo_path, *ctx, err);
            Transcript transcript;
            Session session(*ctx->provider, ctx->templates, ctx->config, transcript);
            RunManifest manifest = start_manifest(*ctx);
            json result;
            if (*strategy == Strategy::kGrove) {
                result = to_json(run_grove(conditions, repo, session, ctx->embedder));
            } else {
                BaselineResult r = generate_baseline(*strategy, conditions, repo, session, ctx->embedder);
                manifest.flags = r.flags;
                result = to_json(r);
            }
            manifest.calls = transcript.records();
            manifest.result = result;
            manifest.finished_at = utc_timestamp();
            if (!manifest_out.empty()) write_text_file_atomic(manifest_out, manifest.to_json().dump(2) + "\n");
            emit(out, result, out_path);
            return 0;
        }

        if (eval_cmd->parsed()) {
            auto ctx = make_context(flags, true);
            const ConditionSet conditions = load_conditions(conditions_arg);
            const Story story = make_generated_story(load_story_text(story_path), Provenance::kGeneratedFinal);
            Transcript transcript;
            Session session(*ctx->provider, ctx->templates, ctx->config, transcript);
            RunManifest manifest = start_manifest(*ctx);
            json report;
            report["likert"] = to_json(likert_eval(story, conditions, session, trials.value_or(ctx->config.eval_trials)));
            report["plot_count"] = count_plots(story, session, plot_trials);
            if (!reference_path.empty()) {
                report["overlap"] = to_json(overlap_report(story.text, load_story_text(reference_path)));
            }
            if (!plagiarism_path.empty()) {
                report["external_plagiarism"] = to_json(external_plagiarism_from_json(read_json_file(plagiarism_path)));
            }
            if (!manifest_out.empty()) {
                manifest.calls = transcript.records();
                manifest.result = report;
                manifest.finished_at = utc_timestamp();
                write_text_file_atomic(manifest_out, manifest.to_json().dump(2) + "\n");
            }
            emit(out, report, out_path);
            return 0;
        }

        if (bench_cmd->parsed()) {
            const BenchmarkPlan plan = BenchmarkPlan::from_json(read_json_file(plan_path));
            plan.validate();
            if (dry_run) {
                out << json{{"cases", plan.cases_per_strategy()},
                            {"strategies", plan.strategies.size()},
                            {"total_runs", plan.total_runs()}}
                           .dump()
                    << "\n";
                return 0;
            }
            auto ctx = make_context(flags, true);
            const Repository repo = load_repo_or_empty(repo_path, *ctx, err);
            BenchmarkOptions options;
            options.manifest_dir = manifest_dir;
            options.workers = ctx->settings.workers;
            options.plot_count_trials = plot_trials;
            options.max_new_cases = max_new_cases;
            PipelineConfig case_config = ctx->config;
            case_config.workers = 1;
            BenchmarkRun run =
                run_benchmark(plan, repo, *ctx->provider, ctx->embedder, ctx->templates, case_config, options);
            err << "executed " << run.executed << ", resumed " << run.resumed
                << (run.complete ? "" : ", incomplete") << "\n";
            emit(out, run.report, out_path);
            return 0;
        }

        if (inspect_cmd->parsed()) {
            const RunManifest manifest = RunManifest::from_json(read_json_file(manifest_path));
            std::vector<const CallRecord*> records;
            for (const auto& c : manifest.calls) {
                if (!stage_arg.empty() && c.stage != stage_arg) continue;
                if (!label_arg.empty() && c.label != label_arg) continue;
                records.push_back(&c);
            }
            if (records.empty()) {
                throw Error(ErrorKind::kPrecondition,
                            "no calls recorded" + (stage_arg.empty() ? std::string() : " for stage '" + stage_arg + "'"));
            }
            if (as_json) {
                json arr = json::array();
                for (const auto* r : records) arr.push_back(to_json(*r));
                out << arr.dump(2) << "\n";
                return 0;
            }
            for (const auto* r : records) {
                out << "## " << r->stage << (r->label.empty() ? "" : " (" + r->label + ")") << "\n";
                out << "--- prompt ---\n" << r->prompt << "\n";
                out << "--- response ---\n" << r->response << "\n";
            }
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace grove::app
