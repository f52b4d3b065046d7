#include "grove/pipeline.hpp"

#include <algorithm>
#include <set>

#include "grove/error.hpp"
#include "grove/parallel.hpp"
#include "grove/text.hpp"

namespace grove {
namespace {

std::optional<std::string> parse_story(const std::string& response) {
    std::string s = text::trim(response);
    if (s.empty()) return std::nullopt;
    return s;
}

nlohmann::json summarize_text(const std::string& s) { return nlohmann::json(s); }

// Appends per-task transcripts to the session in task order, also when a task threw.
class OrderedLogs {
public:
    OrderedLogs(const Session& session, std::size_t count) : session_(session), logs_(count) {}
    OrderedLogs(const OrderedLogs&) = delete;
    OrderedLogs& operator=(const OrderedLogs&) = delete;
    ~OrderedLogs() {
        for (const auto& log : logs_) session_.transcript().append_all(log);
    }
    Session session_for(std::size_t i) { return session_.with_transcript(logs_[i]); }

private:
    const Session& session_;
    std::vector<Transcript> logs_;
};

// Child positions from the root, e.g. "0/1" for the second child of the first child.
std::string node_path(std::size_t id, std::size_t branching) {
    std::vector<std::string> steps;
    while (id > 0) {
        steps.push_back(std::to_string((id - 1) % branching));
        id = (id - 1) / branching;
    }
    if (steps.empty()) return "root";
    std::reverse(steps.begin(), steps.end());
    return text::join(steps, "/");
}

}  // namespace

std::string render_initial_prompt(const ConditionSet& conditions, const ExampleSet& examples,
                                  const TemplateLibrary& templates) {
    if (!conditions.complete()) {
        throw Error(ErrorKind::kPrecondition,
                    "story generation needs plot, mood, genre and subjects to be populated");
    }
    Bindings b{
        {"GENRE", conditions.slot_text(Slot::kGenre)},
        {"EMOTION", conditions.slot_text(Slot::kMood)},
        {"SUBJECTS", conditions.slot_text(Slot::kSubjects)},
        {"PLOTS", text::without_terminal_period(conditions.slot_text(Slot::kPlot))},
    };
    if (examples.items.empty()) return templates.get(template_id::kInitialStoryZeroShot).render(b);
    std::vector<std::string> stories;
    for (const auto& item : examples.items) stories.push_back(text::trim(item.story.text));
    b.emplace("RETRIEVED EXAMPLE", text::without_terminal_period(text::join(stories, "\n\n")));
    return templates.get(template_id::kInitialStory).render(b);
}

Story generate_initial(const ConditionSet& conditions, const ExampleSet& examples, const Session& session) {
    const std::string prompt = render_initial_prompt(conditions, examples, session.templates());
    auto text = session.ask<std::string>(stage::kInitial, "", prompt, parse_story, summarize_text);
    return make_generated_story(std::move(text), Provenance::kGeneratedInitial);
}

std::vector<Ambiguity> find_ambiguities(const Story& story, const Session& session,
                                        const ConditionSet* conditions) {
    const std::size_t n = session.config().ambiguities;
    if (n < 1) throw Error(ErrorKind::kPrecondition, "N must be >= 1");
    if (text::trim(story.text).empty()) throw Error(ErrorKind::kPrecondition, "story text is empty");

    Bindings b{{"STORY", story.text}, {"N", std::to_string(n)}};
    std::string_view tpl = template_id::kAmbiguity;
    if (session.config().conditioned_ambiguities) {
        if (!conditions || !conditions->complete()) {
            throw Error(ErrorKind::kPrecondition, "conditioned ambiguity prompt needs complete conditions");
        }
        tpl = template_id::kAmbiguityConditioned;
        b.emplace("GENRE", conditions->slot_text(Slot::kGenre));
        b.emplace("EMOTION", conditions->slot_text(Slot::kMood));
        b.emplace("SUBJECTS", conditions->slot_text(Slot::kSubjects));
        b.emplace("PLOTS", text::without_terminal_period(conditions->slot_text(Slot::kPlot)));
    }
    const std::string prompt = session.render(tpl, b);
    auto items = session.ask<std::vector<std::string>>(
        stage::kAmbiguities, "", prompt,
        [n](const std::string& r) -> std::optional<std::vector<std::string>> {
            auto list = text::parse_list(r);
            if (list.size() < n) return std::nullopt;
            list.resize(n);
            return list;
        },
        [](const std::vector<std::string>& v) { return nlohmann::json(v); });

    std::vector<Ambiguity> out;
    for (std::size_t i = 0; i < items.size(); ++i) out.push_back({items[i], i});
    return out;
}

EvidenceTree grow_tree(const Story& story, const Ambiguity& ambiguity, const Session& session) {
    const std::size_t b = session.config().branching;
    const std::size_t depth = session.config().depth;
    if (b < 1 || depth < 1) throw Error(ErrorKind::kPrecondition, "b and I must be >= 1");
    if (text::trim(ambiguity.text).empty()) throw Error(ErrorKind::kPrecondition, "ambiguity is empty");

    std::vector<EvidenceNode> nodes(expected_node_count(b, depth));
    nodes[0] = {0, -1, 0, ambiguity.text};
    const std::string tree_label = "tree " + std::to_string(ambiguity.index);

    std::size_t level_begin = 0;
    std::size_t level_size = 1;
    for (std::size_t d = 0; d < depth; ++d) {
        OrderedLogs logs(session, level_size);
        parallel_for(level_size, session.config().workers, [&](std::size_t offset) {
            const std::size_t id = level_begin + offset;
            const std::string path = node_path(id, b);
            std::vector<std::string> chain;
            for (long at = static_cast<long>(id); at >= 0; at = nodes[static_cast<std::size_t>(at)].parent) {
                chain.push_back(nodes[static_cast<std::size_t>(at)].text);
            }
            std::reverse(chain.begin(), chain.end());
            const std::string prompt = session.render(
                template_id::kAskingWhy, {{"STORY", story.text},
                                          {"EVIDENCE CHAIN", text::without_terminal_period(text::join(chain, " "))},
                                          {"B", std::to_string(b)}});
            auto children = with_context(tree_label + " node " + path, [&] {
                return logs.session_for(offset).ask<std::vector<std::string>>(
                    stage::kExpand, tree_label + " node " + path, prompt,
                    [b](const std::string& r) -> std::optional<std::vector<std::string>> {
                        auto list = text::parse_list(r);
                        if (list.size() < b) return std::nullopt;
                        list.resize(b);
                        return list;
                    },
                    [](const std::vector<std::string>& v) { return nlohmann::json(v); });
            });
            for (std::size_t c = 0; c < b; ++c) {
                const std::size_t child = b * id + 1 + c;
                nodes[child] = {child, static_cast<long>(id), d + 1, children[c]};
            }
        });
        level_begin += level_size;
        level_size *= b;
    }
    return EvidenceTree(ambiguity, b, depth, std::move(nodes));
}

EvidenceForest build_forest(const Story& story, const std::vector<Ambiguity>& ambiguities,
                            const Session& session) {
    if (ambiguities.size() != session.config().ambiguities) {
        throw Error(ErrorKind::kPrecondition, "expected " + std::to_string(session.config().ambiguities) +
                                                  " ambiguities, got " + std::to_string(ambiguities.size()));
    }
    EvidenceForest forest;
    forest.trees.resize(ambiguities.size());
    OrderedLogs logs(session, ambiguities.size());
    parallel_for(ambiguities.size(), session.config().workers, [&](std::size_t i) {
        forest.trees[i] = with_context("tree " + std::to_string(i),
                                       [&] { return grow_tree(story, ambiguities[i], logs.session_for(i)); });
    });
    return forest;
}

std::string render_chain_list(const std::vector<EvidenceChain>& chains) {
    std::string out;
    for (std::size_t i = 0; i < chains.size(); ++i) {
        if (i > 0) out += '\n';
        out += std::to_string(i + 1) + ". " + chains[i].joined();
    }
    return out;
}

EvidenceChain select_chain(const Story& story, const EvidenceTree& tree, std::size_t tree_index,
                           const Session& session) {
    tree.validate();
    auto chains = enumerate_chains(tree, tree_index);
    const auto count = static_cast<long long>(chains.size());
    const std::string prompt = session.render(
        template_id::kSelectChain, {{"STORY", story.text}, {"EVIDENCE TREE", render_chain_list(chains)}});
    const auto choice = session.ask<long long>(
        stage::kSelect, "tree " + std::to_string(tree_index), prompt,
        [count](const std::string& r) { return text::first_integer_in_range(r, 1, count); },
        [](const long long& n) { return nlohmann::json({{"chain", n}}); });
    return chains[static_cast<std::size_t>(choice - 1)];
}

Story rewrite(const Story& story, const std::vector<EvidenceChain>& chains, const Session& session) {
    const std::size_t n = session.config().ambiguities;
    if (chains.size() != n) {
        throw Error(ErrorKind::kPrecondition,
                    "rewrite needs " + std::to_string(n) + " chains, got " + std::to_string(chains.size()));
    }
    std::set<std::size_t> trees;
    for (const auto& c : chains) {
        if (!trees.insert(c.tree_index).second) {
            throw Error(ErrorKind::kPrecondition,
                        "two evidence chains come from tree " + std::to_string(c.tree_index) +
                            "; select only one chain per tree");
        }
        if (c.texts.empty()) throw Error(ErrorKind::kPrecondition, "empty evidence chain");
    }
    std::vector<std::string> lines;
    for (const auto& c : chains) lines.push_back("- " + c.joined());
    const std::string prompt = session.render(
        template_id::kRewrite, {{"STORY", story.text}, {"EVIDENCE CHAINS", text::join(lines, "\n")}});
    auto text = session.ask<std::string>(stage::kRewrite, "", prompt, parse_story, summarize_text);
    return make_generated_story(std::move(text), Provenance::kGeneratedFinal);
}

GenerationResult run_grove(const ConditionSet& conditions, const Repository& repo, const Session& session,
                           const Embedder& embedder) {
    const PipelineConfig& config = session.config();
    config.validate();
    if (config.k > 0 && repo.empty()) {
        throw Error(ErrorKind::kPrecondition, "repository is empty but k > 0");
    }
    GenerationResult result;
    ExampleSet examples;
    if (config.k > 0) {
        examples.items = with_context("retrieve", [&] { return retrieve(repo, conditions, config.k, embedder); });
    }
    for (const auto& item : examples.items) result.retrieved_ids.push_back(item.id);

    result.initial = with_context(stage::kInitial, [&] { return generate_initial(conditions, examples, session); });
    result.ambiguities = with_context(stage::kAmbiguities,
                                      [&] { return find_ambiguities(result.initial, session, &conditions); });
    result.forest = with_context("forest", [&] { return build_forest(result.initial, result.ambiguities, session); });

    const std::size_t n = result.forest.trees.size();
    result.selected.resize(n);
    with_context(stage::kSelect, [&] {
        OrderedLogs logs(session, n);
        parallel_for(n, config.workers, [&](std::size_t i) {
            result.selected[i] = select_chain(result.initial, result.forest.trees[i], i, logs.session_for(i));
        });
    });

    result.final_story =
        with_context(stage::kRewrite, [&] { return rewrite(result.initial, result.selected, session); });
    return result;
}

}  // namespace grove
