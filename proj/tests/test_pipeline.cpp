#include <doctest.h>

#include <functional>
#include <map>

#include "grove/pipeline.hpp"
#include "grove/serialization.hpp"
#include "support.hpp"

using namespace grove;
using grove::testing::error_kind;
using grove::testing::Harness;

namespace {

const Story kStory{"st", "A keeper watched the sea.", Provenance::kGeneratedInitial, ""};

// Expected node texts keyed by child path, built depth-first.
void oracle_tree(const std::vector<std::string>& chain, std::size_t b, std::size_t remaining,
                 const std::string& path, std::map<std::string, std::string>& out) {
    if (remaining == 0) return;
    const std::string rendered = text::without_terminal_period(text::join(chain, " "));
    for (std::size_t c = 0; c < b; ++c) {
        const std::string child_path = path.empty() ? std::to_string(c) : path + "/" + std::to_string(c);
        const std::string t = grove::testing::why_answer(rendered, c);
        out[child_path] = t;
        auto next = chain;
        next.push_back(t);
        oracle_tree(next, b, remaining - 1, child_path, out);
    }
}

std::string path_of(const EvidenceTree& tree, std::size_t id) {
    std::vector<std::string> steps;
    while (tree.nodes()[id].parent >= 0) {
        const auto parent = static_cast<std::size_t>(tree.nodes()[id].parent);
        const auto kids = tree.children(parent);
        for (std::size_t c = 0; c < kids.size(); ++c) {
            if (kids[c] == id) steps.push_back(std::to_string(c));
        }
        id = parent;
    }
    std::string out;
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) out += (out.empty() ? "" : "/") + *it;
    return out;
}

}  // namespace

TEST_CASE("initial prompt with and without exemplars") {
    const auto lib = TemplateLibrary::builtin();
    const auto c = grove::testing::sample_conditions();
    const std::string zero = render_initial_prompt(c, {}, lib);
    CHECK(zero ==
          "Please write a fairy tale that makes the readers feel melancholy. It describes the following subjects: "
          "lighthouse keeper, storm. It should at least contain the following plots (the more interesting plots "
          "the better): A lighthouse keeper waits for a ship that never arrives.");

    LexicalEmbedder e;
    const auto repo = grove::testing::small_repository(e);
    ExampleSet ex{{repo.items()[0]}};
    const std::string with = render_initial_prompt(c, ex, lib);
    CHECK(with.rfind("The old keeper climbed the tower every night. Learn from the plots", 0) == 0);

    ConditionSet partial;
    partial.set_mood("calm");
    CHECK(error_kind([&] { render_initial_prompt(partial, {}, lib); }) == ErrorKind::kPrecondition);
}

TEST_CASE("find_ambiguities takes the first N items") {
    Harness h;
    h.config.ambiguities = 3;
    const auto a = find_ambiguities(kStory, h.session());
    REQUIRE(a.size() == 3);
    CHECK(a[0].text == "Why the keeper stayed alone.");
    CHECK(a[2].index == 2);
    const auto prompt = h.transcript.records()[0].prompt;
    CHECK(prompt.find("point out 3 missing background information in the story with 3 simple sentences") !=
          std::string::npos);
}

TEST_CASE("too few ambiguities is malformed") {
    Harness h;
    h.config.ambiguities = 5;
    CHECK(error_kind([&] { find_ambiguities(kStory, h.session()); }) == ErrorKind::kMalformedResponse);
    CHECK(h.transcript.size() == 3);
}

TEST_CASE("conditioned ambiguity variant restates the target") {
    Harness h;
    h.config.conditioned_ambiguities = true;
    const auto c = grove::testing::sample_conditions();
    find_ambiguities(kStory, h.session(), &c);
    CHECK(h.transcript.records()[0].prompt.find("The story is a fairy tale") != std::string::npos);
    CHECK(error_kind([&] { find_ambiguities(kStory, h.session()); }) == ErrorKind::kPrecondition);
}

TEST_CASE("grow_tree matches a recursive oracle") {
    for (std::size_t b = 1; b <= 3; ++b) {
        for (std::size_t depth = 1; depth <= 3; ++depth) {
            CAPTURE(b);
            CAPTURE(depth);
            Harness h(false);
            grove::testing::add_why_responder(h.provider);
            h.config.branching = b;
            h.config.depth = depth;
            const Ambiguity root{"Why is the lamp dark.", 0};
            const auto tree = grow_tree(kStory, root, h.session());

            std::map<std::string, std::string> expected;
            oracle_tree({root.text}, b, depth, "", expected);
            REQUIRE(tree.nodes().size() == expected.size() + 1);
            for (std::size_t id = 1; id < tree.nodes().size(); ++id) {
                CHECK(tree.nodes()[id].text == expected.at(path_of(tree, id)));
            }
            CHECK(h.transcript.size() == expected_node_count(b, depth) - expected_leaf_count(b, depth));
        }
    }
}

TEST_CASE("grow_tree binds the chain without a doubled period") {
    Harness h;
    h.config.depth = 1;
    grow_tree(kStory, {"Why the keeper stayed alone.", 0}, h.session());
    const auto p = h.transcript.records()[0].prompt;
    CHECK(p.find("A missing detail is: Why the keeper stayed alone. Except") != std::string::npos);
    CHECK(p.find("point out 2 factual pieces") != std::string::npos);
}

TEST_CASE("grow_tree is identical across worker counts") {
    std::vector<std::string> dumps;
    for (std::size_t workers : {1, 2, 8}) {
        Harness h;
        h.config.branching = 3;
        h.config.depth = 3;
        h.config.workers = workers;
        const auto tree = grow_tree(kStory, {"Why.", 1}, h.session());
        nlohmann::json log = nlohmann::json::array();
        for (const auto& r : h.transcript.records()) log.push_back(to_json(r));
        dumps.push_back(to_json(tree).dump() + log.dump());
    }
    CHECK(dumps[0] == dumps[1]);
    CHECK(dumps[0] == dumps[2]);
}

TEST_CASE("expansion labels name the node") {
    Harness h;
    grow_tree(kStory, {"Why.", 1}, h.session());
    const auto records = h.transcript.records();
    REQUIRE(records.size() == 3);
    CHECK(records[0].label == "tree 1 node root");
    CHECK(records[1].label == "tree 1 node 0");
    CHECK(records[2].label == "tree 1 node 1");
    CHECK(records[0].stage == "expand");
}

TEST_CASE("select_chain lists chains and picks the numbered one") {
    Harness h(false);
    h.provider.add_rule("only generate the number", "The answer is 3.");
    grove::testing::add_why_responder(h.provider);
    const auto tree = grow_tree(kStory, {"Why", 0}, h.session());
    const auto chain = select_chain(kStory, tree, 4, h.session());
    CHECK(chain.node_ids == std::vector<std::size_t>{0, 2, 5});
    CHECK(chain.tree_index == 4);
    const auto prompt = h.transcript.records().back().prompt;
    CHECK(prompt.find("\n1. Why ") != std::string::npos);
    CHECK(prompt.find("\n4. Why ") != std::string::npos);
    CHECK(prompt.find("\n5. ") == std::string::npos);
}

TEST_CASE("out-of-range selection re-asks") {
    Harness h(false);
    h.provider.add_rule({"only generate the number", {"9", "0", "2"}, MatchMode::kSubstring});
    grove::testing::add_why_responder(h.provider);
    h.config.depth = 1;
    const auto tree = grow_tree(kStory, {"Why", 0}, h.session());
    CHECK(select_chain(kStory, tree, 0, h.session()).node_ids == std::vector<std::size_t>{0, 2});
}

TEST_CASE("rewrite prompt lists one line per chain") {
    Harness h;
    std::vector<EvidenceChain> chains{{0, {0, 1}, {"Why a.", "Because b."}}, {1, {0, 2}, {"Why c.", "Because d."}}};
    const auto s = rewrite(kStory, chains, h.session());
    CHECK(s.provenance == Provenance::kGeneratedFinal);
    const auto p = h.transcript.records()[0].prompt;
    CHECK(p.find("information:\n- Why a. Because b.\n- Why c. Because d.\nPretend") != std::string::npos);
}

TEST_CASE("rewrite rejects wrong chain counts and repeated trees without calling the model") {
    Harness h;
    std::vector<EvidenceChain> one{{0, {0}, {"a"}}};
    CHECK(error_kind([&] { rewrite(kStory, one, h.session()); }) == ErrorKind::kPrecondition);
    std::vector<EvidenceChain> same{{1, {0}, {"a"}}, {1, {0}, {"b"}}};
    CHECK(error_kind([&] { rewrite(kStory, same, h.session()); }) == ErrorKind::kPrecondition);
    CHECK(h.provider.call_count() == 0);
}

TEST_CASE("run_grove on defaults") {
    Harness h;
    const auto repo = grove::testing::small_repository(h.embedder);
    const auto r = run_grove(grove::testing::sample_conditions(), repo, h.session(), h.embedder);
    CHECK(r.retrieved_ids == std::vector<std::string>{"r1"});
    CHECK(r.ambiguities.size() == 2);
    REQUIRE(r.forest.trees.size() == 2);
    CHECK(r.forest.node_count() == 14);
    CHECK(r.selected[0].tree_index == 0);
    CHECK(r.selected[1].tree_index == 1);
    CHECK(h.provider.call_count() == 11);
    std::vector<std::string> stages;
    for (const auto& rec : h.transcript.records()) stages.push_back(rec.stage);
    CHECK(stages == std::vector<std::string>{"initial", "ambiguities", "expand", "expand", "expand", "expand",
                                             "expand", "expand", "select", "select", "rewrite"});
    CHECK(r.final_story.text.rfind("The keeper understood the storm at last.", 0) == 0);
    CHECK(generation_result_from_json(to_json(r)) == r);
}

TEST_CASE("run_grove with k = 0 uses the zero-shot prompt") {
    Harness h;
    h.config.k = 0;
    const auto r = run_grove(grove::testing::sample_conditions(), Repository(h.embedder.fingerprint()), h.session(),
                             h.embedder);
    CHECK(r.retrieved_ids.empty());
    CHECK(h.transcript.records()[0].prompt.rfind("Please write a", 0) == 0);
}

TEST_CASE("run_grove errors carry the stage") {
    Harness h(false);
    h.provider.add_rule("missing background information", "I'm sorry, I can't.");
    grove::testing::add_story_rules(h.provider);
    const auto repo = grove::testing::small_repository(h.embedder);
    try {
        run_grove(grove::testing::sample_conditions(), repo, h.session(), h.embedder);
        FAIL("expected refusal");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::kRefusal);
        CHECK(std::string(e.what()).rfind("ambiguities: ", 0) == 0);
        CHECK(e.raw_response() == "I'm sorry, I can't.");
    }
}

TEST_CASE("over-length prompts are rejected") {
    Harness h;
    h.provider.set_capabilities({100, true});
    const auto repo = grove::testing::small_repository(h.embedder);
    CHECK(error_kind([&] { run_grove(grove::testing::sample_conditions(), repo, h.session(), h.embedder); }) ==
          ErrorKind::kOverLength);
}

TEST_CASE("strategy names") {
    for (auto s : {Strategy::kGrove, Strategy::kIcl, Strategy::kCot, Strategy::kPromptE, Strategy::kStoryS}) {
        CHECK(strategy_from_name(strategy_name(s)) == s);
    }
    CHECK(strategy_from_name("Prompt-E") == Strategy::kPromptE);
    CHECK_FALSE(strategy_from_name("beam").has_value());
}

TEST_CASE("cot parsing") {
    auto p = parse_cot_response("List.\nIntegrated Story: Once upon a time.");
    CHECK(p.marker_found);
    CHECK(p.story == "Once upon a time.");
    p = parse_cot_response("integrated story early\n**Integrated Story**:\n\"Final tale\"");
    CHECK(p.story == "Final tale\"");
    p = parse_cot_response("No marker here.");
    CHECK_FALSE(p.marker_found);
    CHECK(p.story == "No marker here.");
}

TEST_CASE("select_best_sample prefers the lowest index on ties") {
    CHECK(select_best_sample({1, 3, 3, 2}) == 1);
    CHECK(select_best_sample({5}) == 0);
    CHECK(error_kind([] { select_best_sample({}); }) == ErrorKind::kPrecondition);
}

TEST_CASE("icl baseline is one call with the instruction") {
    Harness h;
    const auto repo = grove::testing::small_repository(h.embedder);
    const auto c = grove::testing::sample_conditions();
    const auto r = generate_baseline(Strategy::kIcl, c, repo, h.session(), h.embedder);
    REQUIRE(h.transcript.size() == 1);
    CHECK(h.transcript.records()[0].stage == "icl");
    CHECK(h.transcript.records()[0].prompt == render_initial_prompt(c, {{repo.items()[0]}}, h.templates));
    CHECK(r.final_story.strategy == "icl");
    CHECK(error_kind([&] { generate_baseline(Strategy::kGrove, c, repo, h.session(), h.embedder); }) ==
          ErrorKind::kPrecondition);
}

TEST_CASE("cot baseline appends the suffix with I rounds") {
    Harness h;
    h.config.depth = 3;
    const auto repo = grove::testing::small_repository(h.embedder);
    const auto r = generate_baseline(Strategy::kCot, grove::testing::sample_conditions(), repo, h.session(), h.embedder);
    const auto prompt = h.transcript.records()[0].prompt;
    CHECK(prompt.find("\nAfter you write the story") != std::string::npos);
    CHECK(prompt.find("for 3 rounds") != std::string::npos);
    CHECK(r.final_story.text.rfind("The keeper lit the lamp before dawn", 0) == 0);
    CHECK(r.flags.empty());
}

TEST_CASE("cot without a marker keeps the whole text and flags it") {
    Harness h(false);
    h.provider.add_rule("Integrated Story", "Just a plain story.");
    const auto repo = grove::testing::small_repository(h.embedder);
    const auto r = generate_baseline(Strategy::kCot, grove::testing::sample_conditions(), repo, h.session(), h.embedder);
    CHECK(r.final_story.text == "Just a plain story.");
    CHECK(r.flags == std::vector<std::string>{"cot-marker-absent"});
}

TEST_CASE("prompt-e issues four variants in order") {
    Harness h;
    h.config.workers = 4;
    const auto repo = grove::testing::small_repository(h.embedder);
    const auto r =
        generate_baseline(Strategy::kPromptE, grove::testing::sample_conditions(), repo, h.session(), h.embedder);
    REQUIRE(r.variants.size() == 4);
    const auto records = h.transcript.records();
    REQUIRE(records.size() == 4);
    CHECK(records[0].label == "variant 1");
    CHECK(records[3].label == "variant 4");
    CHECK(records[0].prompt.ends_with(". Generate a complex and creative story."));
    CHECK(records[2].prompt.find("Ensure that the story is creative and rich in plots.") != std::string::npos);
    CHECK(r.final_story == r.variants[0]);
}

TEST_CASE("story-s picks the best scored sample") {
    Harness h(false);
    h.provider.add_rule({"[Pp]lease write a", {"Story zero.", "Story one.", "Story two."}, MatchMode::kRegex});
    h.config.story_samples = 3;
    const auto repo = grove::testing::small_repository(h.embedder);
    const std::map<std::string, double> scores{{"Story zero.", 2.0}, {"Story one.", 5.0}, {"Story two.", 5.0}};
    const StoryScorer scorer = [&](const Story& s, const ConditionSet&, const Session&) {
        return scores.at(s.text);
    };
    const auto r =
        generate_baseline(Strategy::kStoryS, grove::testing::sample_conditions(), repo, h.session(), h.embedder, scorer);
    CHECK(r.sample_scores == std::vector<double>{2.0, 5.0, 5.0});
    CHECK(r.selected_sample == 1);
    CHECK(r.final_story.text == "Story one.");
    CHECK(baseline_result_from_json(to_json(r)) == r);
}

TEST_CASE("story-s offsets the seed per sample") {
    Harness h;
    h.config.sampling.seed = 10;
    h.config.eval_trials = 1;
    const auto repo = grove::testing::small_repository(h.embedder);
    const auto r =
        generate_baseline(Strategy::kStoryS, grove::testing::sample_conditions(), repo, h.session(), h.embedder);
    CHECK(r.samples.size() == 3);
    CHECK(r.samples[0].text != r.samples[1].text);
    const auto records = h.transcript.records();
    CHECK(records[0].sampling.seed == std::optional<std::uint64_t>(10));
    CHECK(records[2].sampling.seed == std::optional<std::uint64_t>(12));
    CHECK(r.sample_scores[0] == doctest::Approx(24.0));
}
