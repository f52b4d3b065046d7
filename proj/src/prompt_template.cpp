#include "grove/prompt_template.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "grove/embedded_templates.hpp"
#include "grove/error.hpp"
#include "grove/text.hpp"

namespace grove {
namespace {

bool is_placeholder_char(char c) { return (c >= 'A' && c <= 'Z') || c == ' '; }

// If body[pos] opens a placeholder, returns its name and sets `end` past ']'.
std::optional<std::string> placeholder_at(std::string_view body, std::size_t pos, std::size_t& end) {
    if (body[pos] != '[') return std::nullopt;
    std::size_t i = pos + 1;
    while (i < body.size() && is_placeholder_char(body[i])) ++i;
    if (i >= body.size() || body[i] != ']' || i == pos + 1) return std::nullopt;
    std::string_view name = body.substr(pos + 1, i - pos - 1);
    if (name.front() == ' ' || name.back() == ' ') return std::nullopt;
    end = i + 1;
    return std::string(name);
}

std::string strip_trailing_whitespace(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

}  // namespace

std::set<std::string> scan_placeholders(std::string_view body) {
    std::set<std::string> names;
    for (std::size_t pos = 0; pos < body.size(); ++pos) {
        std::size_t end = 0;
        if (auto name = placeholder_at(body, pos, end)) {
            names.insert(*name);
            pos = end - 1;
        }
    }
    return names;
}

PromptTemplate::PromptTemplate(std::string id, std::string body)
    : id_(std::move(id)), body_(std::move(body)), placeholders_(scan_placeholders(body_)) {}

std::string PromptTemplate::render(const Bindings& bindings) const {
    std::string out;
    out.reserve(body_.size() * 2);
    for (std::size_t pos = 0; pos < body_.size();) {
        std::size_t end = 0;
        if (auto name = placeholder_at(body_, pos, end)) {
            auto it = bindings.find(*name);
            if (it == bindings.end()) {
                throw Error(ErrorKind::kMissingBinding,
                            "template '" + id_ + "': placeholder [" + *name + "] is not bound");
            }
            out += it->second;
            pos = end;
        } else {
            out += body_[pos++];
        }
    }
    return out;
}

const std::map<std::string, std::set<std::string>, std::less<>>& documented_placeholders() {
    static const std::map<std::string, std::set<std::string>, std::less<>> table = [] {
        const std::set<std::string> icl{"GENRE", "EMOTION", "SUBJECTS", "PLOTS"};
        std::set<std::string> icl_with_examples = icl;
        icl_with_examples.insert("RETRIEVED EXAMPLE");
        std::set<std::string> conditioned = icl;
        conditioned.insert({"STORY", "N"});
        const std::set<std::string> likert{"STORY", "CONDITIONS"};
        return std::map<std::string, std::set<std::string>, std::less<>>{
            {"initial_story", icl_with_examples},
            {"initial_story_zero_shot", icl},
            {"cot_suffix", {"N"}},
            {"prompt_e_1", {}},
            {"prompt_e_2", {}},
            {"prompt_e_3", {}},
            {"prompt_e_4", {}},
            {"extract_mood", {"STORY"}},
            {"extract_subjects", {"STORY"}},
            {"extract_plot", {"STORY"}},
            {"ambiguity", {"STORY", "N"}},
            {"ambiguity_conditioned", conditioned},
            {"asking_why", {"STORY", "EVIDENCE CHAIN", "B"}},
            {"select_chain", {"STORY", "EVIDENCE TREE"}},
            {"rewrite", {"STORY", "EVIDENCE CHAINS"}},
            {"plot_count", {"STORY"}},
            {"likert_grammar", likert},
            {"likert_coherence", likert},
            {"likert_likability", likert},
            {"likert_relevance", likert},
            {"likert_complexity", likert},
            {"likert_creativity", likert},
        };
    }();
    return table;
}

TemplateLibrary TemplateLibrary::builtin() {
    TemplateLibrary lib;
    for (const auto& [id, body] : detail::kEmbeddedTemplates) {
        lib.put(PromptTemplate(std::string(id), strip_trailing_whitespace(std::string(body))));
    }
    return lib;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw Error(ErrorKind::kIo, "template directory not found: " + dir.string());
    }
    TemplateLibrary lib = builtin();
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        lib.put(PromptTemplate(entry.path().stem().string(), strip_trailing_whitespace(body.str())));
    }
    return lib;
}

const PromptTemplate& TemplateLibrary::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) {
        throw Error(ErrorKind::kTemplate, "unknown template id '" + std::string(id) + "'");
    }
    return it->second;
}

bool TemplateLibrary::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::vector<std::string> TemplateLibrary::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

std::map<std::string, std::string> TemplateLibrary::hashes() const {
    std::map<std::string, std::string> out;
    for (const auto& [id, tpl] : templates_) out[id] = text::hex64(text::fnv1a64(tpl.body()));
    return out;
}

void TemplateLibrary::put(PromptTemplate tpl) {
    std::string id = tpl.id();
    templates_.insert_or_assign(std::move(id), std::move(tpl));
}

}  // namespace grove
