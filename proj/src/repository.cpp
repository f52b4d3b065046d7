#include "grove/repository.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "grove/error.hpp"
#include "grove/parallel.hpp"
#include "grove/text.hpp"

namespace grove {
namespace {

using ordered_json = nlohmann::ordered_json;

// A double whose shortest decimal form has at most 9 significant digits and
// converts back to exactly `value` as a float.
double float_for_json(float value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(value));
    return std::strtod(buf, nullptr);
}

std::optional<std::string> clean_phrase(const std::string& raw) {
    std::string s = text::without_terminal_period(raw);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = text::trim(s.substr(1, s.size() - 2));
    if (s.empty()) return std::nullopt;
    return s;
}

std::optional<std::string> parse_mood(const std::string& response) {
    auto items = text::parse_list(response);
    if (items.empty()) return std::nullopt;
    return clean_phrase(items.front());
}

std::optional<std::vector<std::string>> parse_subjects(const std::string& response) {
    auto items = text::parse_list(response);
    // A single-line answer is usually comma separated.
    if (items.size() == 1 && items.front().find(',') != std::string::npos) {
        std::vector<std::string> split;
        std::stringstream ss(items.front());
        std::string part;
        while (std::getline(ss, part, ',')) split.push_back(part);
        items = std::move(split);
    }
    std::vector<std::string> subjects;
    for (const auto& item : items) {
        if (auto s = clean_phrase(item)) subjects.push_back(std::move(*s));
    }
    if (subjects.empty()) return std::nullopt;
    return subjects;
}

std::optional<std::string> parse_plot(const std::string& response) {
    auto items = text::parse_list(response);
    if (items.empty()) return std::nullopt;
    return text::join(items, "\n");
}

ordered_json item_to_json(const RepositoryItem& item, const EmbedderFingerprint& fp) {
    ordered_json key;
    const ConditionSet& k = item.key;
    key["plot"] = k.plot() ? ordered_json(*k.plot()) : ordered_json(nullptr);
    key["mood"] = k.mood() ? ordered_json(*k.mood()) : ordered_json(nullptr);
    key["genre"] = k.genre() ? ordered_json(*k.genre()) : ordered_json(nullptr);
    key["subjects"] = k.subjects();

    ordered_json embeddings = ordered_json::object();
    for (Slot s : kAllSlots) {
        auto it = item.embeddings.find(s);
        if (it == item.embeddings.end()) continue;
        ordered_json values = ordered_json::array();
        for (float v : it->second) values.push_back(float_for_json(v));
        embeddings[std::string(slot_name(s))] = std::move(values);
    }

    ordered_json j;
    j["id"] = item.id;
    j["insertion_index"] = item.insertion_index;
    j["story"] = item.story.text;
    j["key"] = std::move(key);
    j["embeddings"] = std::move(embeddings);
    j["embedder"] = {{"id", fp.id}, {"dimension", fp.dimension}};
    return j;
}

ConditionSet key_from_json(const nlohmann::json& j) {
    ConditionSet c;
    auto text_slot = [&](const char* name) -> std::optional<std::string> {
        if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
        std::string v = j.at(name).get<std::string>();
        if (text::trim(v).empty()) return std::nullopt;
        return v;
    };
    if (auto v = text_slot("plot")) c.set_plot(*v);
    if (auto v = text_slot("mood")) c.set_mood(*v);
    if (auto v = text_slot("genre")) c.set_genre(*v);
    if (j.contains("subjects") && !j.at("subjects").is_null()) {
        c.set_subjects(j.at("subjects").get<std::vector<std::string>>());
    }
    return c;
}

}  // namespace

SlotEmbeddings embed_conditions(const ConditionSet& conditions, const Embedder& embedder) {
    SlotEmbeddings out;
    for (Slot s : conditions.populated()) out.emplace(s, embedder.embed(conditions.slot_text(s)));
    return out;
}

const RepositoryItem& Repository::add(Story story, ConditionSet key, const Embedder& embedder) {
    if (embedder.fingerprint() != fingerprint_) {
        throw Error(ErrorKind::kFingerprint, "embedder " + embedder.fingerprint().to_string() +
                                                 " does not match repository " + fingerprint_.to_string());
    }
    RepositoryItem item;
    item.id = story.id;
    item.embeddings = embed_conditions(key, embedder);
    item.key = std::move(key);
    item.story = std::move(story);
    item.insertion_index = items_.size();
    items_.push_back(std::move(item));
    return items_.back();
}

const RepositoryItem& Repository::add_embedded(RepositoryItem item) {
    for (Slot s : item.key.populated()) {
        auto it = item.embeddings.find(s);
        if (it == item.embeddings.end()) {
            throw Error(ErrorKind::kPrecondition,
                        "item '" + item.id + "' lacks an embedding for slot " + std::string(slot_name(s)));
        }
    }
    for (const auto& [slot, e] : item.embeddings) {
        if (e.size() != fingerprint_.dimension) {
            throw Error(ErrorKind::kPrecondition, "item '" + item.id + "' embedding dimension " +
                                                      std::to_string(e.size()) + " != " +
                                                      std::to_string(fingerprint_.dimension));
        }
    }
    item.insertion_index = items_.size();
    items_.push_back(std::move(item));
    return items_.back();
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::vector<CorpusEntry> corpus;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(path)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::ifstream in(f, std::ios::binary);
            std::ostringstream body;
            body << in.rdbuf();
            std::string content = text::trim(body.str());
            if (content.empty()) continue;
            corpus.push_back({Story{f.filename().string(), std::move(content), Provenance::kHumanCorpus, {}},
                              std::nullopt});
        }
        return corpus;
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open corpus " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            CorpusEntry entry;
            entry.story.id = j.contains("id") ? (j.at("id").is_string() ? j.at("id").get<std::string>()
                                                                        : j.at("id").dump())
                                              : "line-" + std::to_string(line_no);
            entry.story.text = j.at("text").get<std::string>();
            entry.story.provenance = Provenance::kHumanCorpus;
            if (j.contains("genre") && j.at("genre").is_string() &&
                !text::trim(j.at("genre").get<std::string>()).empty()) {
                entry.genre = j.at("genre").get<std::string>();
            }
            if (text::trim(entry.story.text).empty()) {
                throw Error(ErrorKind::kParse, "empty story text");
            }
            corpus.push_back(std::move(entry));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::kParse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw e.with_context(path.string() + ":" + std::to_string(line_no));
        }
    }
    return corpus;
}

ConditionSet extract_conditions(const Story& story, const Session& session,
                                const std::optional<std::string>& genre) {
    if (text::trim(story.text).empty()) throw Error(ErrorKind::kPrecondition, "story text is empty");
    const Bindings bindings{{"STORY", story.text}};
    ConditionSet c;

    auto mood = session.ask<std::string>(
        "extract-mood", story.id, session.render(template_id::kExtractMood, bindings), parse_mood,
        [](const std::string& m) { return nlohmann::json(m); });
    c.set_mood(mood);

    auto subjects = session.ask<std::vector<std::string>>(
        "extract-subjects", story.id, session.render(template_id::kExtractSubjects, bindings),
        parse_subjects, [](const std::vector<std::string>& s) { return nlohmann::json(s); });
    c.set_subjects(subjects);

    auto plot = session.ask<std::string>(
        "extract-plot", story.id, session.render(template_id::kExtractPlot, bindings), parse_plot,
        [](const std::string& p) { return nlohmann::json(p); });
    c.set_plot(plot);

    if (genre && !text::trim(*genre).empty()) c.set_genre(*genre);
    return c;
}

BuildResult build_repository(const std::vector<CorpusEntry>& corpus, const Session& session,
                             const Embedder& embedder) {
    if (corpus.empty()) throw Error(ErrorKind::kPrecondition, "corpus is empty");

    struct Outcome {
        std::optional<ConditionSet> key;
        std::string error;
        Transcript transcript;
    };
    std::vector<Outcome> outcomes(corpus.size());
    parallel_for(corpus.size(), session.config().workers, [&](std::size_t i) {
        Outcome& o = outcomes[i];
        try {
            o.key = extract_conditions(corpus[i].story, session.with_transcript(o.transcript), corpus[i].genre);
        } catch (const Error& e) {
            o.error = e.what();
        }
    });

    BuildResult result{Repository(embedder.fingerprint()), {}};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        session.transcript().append_all(outcomes[i].transcript);
        if (outcomes[i].key) {
            result.repository.add(corpus[i].story, std::move(*outcomes[i].key), embedder);
        } else {
            result.skipped.push_back({corpus[i].story.id, outcomes[i].error});
        }
    }
    if (result.repository.empty()) {
        std::string causes;
        for (const auto& s : result.skipped) causes += "\n  " + s.id + ": " + s.reason;
        throw Error(ErrorKind::kBuild, "every story failed condition extraction:" + causes);
    }
    return result;
}

double score(const SlotEmbeddings& query, const SlotEmbeddings& key) {
    double s = 0.0;
    for (Slot slot : kAllSlots) {
        auto q = query.find(slot);
        auto k = key.find(slot);
        if (q == query.end() || k == key.end()) continue;
        s += cosine(q->second, k->second);
    }
    return s;
}

double score(const ConditionSet& query, const ConditionSet& key, const Embedder& embedder) {
    if (shared_slots(query, key).empty()) {
        throw Error(ErrorKind::kPrecondition, "query and key share no populated condition slot");
    }
    return score(embed_conditions(query, embedder), embed_conditions(key, embedder));
}

std::vector<RankedItem> rank(const Repository& repo, const ConditionSet& query, const Embedder& embedder) {
    if (embedder.fingerprint() != repo.fingerprint()) {
        throw Error(ErrorKind::kFingerprint, "embedder " + embedder.fingerprint().to_string() +
                                                 " does not match repository " + repo.fingerprint().to_string());
    }
    if (query.populated().empty()) throw Error(ErrorKind::kPrecondition, "query has no populated slot");
    const SlotEmbeddings q = embed_conditions(query, embedder);
    std::vector<RankedItem> ranked;
    ranked.reserve(repo.size());
    for (std::size_t i = 0; i < repo.size(); ++i) {
        ranked.push_back({i, score(q, repo.items()[i].embeddings)});
    }
    const auto& items = repo.items();
    auto by_insertion = [&](const RankedItem& a, const RankedItem& b) {
        return items[a.position].insertion_index < items[b.position].insertion_index;
    };
    std::sort(ranked.begin(), ranked.end(), [&](const RankedItem& a, const RankedItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return by_insertion(a, b);
    });
    for (std::size_t begin = 0; begin < ranked.size();) {
        std::size_t end = begin + 1;
        while (end < ranked.size() && ranked[end - 1].score - ranked[end].score <= kScoreTieTolerance) ++end;
        std::sort(ranked.begin() + static_cast<long>(begin), ranked.begin() + static_cast<long>(end), by_insertion);
        begin = end;
    }
    return ranked;
}

std::vector<RepositoryItem> retrieve(const Repository& repo, const ConditionSet& query, std::size_t k,
                                     const Embedder& embedder) {
    if (k == 0) return {};
    auto ranked = rank(repo, query, embedder);
    std::vector<RepositoryItem> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(repo.items()[ranked[i].position]);
    return out;
}

std::string serialize_repository(const Repository& repo) {
    std::string out;
    for (const auto& item : repo.items()) {
        out += item_to_json(item, repo.fingerprint()).dump();
        out += '\n';
    }
    return out;
}

void save_repository(const Repository& repo, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
        out << serialize_repository(repo);
        if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Repository parse_repository(std::string_view content, const Embedder& embedder,
                            std::vector<std::string>* warnings) {
    Repository repo(embedder.fingerprint());
    bool warned = false;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        const std::string_view line = content.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = "repository line " + std::to_string(line_no);
        try {
            const auto j = nlohmann::json::parse(line);
            RepositoryItem item;
            item.id = j.at("id").get<std::string>();
            item.story = Story{item.id, j.at("story").get<std::string>(), Provenance::kHumanCorpus, {}};
            item.key = key_from_json(j.at("key"));
            const auto stored_index = j.at("insertion_index").get<std::size_t>();
            if (stored_index != repo.size()) {
                throw Error(ErrorKind::kParse, "insertion_index " + std::to_string(stored_index) +
                                                   " out of sequence (expected " +
                                                   std::to_string(repo.size()) + ")");
            }
            EmbedderFingerprint stored{j.at("embedder").at("id").get<std::string>(),
                                       j.at("embedder").at("dimension").get<std::size_t>()};
            if (stored == embedder.fingerprint()) {
                for (const auto& [name, values] : j.at("embeddings").items()) {
                    auto slot = slot_from_name(name);
                    if (!slot) throw Error(ErrorKind::kParse, "unknown embedding slot '" + name + "'");
                    Embedding e;
                    e.reserve(values.size());
                    for (const auto& v : values) e.push_back(static_cast<float>(v.get<double>()));
                    item.embeddings.emplace(*slot, std::move(e));
                }
                repo.add_embedded(std::move(item));
            } else {
                if (!warned && warnings) {
                    warnings->push_back("repository embedded with " + stored.to_string() +
                                        "; recomputing embeddings with " + embedder.fingerprint().to_string());
                }
                warned = true;
                repo.add(std::move(item.story), std::move(item.key), embedder);
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::kParse, where + ": " + e.what());
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::kParse || e.kind() == ErrorKind::kPrecondition) {
                throw Error(ErrorKind::kParse, where + ": " + e.what());
            }
            throw;
        }
    }
    return repo;
}

Repository load_repository(const std::filesystem::path& path, const Embedder& embedder,
                           std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot open repository " + path.string());
    std::ostringstream body;
    body << in.rdbuf();
    return parse_repository(body.str(), embedder, warnings);
}

}  // namespace grove
