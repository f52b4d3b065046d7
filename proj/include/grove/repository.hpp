#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grove/conditions.hpp"
#include "grove/provider.hpp"
#include "grove/session.hpp"

namespace grove {

using SlotEmbeddings = std::map<Slot, Embedding>;

struct RepositoryItem {
    std::string id;
    Story story;
    ConditionSet key;
    SlotEmbeddings embeddings;  // one per populated key slot
    std::size_t insertion_index = 0;

    friend bool operator==(const RepositoryItem&, const RepositoryItem&) = default;
};

SlotEmbeddings embed_conditions(const ConditionSet& conditions, const Embedder& embedder);

// Retrieval repository: (extracted conditions, story) pairs plus cached key
// embeddings produced by the fingerprinted embedder. Immutable once built.
class Repository {
public:
    explicit Repository(EmbedderFingerprint fingerprint = {}) : fingerprint_(std::move(fingerprint)) {}

    const EmbedderFingerprint& fingerprint() const { return fingerprint_; }
    const std::vector<RepositoryItem>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    // Appends an item whose embeddings are computed with `embedder`;
    // insertion_index becomes the current size.
    const RepositoryItem& add(Story story, ConditionSet key, const Embedder& embedder);
    // Appends an item with precomputed embeddings; they must match the fingerprint dimension.
    const RepositoryItem& add_embedded(RepositoryItem item);

    friend bool operator==(const Repository&, const Repository&) = default;

private:
    EmbedderFingerprint fingerprint_;
    std::vector<RepositoryItem> items_;
};

struct CorpusEntry {
    Story story;
    std::optional<std::string> genre;
};

// JSONL {id, text, genre?} or a directory of text files (sorted by filename,
// filename as id, no genre).
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);

// Mood, subjects and plot via three prompts; genre only from `genre`.
ConditionSet extract_conditions(const Story& story, const Session& session,
                                const std::optional<std::string>& genre = std::nullopt);

struct SkippedStory {
    std::string id;
    std::string reason;
};

struct BuildResult {
    Repository repository;
    std::vector<SkippedStory> skipped;
};

// Extraction runs up to config.workers stories at once; items and transcript
// records follow corpus order regardless.
BuildResult build_repository(const std::vector<CorpusEntry>& corpus, const Session& session,
                             const Embedder& embedder);

// Sum of per-slot cosine similarities over slots populated in both sets.
double score(const ConditionSet& query, const ConditionSet& key, const Embedder& embedder);
double score(const SlotEmbeddings& query, const SlotEmbeddings& key);

struct RankedItem {
    std::size_t position = 0;  // index into Repository::items()
    double score = 0.0;
};

// Scores closer than this to their better-ranked neighbour count as tied.
inline constexpr double kScoreTieTolerance = 1e-6;

// Every item, best first. Runs of scores within kScoreTieTolerance of each
// other are ordered by insertion index.
std::vector<RankedItem> rank(const Repository& repo, const ConditionSet& query,
                             const Embedder& embedder);

std::vector<RepositoryItem> retrieve(const Repository& repo, const ConditionSet& query,
                                     std::size_t k, const Embedder& embedder);

void save_repository(const Repository& repo, const std::filesystem::path& path);
std::string serialize_repository(const Repository& repo);

// Parses a repository file. Items embedded by a different embedder are
// re-embedded with `embedder` and a warning is appended to `warnings`.
Repository load_repository(const std::filesystem::path& path, const Embedder& embedder,
                           std::vector<std::string>* warnings = nullptr);
Repository parse_repository(std::string_view content, const Embedder& embedder,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace grove
