#pragma once

#include "grove/provider.hpp"

namespace grove {

// Feature-hashed term-frequency embedding: each token adds 1 to bucket
// fnv1a64(token) mod D, and the result is L2-normalized unless all-zero.
class LexicalEmbedder final : public Embedder {
public:
    explicit LexicalEmbedder(std::size_t dimension = 256);

    std::size_t dimension() const override { return dimension_; }
    std::string id() const override { return "lexical-fnv1a"; }
    Embedding embed(std::string_view text) const override;

    std::size_t bucket(std::string_view token) const;

private:
    std::size_t dimension_;
};

}  // namespace grove
