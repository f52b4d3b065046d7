#include "grove/lexical_embedder.hpp"

#include <cmath>

#include "grove/error.hpp"
#include "grove/text.hpp"

namespace grove {

LexicalEmbedder::LexicalEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorKind::kPrecondition, "embedding dimension must be positive");
}

std::size_t LexicalEmbedder::bucket(std::string_view token) const {
    return static_cast<std::size_t>(text::fnv1a64(token) % dimension_);
}

Embedding LexicalEmbedder::embed(std::string_view input) const {
    if (input.empty()) throw Error(ErrorKind::kPrecondition, "cannot embed empty text");
    std::vector<double> counts(dimension_, 0.0);
    for (const auto& token : text::tokenize(input)) counts[bucket(token)] += 1.0;
    double norm = 0.0;
    for (double c : counts) norm += c * c;
    Embedding out(dimension_, 0.0f);
    if (norm == 0.0) return out;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dimension_; ++i) out[i] = static_cast<float>(counts[i] / norm);
    return out;
}

}  // namespace grove
