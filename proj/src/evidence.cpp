#include "grove/evidence.hpp"

#include <algorithm>

#include "grove/error.hpp"
#include "grove/text.hpp"

namespace grove {

std::size_t expected_node_count(std::size_t branching, std::size_t depth) {
    std::size_t total = 0;
    std::size_t level = 1;
    for (std::size_t d = 0; d <= depth; ++d) {
        total += level;
        level *= branching;
    }
    return total;
}

std::size_t expected_leaf_count(std::size_t branching, std::size_t depth) {
    std::size_t leaves = 1;
    for (std::size_t d = 0; d < depth; ++d) leaves *= branching;
    return leaves;
}

EvidenceTree::EvidenceTree(Ambiguity root, std::size_t branching, std::size_t depth,
                           std::vector<EvidenceNode> nodes)
    : root_(std::move(root)), branching_(branching), depth_(depth), nodes_(std::move(nodes)) {
    validate();
}

std::vector<std::size_t> EvidenceTree::children(std::size_t node_id) const {
    std::vector<std::size_t> out;
    const std::size_t first = branching_ * node_id + 1;
    for (std::size_t c = first; c < first + branching_ && c < nodes_.size(); ++c) out.push_back(c);
    return out;
}

std::size_t EvidenceTree::leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) {
        if (node.depth == depth_) ++n;
    }
    return n;
}

void EvidenceTree::validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::kPrecondition, "evidence tree: " + what); };
    if (branching_ < 1) fail("branching must be >= 1");
    if (depth_ < 1) fail("depth must be >= 1");
    if (nodes_.size() != expected_node_count(branching_, depth_)) {
        fail("expected " + std::to_string(expected_node_count(branching_, depth_)) + " nodes, got " +
             std::to_string(nodes_.size()));
    }
    if (root_.text.empty()) fail("root ambiguity is empty");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const EvidenceNode& n = nodes_[i];
        if (n.id != i) fail("node ids must follow breadth-first order");
        if (n.text.empty()) fail("node " + std::to_string(i) + " has empty text");
        if (i == 0) {
            if (n.parent != -1 || n.depth != 0) fail("root must have depth 0 and no parent");
            if (n.text != root_.text) fail("root node text differs from the ambiguity");
            continue;
        }
        const auto expected_parent = static_cast<long>((i - 1) / branching_);
        if (n.parent != expected_parent) fail("node " + std::to_string(i) + " has wrong parent");
        if (n.depth != nodes_[static_cast<std::size_t>(n.parent)].depth + 1) {
            fail("node " + std::to_string(i) + " depth is not parent depth + 1");
        }
        if (n.depth > depth_) fail("node " + std::to_string(i) + " is deeper than the tree");
    }
}

std::string EvidenceChain::joined() const { return text::join(texts, " "); }

std::vector<EvidenceChain> enumerate_chains(const EvidenceTree& tree, std::size_t tree_index) {
    std::vector<EvidenceChain> chains;
    const auto& nodes = tree.nodes();
    for (const auto& leaf : nodes) {
        if (leaf.depth != tree.depth()) continue;
        EvidenceChain chain;
        chain.tree_index = tree_index;
        for (long id = static_cast<long>(leaf.id); id >= 0; id = nodes[static_cast<std::size_t>(id)].parent) {
            chain.node_ids.push_back(static_cast<std::size_t>(id));
        }
        std::reverse(chain.node_ids.begin(), chain.node_ids.end());
        for (std::size_t id : chain.node_ids) chain.texts.push_back(nodes[id].text);
        chains.push_back(std::move(chain));
    }
    return chains;
}

std::size_t EvidenceForest::node_count() const {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.nodes().size();
    return n;
}

}  // namespace grove
