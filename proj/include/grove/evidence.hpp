#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "grove/conditions.hpp"

namespace grove {

struct EvidenceNode {
    std::size_t id = 0;
    // -1 for the root.
    long parent = -1;
    std::size_t depth = 0;
    std::string text;

    friend bool operator==(const EvidenceNode&, const EvidenceNode&) = default;
};

// Complete b-ary tree of depth I rooted at an ambiguity. Nodes are stored in
// breadth-first order, so the children of node i are b*i+1 .. b*i+b.
class EvidenceTree {
public:
    EvidenceTree() = default;
    EvidenceTree(Ambiguity root, std::size_t branching, std::size_t depth,
                 std::vector<EvidenceNode> nodes);

    const Ambiguity& root() const { return root_; }
    std::size_t branching() const { return branching_; }
    std::size_t depth() const { return depth_; }
    const std::vector<EvidenceNode>& nodes() const { return nodes_; }

    std::vector<std::size_t> children(std::size_t node_id) const;
    std::size_t leaf_count() const;

    // Throws Error(kPrecondition) describing the first violated invariant.
    void validate() const;

    friend bool operator==(const EvidenceTree&, const EvidenceTree&) = default;

private:
    Ambiguity root_;
    std::size_t branching_ = 0;
    std::size_t depth_ = 0;
    std::vector<EvidenceNode> nodes_;
};

std::size_t expected_node_count(std::size_t branching, std::size_t depth);
std::size_t expected_leaf_count(std::size_t branching, std::size_t depth);

struct EvidenceChain {
    std::size_t tree_index = 0;
    std::vector<std::size_t> node_ids;
    std::vector<std::string> texts;

    // Node texts joined by a single space.
    std::string joined() const;

    friend bool operator==(const EvidenceChain&, const EvidenceChain&) = default;
};

std::vector<EvidenceChain> enumerate_chains(const EvidenceTree& tree, std::size_t tree_index = 0);

struct EvidenceForest {
    std::vector<EvidenceTree> trees;

    std::size_t node_count() const;
    friend bool operator==(const EvidenceForest&, const EvidenceForest&) = default;
};

}  // namespace grove
