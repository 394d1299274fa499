#pragma once

#include <string>
#include <vector>

#include "mman/parser.hpp"

namespace mman {

struct BinaryAstNode {
    int id = 0;
    std::string label;
    int left = -1;  // -1 means absent
    int right = -1;
};

struct BinaryAst {
    std::vector<BinaryAstNode> nodes;  // node id doubles as the index
    int root = 0;

    const BinaryAstNode& node(int id) const { return nodes[static_cast<std::size_t>(id)]; }
    bool is_leaf(int id) const { return node(id).left < 0 && node(id).right < 0; }
};

// Two rewrites over the raw tree: nodes with more than two children split
// (keeping the leftmost child, pushing the rest under a fresh node with the
// same label), then single-child chains merge with labels joined by "+".
// Labels entering the rewrite are the node's source label for leaves and the
// kind name for interior nodes.
BinaryAst binarize(const RawAst& ast);

// In-order leaf labels, used by the fringe-preservation property.
std::vector<std::string> leaf_fringe(const BinaryAst& ast);

}  // namespace mman
