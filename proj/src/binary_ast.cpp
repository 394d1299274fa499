#include "mman/binary_ast.hpp"

namespace mman {

namespace {

struct TmpNode {
    std::string label;
    std::vector<int> children;
};

void append_subtree(const std::vector<TmpNode>& tmp, int id, BinaryAst& out) {
    const int my = static_cast<int>(out.nodes.size());
    out.nodes.push_back(BinaryAstNode{my, tmp[static_cast<std::size_t>(id)].label, -1, -1});
    const auto& children = tmp[static_cast<std::size_t>(id)].children;
    if (!children.empty()) {
        out.nodes[static_cast<std::size_t>(my)].left = static_cast<int>(out.nodes.size());
        append_subtree(tmp, children[0], out);
    }
    if (children.size() > 1) {
        out.nodes[static_cast<std::size_t>(my)].right = static_cast<int>(out.nodes.size());
        append_subtree(tmp, children[1], out);
    }
}

void fringe_of(const BinaryAst& ast, int id, std::vector<std::string>& out) {
    if (ast.is_leaf(id)) {
        out.push_back(ast.node(id).label);
        return;
    }
    if (ast.node(id).left >= 0) fringe_of(ast, ast.node(id).left, out);
    if (ast.node(id).right >= 0) fringe_of(ast, ast.node(id).right, out);
}

}  // namespace

BinaryAst binarize(const RawAst& ast) {
    std::vector<TmpNode> tmp;
    tmp.reserve(ast.nodes.size());
    for (const auto& n : ast.nodes) {
        const bool leaf = n.children.empty();
        const std::string label =
            leaf && !n.label.empty() ? n.label : std::string(kind_name(n.kind));
        tmp.push_back(TmpNode{label, n.children});
    }

    // split pass, top-down: arity n collapses to a right-leaning spine of
    // fresh nodes carrying the parent's label
    std::vector<int> work{ast.root};
    while (!work.empty()) {
        const int id = work.back();
        work.pop_back();
        while (tmp[static_cast<std::size_t>(id)].children.size() > 2) {
            std::vector<int> children = std::move(tmp[static_cast<std::size_t>(id)].children);
            const int fresh = static_cast<int>(tmp.size());
            tmp.push_back(TmpNode{tmp[static_cast<std::size_t>(id)].label,
                                  std::vector<int>(children.begin() + 1, children.end())});
            tmp[static_cast<std::size_t>(id)].children = {children[0], fresh};
        }
        for (int child : tmp[static_cast<std::size_t>(id)].children) work.push_back(child);
    }

    // merge pass: single-child chains collapse into one node
    std::vector<int> merge_work{ast.root};
    while (!merge_work.empty()) {
        const int id = merge_work.back();
        merge_work.pop_back();
        auto& node = tmp[static_cast<std::size_t>(id)];
        while (node.children.size() == 1) {
            const TmpNode& child = tmp[static_cast<std::size_t>(node.children[0])];
            node.label += "+" + child.label;
            node.children = child.children;
        }
        for (int child : node.children) merge_work.push_back(child);
    }

    BinaryAst out;
    append_subtree(tmp, ast.root, out);
    out.root = 0;
    return out;
}

std::vector<std::string> leaf_fringe(const BinaryAst& ast) {
    std::vector<std::string> out;
    if (!ast.nodes.empty()) fringe_of(ast, ast.root, out);
    return out;
}

}  // namespace mman
