#pragma once

#include <string>
#include <vector>

namespace mman {

enum class AstKind {
    FunctionDecl,
    ParmDecl,
    Compound,
    DeclStmt,
    VarDecl,
    If,
    While,
    For,
    Return,
    Call,
    BinaryOperator,
    UnaryOperator,
    DeclRef,
    Literal,
    MemberExpr,
    ArraySubscript,
};

const char* kind_name(AstKind kind);

struct RawAstNode {
    int id = 0;
    AstKind kind = AstKind::Literal;
    std::string label;      // identifier, literal or operator spelling
    std::string type_text;  // printing annotation: declared type, operator fixity, for-clause shape
    std::vector<int> children;
};

struct RawAst {
    std::vector<RawAstNode> nodes;  // node id doubles as the index
    int root = 0;

    const RawAstNode& node(int id) const { return nodes[static_cast<std::size_t>(id)]; }
};

// One function definition in the supported C subset.
RawAst parse(const std::string& source_text);

// Source text of a single node: no trailing semicolon for statements, the
// whole definition for the root. Re-parses to an isomorphic tree.
std::string print_node(const RawAst& ast, int id);

std::string pretty_print(const RawAst& ast);

}  // namespace mman
