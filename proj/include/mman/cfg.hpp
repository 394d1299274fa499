#pragma once

#include <string>
#include <vector>

#include "mman/parser.hpp"

namespace mman {

enum class EdgeType { Seq, BranchTrue, BranchFalse, LoopBack };

constexpr int kEdgeTypeCount = 4;  // forward types; reverse counterparts are derived
constexpr int kCfgVertexCap = 512;

const char* edge_type_name(EdgeType type);
EdgeType edge_type_from_name(const std::string& name);

struct CfgVertex {
    int id = 0;
    std::string kind;  // entry, exit, decl, assign, call, return, branch-cond, loop-cond
    std::string text;  // empty only for entry and exit
};

struct CfgEdge {
    int src = 0;
    int dst = 0;
    EdgeType type = EdgeType::Seq;
};

struct Cfg {
    std::vector<CfgVertex> vertices;  // vertex id doubles as the index
    std::vector<CfgEdge> edges;
    int entry = 0;
    int exit = 1;
};

// One vertex per statement or condition, connected by typed control-flow
// edges; unreachable statements (code after return) are dropped.
Cfg build_cfg(const RawAst& ast);

// Removes empty-statement vertices (relinking with the incoming edge's type)
// and vertices repeating an earlier statement text, then enforces the vertex
// cap. Idempotent.
Cfg simplify_cfg(const Cfg& cfg);

}  // namespace mman
