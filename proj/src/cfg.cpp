#include "mman/cfg.hpp"

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>

#include "mman/errors.hpp"

namespace mman {

const char* edge_type_name(EdgeType type) {
    switch (type) {
        case EdgeType::Seq: return "seq";
        case EdgeType::BranchTrue: return "branch-true";
        case EdgeType::BranchFalse: return "branch-false";
        case EdgeType::LoopBack: return "loop-back";
    }
    return "?";
}

EdgeType edge_type_from_name(const std::string& name) {
    if (name == "seq") return EdgeType::Seq;
    if (name == "branch-true") return EdgeType::BranchTrue;
    if (name == "branch-false") return EdgeType::BranchFalse;
    if (name == "loop-back") return EdgeType::LoopBack;
    throw Error("unknown edge type: " + name);
}

namespace {

struct Dangling {
    int src;
    EdgeType type;
};

// statement entry vertex (-1 when the statement is empty) plus its open exits
struct Flow {
    int entry = -1;
    std::vector<Dangling> outs;
};

class Builder {
public:
    explicit Builder(const RawAst& ast) : ast_(ast) {}

    Cfg run() {
        cfg_.entry = add_vertex("entry", "");
        cfg_.exit = add_vertex("exit", "");

        const RawAstNode& fn = ast_.node(ast_.root);
        if (fn.kind != AstKind::FunctionDecl) {
            throw UnsupportedConstruct(kind_name(fn.kind));
        }
        Flow body = build_stmt(fn.children.back());
        if (body.entry >= 0) {
            edge(cfg_.entry, body.entry, EdgeType::Seq);
        }
        connect(body.entry >= 0 ? body.outs : std::vector<Dangling>{{cfg_.entry, EdgeType::Seq}},
                cfg_.exit);

        prune_unreachable();
        return std::move(cfg_);
    }

private:
    int add_vertex(std::string kind, std::string text) {
        const int id = static_cast<int>(cfg_.vertices.size());
        cfg_.vertices.push_back(CfgVertex{id, std::move(kind), std::move(text)});
        return id;
    }

    void edge(int src, int dst, EdgeType type) { cfg_.edges.push_back(CfgEdge{src, dst, type}); }

    void connect(const std::vector<Dangling>& outs, int target) {
        for (const Dangling& d : outs) edge(d.src, target, d.type);
    }

    // closing the loop overrides whatever type the open edge carried
    void close_loop(const std::vector<Dangling>& outs, int cond) {
        for (const Dangling& d : outs) edge(d.src, cond, EdgeType::LoopBack);
    }

    Flow build_stmt(int id) {
        const RawAstNode& n = ast_.node(id);
        switch (n.kind) {
            case AstKind::Compound: return build_compound(n);
            case AstKind::If: return build_if(n);
            case AstKind::While: return build_while(n);
            case AstKind::For: return build_for(n);
            case AstKind::Return: {
                const int v = add_vertex("return", print_node(ast_, id));
                edge(v, cfg_.exit, EdgeType::Seq);
                return Flow{v, {}};
            }
            case AstKind::VarDecl: {
                const int v = add_vertex("decl", print_node(ast_, id));
                return Flow{v, {{v, EdgeType::Seq}}};
            }
            case AstKind::DeclStmt: {
                Flow flow;
                for (int child : n.children) {
                    const int v = add_vertex("decl", print_node(ast_, child));
                    if (flow.entry < 0) {
                        flow.entry = v;
                    } else {
                        connect(flow.outs, v);
                    }
                    flow.outs = {{v, EdgeType::Seq}};
                }
                return flow;
            }
            case AstKind::Call:
            case AstKind::BinaryOperator:
            case AstKind::UnaryOperator:
            case AstKind::DeclRef:
            case AstKind::Literal:
            case AstKind::MemberExpr:
            case AstKind::ArraySubscript: {
                const char* kind = n.kind == AstKind::Call ? "call" : "assign";
                const int v = add_vertex(kind, print_node(ast_, id));
                return Flow{v, {{v, EdgeType::Seq}}};
            }
            default:
                throw UnsupportedConstruct(kind_name(n.kind));
        }
    }

    Flow build_compound(const RawAstNode& n) {
        Flow flow;
        bool started = false;
        for (int child : n.children) {
            Flow inner = build_stmt(child);
            if (inner.entry < 0) continue;  // empty statement
            if (!started) {
                flow.entry = inner.entry;
                started = true;
            } else {
                connect(flow.outs, inner.entry);
            }
            flow.outs = inner.outs;
        }
        return flow;
    }

    Flow build_if(const RawAstNode& n) {
        const int cond = add_vertex("branch-cond", print_node(ast_, n.children[0]));
        Flow flow{cond, {}};

        Flow then_flow = build_stmt(n.children[1]);
        if (then_flow.entry >= 0) {
            edge(cond, then_flow.entry, EdgeType::BranchTrue);
            flow.outs.insert(flow.outs.end(), then_flow.outs.begin(), then_flow.outs.end());
        } else {
            flow.outs.push_back({cond, EdgeType::BranchTrue});
        }

        if (n.children.size() == 3) {
            Flow else_flow = build_stmt(n.children[2]);
            if (else_flow.entry >= 0) {
                edge(cond, else_flow.entry, EdgeType::BranchFalse);
                flow.outs.insert(flow.outs.end(), else_flow.outs.begin(), else_flow.outs.end());
            } else {
                flow.outs.push_back({cond, EdgeType::BranchFalse});
            }
        } else {
            flow.outs.push_back({cond, EdgeType::BranchFalse});
        }
        return flow;
    }

    Flow build_while(const RawAstNode& n) {
        const int cond = add_vertex("loop-cond", print_node(ast_, n.children[0]));
        Flow body = build_stmt(n.children[1]);
        if (body.entry >= 0) {
            edge(cond, body.entry, EdgeType::BranchTrue);
            close_loop(body.outs, cond);
        } else {
            edge(cond, cond, EdgeType::LoopBack);
        }
        return Flow{cond, {{cond, EdgeType::BranchFalse}}};
    }

    Flow build_for(const RawAstNode& n) {
        const bool has_init = n.type_text.find('i') != std::string::npos;
        const bool has_inc = n.type_text.find('n') != std::string::npos;
        std::size_t at = 0;

        Flow init;
        if (has_init) init = build_stmt(n.children[at++]);

        const int cond = add_vertex("loop-cond", print_node(ast_, n.children[at++]));
        if (init.entry >= 0) connect(init.outs, cond);

        int inc = -1;
        if (has_inc) {
            const int inc_node = n.children[at++];
            const char* kind = ast_.node(inc_node).kind == AstKind::Call ? "call" : "assign";
            inc = add_vertex(kind, print_node(ast_, inc_node));
            edge(inc, cond, EdgeType::LoopBack);
        }

        Flow body = build_stmt(n.children[at]);
        if (body.entry >= 0) {
            edge(cond, body.entry, EdgeType::BranchTrue);
            if (inc >= 0) {
                connect(body.outs, inc);
            } else {
                close_loop(body.outs, cond);
            }
        } else if (inc >= 0) {
            edge(cond, inc, EdgeType::BranchTrue);
        } else {
            edge(cond, cond, EdgeType::LoopBack);
        }

        return Flow{init.entry >= 0 ? init.entry : cond, {{cond, EdgeType::BranchFalse}}};
    }

    // drops statements that control flow can never reach (code after return)
    void prune_unreachable() {
        std::set<int> live{cfg_.exit};
        std::vector<int> frontier{cfg_.entry};
        live.insert(cfg_.entry);
        while (!frontier.empty()) {
            const int at = frontier.back();
            frontier.pop_back();
            for (const CfgEdge& e : cfg_.edges) {
                if (e.src == at && !live.count(e.dst)) {
                    live.insert(e.dst);
                    frontier.push_back(e.dst);
                }
            }
        }
        if (live.size() == cfg_.vertices.size()) return;

        Cfg kept;
        std::map<int, int> remap;
        for (const CfgVertex& v : cfg_.vertices) {
            if (!live.count(v.id)) continue;
            const int id = static_cast<int>(kept.vertices.size());
            remap[v.id] = id;
            kept.vertices.push_back(CfgVertex{id, v.kind, v.text});
        }
        for (const CfgEdge& e : cfg_.edges) {
            if (live.count(e.src) && live.count(e.dst)) {
                kept.edges.push_back(CfgEdge{remap[e.src], remap[e.dst], e.type});
            }
        }
        kept.entry = remap[cfg_.entry];
        kept.exit = remap[cfg_.exit];
        cfg_ = std::move(kept);
    }

    const RawAst& ast_;
    Cfg cfg_;
};

}  // namespace

Cfg build_cfg(const RawAst& ast) { return Builder(ast).run(); }

Cfg simplify_cfg(const Cfg& cfg) {
    // map-based mutable view; ids stay stable until the final compaction
    std::map<int, CfgVertex> vertices;
    for (const CfgVertex& v : cfg.vertices) vertices[v.id] = v;
    std::vector<CfgEdge> edges = cfg.edges;

    // pass 1: drop empty-statement vertices, bridging predecessors to
    // successors with the incoming edge's type
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [id, v] : vertices) {
            if (!v.text.empty() || id == cfg.entry || id == cfg.exit) continue;
            std::vector<CfgEdge> in, out, rest;
            for (const CfgEdge& e : edges) {
                if (e.src == id && e.dst == id) continue;  // self-loop dies with the vertex
                if (e.dst == id) {
                    in.push_back(e);
                } else if (e.src == id) {
                    out.push_back(e);
                } else {
                    rest.push_back(e);
                }
            }
            for (const CfgEdge& i : in) {
                for (const CfgEdge& o : out) rest.push_back(CfgEdge{i.src, o.dst, i.type});
            }
            edges = std::move(rest);
            vertices.erase(id);
            changed = true;
            break;
        }
    }

    // pass 2: vertices repeating an earlier statement text fold into the
    // first occurrence
    std::map<std::string, int> first_by_text;
    std::map<int, int> redirect;
    for (const auto& [id, v] : vertices) {
        if (id == cfg.entry || id == cfg.exit) continue;
        auto [it, fresh] = first_by_text.emplace(v.text, id);
        if (!fresh) redirect[id] = it->second;
    }
    if (!redirect.empty()) {
        for (CfgEdge& e : edges) {
            if (auto it = redirect.find(e.src); it != redirect.end()) e.src = it->second;
            if (auto it = redirect.find(e.dst); it != redirect.end()) e.dst = it->second;
        }
        for (const auto& [dup, keep] : redirect) vertices.erase(dup);
    }

    // pass 3: collapse parallel duplicates introduced by the rewiring
    std::set<std::tuple<int, int, int>> seen;
    std::vector<CfgEdge> unique_edges;
    for (const CfgEdge& e : edges) {
        if (seen.emplace(e.src, e.dst, static_cast<int>(e.type)).second) unique_edges.push_back(e);
    }

    if (vertices.size() > static_cast<std::size_t>(kCfgVertexCap)) throw TooLarge(vertices.size());

    Cfg out;
    std::map<int, int> remap;
    for (const auto& [id, v] : vertices) {
        const int nid = static_cast<int>(out.vertices.size());
        remap[id] = nid;
        out.vertices.push_back(CfgVertex{nid, v.kind, v.text});
    }
    for (const CfgEdge& e : unique_edges) {
        out.edges.push_back(CfgEdge{remap.at(e.src), remap.at(e.dst), e.type});
    }
    out.entry = remap.at(cfg.entry);
    out.exit = remap.at(cfg.exit);
    return out;
}

}  // namespace mman
