#include "mman/encoders.hpp"

#include <array>

#include "mman/errors.hpp"

namespace mman {

Var ParamVars::at(const std::string& name) {
    auto it = cache_.find(name);
    if (it != cache_.end()) return it->second;
    Var v = tape_->leaf(params_->at(name));
    cache_.emplace(name, v);
    return v;
}

std::map<std::string, Tensor> ParamVars::collect_grads() const {
    std::map<std::string, Tensor> grads;
    for (const auto& name : params_->names()) {
        auto it = cache_.find(name);
        if (it != cache_.end() && tape_->has_grad(it->second)) {
            grads[name] = tape_->grad(it->second);
        } else {
            grads[name] = Tensor::zeros(params_->at(name).shape());
        }
    }
    return grads;
}

namespace {

// sigmoid/tanh gate pre-activation: W x + U h + b
Var seq_gate(ParamVars& pv, const std::string& base, Var x, Var h) {
    Tape& t = pv.tape();
    Var pre = t.add(t.matmul(pv.at(base + ".w"), x), t.matmul(pv.at(base + ".u"), h));
    return t.add(pre, pv.at(base + ".b"));
}

// tree variant over two child states: W x + Ul hl + Ur hr + b
Var tree_gate(ParamVars& pv, const std::string& base, Var x, Var hl, Var hr) {
    Tape& t = pv.tape();
    Var pre = t.add(t.matmul(pv.at(base + ".w"), x), t.matmul(pv.at(base + ".ul"), hl));
    pre = t.add(pre, t.matmul(pv.at(base + ".ur"), hr));
    return t.add(pre, pv.at(base + ".b"));
}

struct CellState {
    Var h;
    Var c;
};

CellState lstm_step(ParamVars& pv, const std::string& prefix, Var x, const CellState& prev) {
    Tape& t = pv.tape();
    Var i = t.sigmoid(seq_gate(pv, prefix + ".i", x, prev.h));
    Var f = t.sigmoid(seq_gate(pv, prefix + ".f", x, prev.h));
    Var g = t.tanh(seq_gate(pv, prefix + ".g", x, prev.h));
    Var o = t.sigmoid(seq_gate(pv, prefix + ".o", x, prev.h));
    Var c = t.add(t.mul(i, g), t.mul(f, prev.c));
    Var h = t.mul(o, t.tanh(c));
    return {h, c};
}

const std::array<const char*, kCfgKindCount> kCfgKinds = {
    "entry", "exit", "decl", "assign", "call", "return", "branch-cond", "loop-cond",
};

}  // namespace

int cfg_kind_index(const std::string& kind) {
    for (int i = 0; i < kCfgKindCount; ++i) {
        if (kind == kCfgKinds[static_cast<std::size_t>(i)]) return i;
    }
    throw Error("unknown vertex kind: " + kind);
}

EncoderOutput encode_tokens(ParamVars& pv, const std::string& prefix, const std::vector<int>& ids,
                            const std::vector<std::string>& labels, int hidden_dim) {
    if (ids.empty()) throw EmptySequence();
    if (labels.size() != ids.size()) {
        throw ShapeMismatch("token labels [" + std::to_string(labels.size()) + "] vs ids [" +
                            std::to_string(ids.size()) + "]");
    }
    std::vector<std::uint8_t> mask(ids.size(), 1);
    bool any = false;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == 0) {
            mask[i] = 0;
        } else {
            any = true;
        }
    }
    if (!any) throw EmptySequence();

    Tape& t = pv.tape();
    Var xs = t.embedding_lookup(pv.at(prefix + ".embed"), ids);
    CellState s{t.leaf(Tensor::zeros({hidden_dim})), t.leaf(Tensor::zeros({hidden_dim}))};
    std::vector<Var> states;
    states.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (mask[i]) s = lstm_step(pv, prefix, t.row(xs, static_cast<int>(i)), s);
        states.push_back(s.h);
    }
    return {t.stack_rows(states), s.h, std::move(mask), labels};
}

EncoderOutput encode_ast(ParamVars& pv, const std::string& prefix, const BinaryAst& ast,
                         const std::vector<int>& node_ids, int hidden_dim) {
    if (ast.nodes.empty()) throw EmptyTree();
    if (node_ids.size() != ast.nodes.size()) {
        throw ShapeMismatch("tree node ids [" + std::to_string(node_ids.size()) + "] vs nodes [" +
                            std::to_string(ast.nodes.size()) + "]");
    }
    Tape& t = pv.tape();
    Var xs = t.embedding_lookup(pv.at(prefix + ".embed"), node_ids);
    Var zero = t.leaf(Tensor::zeros({hidden_dim}));

    std::vector<CellState> memo(ast.nodes.size());
    // children first: walk ids from the back, since binarize emits parents
    // before their subtrees
    for (int id = static_cast<int>(ast.nodes.size()) - 1; id >= 0; --id) {
        const BinaryAstNode& n = ast.node(id);
        CellState l = n.left >= 0 ? memo[static_cast<std::size_t>(n.left)] : CellState{zero, zero};
        CellState r = n.right >= 0 ? memo[static_cast<std::size_t>(n.right)] : CellState{zero, zero};
        Var x = t.row(xs, id);
        Var i = t.sigmoid(tree_gate(pv, prefix + ".i", x, l.h, r.h));
        Var fl = t.sigmoid(tree_gate(pv, prefix + ".fl", x, l.h, r.h));
        Var fr = t.sigmoid(tree_gate(pv, prefix + ".fr", x, l.h, r.h));
        Var g = t.tanh(tree_gate(pv, prefix + ".g", x, l.h, r.h));
        Var o = t.sigmoid(tree_gate(pv, prefix + ".o", x, l.h, r.h));
        Var c = t.add(t.add(t.mul(i, g), t.mul(fl, l.c)), t.mul(fr, r.c));
        memo[static_cast<std::size_t>(id)] = {t.mul(o, t.tanh(c)), c};
    }

    std::vector<Var> states;
    std::vector<std::string> labels;
    states.reserve(ast.nodes.size());
    labels.reserve(ast.nodes.size());
    for (const auto& n : ast.nodes) {
        states.push_back(memo[static_cast<std::size_t>(n.id)].h);
        labels.push_back(n.label);
    }
    std::vector<std::uint8_t> mask(ast.nodes.size(), 1);
    return {t.stack_rows(states), memo[static_cast<std::size_t>(ast.root)].h, std::move(mask),
            std::move(labels)};
}

EncoderOutput encode_cfg(ParamVars& pv, const std::string& prefix, const Cfg& cfg,
                         const std::vector<int>& kind_ids, int hidden_dim, int rounds) {
    if (cfg.vertices.empty()) throw EmptyGraph();
    if (kind_ids.size() != cfg.vertices.size()) {
        throw ShapeMismatch("graph kind ids [" + std::to_string(kind_ids.size()) + "] vs vertices [" +
                            std::to_string(cfg.vertices.size()) + "]");
    }
    Tape& t = pv.tape();
    const int n = static_cast<int>(cfg.vertices.size());
    Var table = pv.at(prefix + ".embed");
    const int embed_dim = table.value().cols();
    if (embed_dim > hidden_dim) {
        throw ShapeMismatch("vertex embedding width " + std::to_string(embed_dim) +
                            " exceeds hidden size " + std::to_string(hidden_dim));
    }
    Var xs = t.embedding_lookup(table, kind_ids);

    // initial state: embedding zero-padded up to the hidden size
    Var pad;
    if (embed_dim < hidden_dim) pad = t.leaf(Tensor::zeros({hidden_dim - embed_dim}));
    std::vector<Var> h(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        Var x = t.row(xs, v);
        h[static_cast<std::size_t>(v)] = pad.valid() ? t.concat(x, pad) : x;
    }

    Var ones = t.leaf([hidden_dim] {
        Tensor o = Tensor::zeros({hidden_dim});
        for (int i = 0; i < hidden_dim; ++i) o.at(i) = 1.0;
        return o;
    }());
    Var zero = t.leaf(Tensor::zeros({hidden_dim}));

    for (int round = 0; round < rounds; ++round) {
        std::vector<Var> msg(static_cast<std::size_t>(n));
        for (const CfgEdge& e : cfg.edges) {
            std::string type = edge_type_name(e.type);
            Var fwd = t.matmul(pv.at(prefix + ".edge." + type), h[static_cast<std::size_t>(e.src)]);
            Var& into_dst = msg[static_cast<std::size_t>(e.dst)];
            into_dst = into_dst.valid() ? t.add(into_dst, fwd) : fwd;
            Var rev = t.matmul(pv.at(prefix + ".edge." + type + ".rev"),
                               h[static_cast<std::size_t>(e.dst)]);
            Var& into_src = msg[static_cast<std::size_t>(e.src)];
            into_src = into_src.valid() ? t.add(into_src, rev) : rev;
        }
        for (int v = 0; v < n; ++v) {
            Var m = msg[static_cast<std::size_t>(v)].valid() ? msg[static_cast<std::size_t>(v)] : zero;
            Var hv = h[static_cast<std::size_t>(v)];
            Var z = t.sigmoid(t.add(t.matmul(pv.at(prefix + ".gru.wz"), m),
                                    t.matmul(pv.at(prefix + ".gru.uz"), hv)));
            Var r = t.sigmoid(t.add(t.matmul(pv.at(prefix + ".gru.wr"), m),
                                    t.matmul(pv.at(prefix + ".gru.ur"), hv)));
            Var cand = t.tanh(t.add(t.matmul(pv.at(prefix + ".gru.wh"), m),
                                    t.matmul(pv.at(prefix + ".gru.uh"), t.mul(r, hv))));
            h[static_cast<std::size_t>(v)] = t.add(t.mul(t.sub(ones, z), hv), t.mul(z, cand));
        }
    }

    Var states = t.stack_rows(h);
    std::vector<std::string> labels;
    labels.reserve(cfg.vertices.size());
    for (const auto& v : cfg.vertices) labels.push_back(v.text.empty() ? v.kind : v.text);
    std::vector<std::uint8_t> mask(cfg.vertices.size(), 1);
    return {states, t.sum_rows(states), std::move(mask), std::move(labels)};
}

void create_lstm_params(ParameterSet& ps, const std::string& prefix, int vocab_size, int embed_dim,
                        int hidden_dim, std::uint64_t seed) {
    ps.create_uniform(prefix + ".embed", {vocab_size, embed_dim}, seed);
    for (const char* g : {"i", "f", "g", "o"}) {
        std::string base = prefix + "." + g;
        ps.create_uniform(base + ".w", {hidden_dim, embed_dim}, seed);
        ps.create_uniform(base + ".u", {hidden_dim, hidden_dim}, seed);
        ps.create_zeros(base + ".b", {hidden_dim});
    }
}

void create_tree_params(ParameterSet& ps, const std::string& prefix, int vocab_size, int embed_dim,
                        int hidden_dim, std::uint64_t seed) {
    ps.create_uniform(prefix + ".embed", {vocab_size, embed_dim}, seed);
    for (const char* g : {"i", "fl", "fr", "g", "o"}) {
        std::string base = prefix + "." + g;
        ps.create_uniform(base + ".w", {hidden_dim, embed_dim}, seed);
        ps.create_uniform(base + ".ul", {hidden_dim, hidden_dim}, seed);
        ps.create_uniform(base + ".ur", {hidden_dim, hidden_dim}, seed);
        ps.create_zeros(base + ".b", {hidden_dim});
    }
}

void create_ggnn_params(ParameterSet& ps, const std::string& prefix, int embed_dim, int hidden_dim,
                        std::uint64_t seed) {
    ps.create_uniform(prefix + ".embed", {kCfgKindCount, embed_dim}, seed);
    for (int i = 0; i < kEdgeTypeCount; ++i) {
        std::string type = edge_type_name(static_cast<EdgeType>(i));
        ps.create_uniform(prefix + ".edge." + type, {hidden_dim, hidden_dim}, seed);
        ps.create_uniform(prefix + ".edge." + type + ".rev", {hidden_dim, hidden_dim}, seed);
    }
    for (const char* g : {"wz", "uz", "wr", "ur", "wh", "uh"}) {
        ps.create_uniform(prefix + ".gru." + g, {hidden_dim, hidden_dim}, seed);
    }
}

}  // namespace mman
