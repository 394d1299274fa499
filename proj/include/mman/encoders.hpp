#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mman/binary_ast.hpp"
#include "mman/cfg.hpp"
#include "mman/parameters.hpp"
#include "mman/tape.hpp"

namespace mman {

// Lazily turns named parameters into tape leaves, one leaf per name per tape,
// so every use of a weight shares a single gradient accumulator.
class ParamVars {
public:
    ParamVars(Tape& tape, const ParameterSet& params) : tape_(&tape), params_(&params) {}

    Var at(const std::string& name);
    Tape& tape() { return *tape_; }
    const ParameterSet& params() const { return *params_; }

    // Gradients for every parameter in the set after backward(); parameters a
    // batch never touched get explicit zeros so the optimizer sees a full map.
    std::map<std::string, Tensor> collect_grads() const;

private:
    Tape* tape_;
    const ParameterSet* params_;
    std::map<std::string, Var> cache_;
};

// What every sequence/tree/graph encoder hands to attention and fusion.
struct EncoderOutput {
    Var states;                       // n x H, one row per element
    Var summary;                      // H
    std::vector<std::uint8_t> mask;   // 1 = real element, 0 = padding
    std::vector<std::string> labels;  // element names for attention reports
};

// Recurrent encoder over token ids. Pad ids (0) are masked: they leave the
// hidden state untouched and are excluded from attention. The summary is the
// hidden state after the last unmasked token.
EncoderOutput encode_tokens(ParamVars& pv, const std::string& prefix, const std::vector<int>& ids,
                            const std::vector<std::string>& labels, int hidden_dim);

// Bottom-up binary tree encoder with per-child forget gates; absent children
// contribute zero state. The summary is the root's hidden state.
EncoderOutput encode_ast(ParamVars& pv, const std::string& prefix, const BinaryAst& ast,
                         const std::vector<int>& node_ids, int hidden_dim);

// Gated graph encoder: vertex states start as zero-padded kind embeddings and
// exchange messages along typed edges (plus derived reverse edges) for a fixed
// number of rounds. The summary is the sum of final vertex states.
EncoderOutput encode_cfg(ParamVars& pv, const std::string& prefix, const Cfg& cfg,
                         const std::vector<int>& kind_ids, int hidden_dim, int rounds);

// Fixed statement-kind vocabulary for graph vertices; no file involved.
constexpr int kCfgKindCount = 8;
int cfg_kind_index(const std::string& kind);

// Parameter families. Creation is name-seeded, so the call order never
// matters.
void create_lstm_params(ParameterSet& ps, const std::string& prefix, int vocab_size, int embed_dim,
                        int hidden_dim, std::uint64_t seed);
void create_tree_params(ParameterSet& ps, const std::string& prefix, int vocab_size, int embed_dim,
                        int hidden_dim, std::uint64_t seed);
void create_ggnn_params(ParameterSet& ps, const std::string& prefix, int embed_dim, int hidden_dim,
                        std::uint64_t seed);

}  // namespace mman
