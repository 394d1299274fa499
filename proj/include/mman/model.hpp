#pragma once

#include <string>
#include <vector>

#include "mman/attention.hpp"
#include "mman/config.hpp"
#include "mman/dataset.hpp"
#include "mman/encoders.hpp"
#include "mman/vocab.hpp"

namespace mman {

struct AttentionEntry {
    std::string modality;  // tok, ast, cfg
    std::string label;
    double weight = 0.0;
};

// The full retrieval model: per-modality encoders, attention, fusion into the
// common space, and the description encoder that shares that space.
class Model {
public:
    Model(ModelConfig cfg, Vocabulary code_vocab, Vocabulary desc_vocab, Vocabulary ast_vocab);

    // Fresh parameters for every enabled component, seeded from the config.
    void init_params();

    const ModelConfig& config() const { return cfg_; }
    ParameterSet& params() { return params_; }
    const ParameterSet& params() const { return params_; }
    const Vocabulary& code_vocab() const { return code_vocab_; }
    const Vocabulary& desc_vocab() const { return desc_vocab_; }
    const Vocabulary& ast_vocab() const { return ast_vocab_; }

    // Common-space vector of one snippet, built on the caller's tape. Dropout
    // draws from rng only when training.
    Var embed_snippet(ParamVars& pv, const DatasetRecord& record, bool training, Rng& rng) const;
    Var embed_description(ParamVars& pv, const std::vector<std::string>& tokens, bool training,
                          Rng& rng) const;

    // Inference conveniences running on a private tape with dropout off.
    Tensor snippet_vector(const DatasetRecord& record) const;
    Tensor description_vector(const std::vector<std::string>& tokens) const;

    // Per-element attention weights for one record. Without attention the
    // implicit weights are reported: one-hot on each summary element for
    // sequences and trees, all-ones for the vertex sum.
    std::vector<AttentionEntry> attention_report(const DatasetRecord& record) const;

private:
    EncoderOutput encode_tok_view(ParamVars& pv, const DatasetRecord& record) const;
    EncoderOutput encode_ast_view(ParamVars& pv, const DatasetRecord& record) const;
    EncoderOutput encode_cfg_view(ParamVars& pv, const DatasetRecord& record) const;

    ModelConfig cfg_;
    Vocabulary code_vocab_;
    Vocabulary desc_vocab_;
    Vocabulary ast_vocab_;
    ParameterSet params_;
};

}  // namespace mman
