#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "mman/encoders.hpp"

namespace mman {

struct AttentionResult {
    Var attended;  // H, weighted sum of element states
    Var weights;   // n, per-element weights for reports
};

// Scores are the projected states dotted with a trainable context vector.
// Softmax normalizes over unmasked elements; sigmoid gates each element
// independently (no competition between vertices).
AttentionResult attend_softmax(ParamVars& pv, const std::string& prefix, const EncoderOutput& enc);
AttentionResult attend_sigmoid(ParamVars& pv, const std::string& prefix, const EncoderOutput& enc);

// Concatenates the three modality vectors in fixed (tok, ast, cfg) order and
// maps 3H to the common space. Invalid entries stand for disabled modalities
// and enter as zero blocks, so the fusion shape never changes.
Var fuse_modalities(ParamVars& pv, const std::array<Var, 3>& parts, int hidden_dim);

void create_attention_params(ParameterSet& ps, const std::string& prefix, int hidden_dim,
                             std::uint64_t seed);
void create_fusion_params(ParameterSet& ps, int hidden_dim, int common_dim, std::uint64_t seed);

}  // namespace mman
