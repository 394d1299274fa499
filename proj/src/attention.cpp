#include "mman/attention.hpp"

#include "mman/errors.hpp"

namespace mman {

namespace {

Var raw_scores(ParamVars& pv, const std::string& prefix, const EncoderOutput& enc) {
    Tape& t = pv.tape();
    Var projected = t.matmul(enc.states, pv.at(prefix + ".proj"));
    return t.matmul(projected, pv.at(prefix + ".ctx"));
}

}  // namespace

AttentionResult attend_softmax(ParamVars& pv, const std::string& prefix, const EncoderOutput& enc) {
    Tape& t = pv.tape();
    Var weights = t.masked_softmax(raw_scores(pv, prefix, enc), enc.mask);
    return {t.matmul(weights, enc.states), weights};
}

AttentionResult attend_sigmoid(ParamVars& pv, const std::string& prefix, const EncoderOutput& enc) {
    Tape& t = pv.tape();
    Var weights = t.sigmoid(raw_scores(pv, prefix, enc));
    bool all_real = true;
    for (auto m : enc.mask) {
        if (!m) { all_real = false; break; }
    }
    if (!all_real) {
        Tensor keep = Tensor::zeros({static_cast<int>(enc.mask.size())});
        for (std::size_t i = 0; i < enc.mask.size(); ++i) keep.at(static_cast<int>(i)) = enc.mask[i];
        weights = t.mul(weights, t.leaf(std::move(keep)));
    }
    return {t.matmul(weights, enc.states), weights};
}

Var fuse_modalities(ParamVars& pv, const std::array<Var, 3>& parts, int hidden_dim) {
    Tape& t = pv.tape();
    Var zero;
    auto pick = [&](Var part) {
        if (part.valid()) return part;
        if (!zero.valid()) zero = t.leaf(Tensor::zeros({hidden_dim}));
        return zero;
    };
    Var cat = t.concat(t.concat(pick(parts[0]), pick(parts[1])), pick(parts[2]));
    return t.matmul(pv.at("fuse.w"), cat);
}

void create_attention_params(ParameterSet& ps, const std::string& prefix, int hidden_dim,
                             std::uint64_t seed) {
    ps.create_uniform(prefix + ".proj", {hidden_dim, hidden_dim}, seed);
    ps.create_uniform(prefix + ".ctx", {hidden_dim}, seed);
}

void create_fusion_params(ParameterSet& ps, int hidden_dim, int common_dim, std::uint64_t seed) {
    ps.create_uniform("fuse.w", {common_dim, 3 * hidden_dim}, seed);
}

}  // namespace mman
