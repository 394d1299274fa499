#include "mman/model.hpp"

#include "mman/errors.hpp"

namespace mman {

Model::Model(ModelConfig cfg, Vocabulary code_vocab, Vocabulary desc_vocab, Vocabulary ast_vocab)
    : cfg_(std::move(cfg)),
      code_vocab_(std::move(code_vocab)),
      desc_vocab_(std::move(desc_vocab)),
      ast_vocab_(std::move(ast_vocab)),
      params_(cfg_.precision) {
    validate_config(cfg_);
}

void Model::init_params() {
    params_ = ParameterSet(cfg_.precision);
    const std::uint64_t seed = cfg_.seed;
    if (cfg_.use_tok) {
        create_lstm_params(params_, "tok", code_vocab_.size(), cfg_.embed_dim, cfg_.hidden_dim, seed);
        if (cfg_.attention) create_attention_params(params_, "att.tok", cfg_.hidden_dim, seed);
    }
    if (cfg_.use_ast) {
        create_tree_params(params_, "ast", ast_vocab_.size(), cfg_.embed_dim, cfg_.hidden_dim, seed);
        if (cfg_.attention) create_attention_params(params_, "att.ast", cfg_.hidden_dim, seed);
    }
    if (cfg_.use_cfg) {
        create_ggnn_params(params_, "cfg", cfg_.embed_dim, cfg_.hidden_dim, seed);
        if (cfg_.attention) create_attention_params(params_, "att.cfg", cfg_.hidden_dim, seed);
    }
    create_lstm_params(params_, "des", desc_vocab_.size(), cfg_.embed_dim, cfg_.common_dim, seed);
    create_fusion_params(params_, cfg_.hidden_dim, cfg_.common_dim, seed);
}

EncoderOutput Model::encode_tok_view(ParamVars& pv, const DatasetRecord& record) const {
    std::vector<std::string> labels = record.name_tokens;
    labels.insert(labels.end(), record.body_tokens.begin(), record.body_tokens.end());
    return encode_tokens(pv, "tok", code_vocab_.map(labels), labels, cfg_.hidden_dim);
}

EncoderOutput Model::encode_ast_view(ParamVars& pv, const DatasetRecord& record) const {
    std::vector<std::string> labels;
    labels.reserve(record.ast.nodes.size());
    for (const auto& n : record.ast.nodes) labels.push_back(n.label);
    return encode_ast(pv, "ast", record.ast, ast_vocab_.map(labels), cfg_.hidden_dim);
}

EncoderOutput Model::encode_cfg_view(ParamVars& pv, const DatasetRecord& record) const {
    std::vector<int> kinds;
    kinds.reserve(record.cfg.vertices.size());
    for (const auto& v : record.cfg.vertices) kinds.push_back(cfg_kind_index(v.kind));
    return encode_cfg(pv, "cfg", record.cfg, kinds, cfg_.hidden_dim, cfg_.ggnn_rounds);
}

Var Model::embed_snippet(ParamVars& pv, const DatasetRecord& record, bool training, Rng& rng) const {
    Tape& t = pv.tape();
    auto attended = [&](const EncoderOutput& enc, const std::string& att_prefix,
                        bool sigmoid_gate) -> Var {
        Var vec;
        if (!cfg_.attention) {
            vec = enc.summary;
        } else if (sigmoid_gate) {
            vec = attend_sigmoid(pv, att_prefix, enc).attended;
        } else {
            vec = attend_softmax(pv, att_prefix, enc).attended;
        }
        return t.dropout(vec, cfg_.dropout, training, rng);
    };

    std::array<Var, 3> parts{};
    if (cfg_.use_tok) parts[0] = attended(encode_tok_view(pv, record), "att.tok", false);
    if (cfg_.use_ast) parts[1] = attended(encode_ast_view(pv, record), "att.ast", false);
    if (cfg_.use_cfg) parts[2] = attended(encode_cfg_view(pv, record), "att.cfg", true);
    return fuse_modalities(pv, parts, cfg_.hidden_dim);
}

Var Model::embed_description(ParamVars& pv, const std::vector<std::string>& tokens, bool training,
                             Rng& rng) const {
    EncoderOutput enc = encode_tokens(pv, "des", desc_vocab_.map(tokens), tokens, cfg_.common_dim);
    return pv.tape().dropout(enc.summary, cfg_.dropout, training, rng);
}

Tensor Model::snippet_vector(const DatasetRecord& record) const {
    Tape tape;
    ParamVars pv(tape, params_);
    Rng unused(0);
    return embed_snippet(pv, record, false, unused).value();
}

Tensor Model::description_vector(const std::vector<std::string>& tokens) const {
    Tape tape;
    ParamVars pv(tape, params_);
    Rng unused(0);
    return embed_description(pv, tokens, false, unused).value();
}

std::vector<AttentionEntry> Model::attention_report(const DatasetRecord& record) const {
    Tape tape;
    ParamVars pv(tape, params_);
    std::vector<AttentionEntry> out;

    auto emit = [&out](const std::string& modality, const EncoderOutput& enc, const Tensor& weights) {
        for (std::size_t i = 0; i < enc.labels.size(); ++i) {
            out.push_back({modality, enc.labels[i], weights.at(static_cast<int>(i))});
        }
    };
    auto one_hot = [](std::size_t n, int hot) {
        Tensor w = Tensor::zeros({static_cast<int>(n)});
        w.at(hot) = 1.0;
        return w;
    };

    if (cfg_.use_tok) {
        EncoderOutput enc = encode_tok_view(pv, record);
        if (cfg_.attention) {
            emit("tok", enc, attend_softmax(pv, "att.tok", enc).weights.value());
        } else {
            int last = -1;
            for (std::size_t i = 0; i < enc.mask.size(); ++i) {
                if (enc.mask[i]) last = static_cast<int>(i);
            }
            emit("tok", enc, one_hot(enc.labels.size(), last));
        }
    }
    if (cfg_.use_ast) {
        EncoderOutput enc = encode_ast_view(pv, record);
        if (cfg_.attention) {
            emit("ast", enc, attend_softmax(pv, "att.ast", enc).weights.value());
        } else {
            emit("ast", enc, one_hot(enc.labels.size(), record.ast.root));
        }
    }
    if (cfg_.use_cfg) {
        EncoderOutput enc = encode_cfg_view(pv, record);
        if (cfg_.attention) {
            emit("cfg", enc, attend_sigmoid(pv, "att.cfg", enc).weights.value());
        } else {
            Tensor w = Tensor::zeros({static_cast<int>(enc.labels.size())});
            for (int i = 0; i < w.dim(0); ++i) w.at(i) = 1.0;
            emit("cfg", enc, w);
        }
    }
    return out;
}

}  // namespace mman
