#pragma once

#include <cstdint>
#include <string>

#include "mman/tensor.hpp"

namespace mman {

// Hyperparameters and switches for one training run. Serializes to a flat
// key=value text block that is also embedded verbatim in checkpoints.
struct ModelConfig {
    double margin = 0.05;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double dropout = 0.1;
    int epochs = 100;
    std::uint64_t seed = 42;
    int embed_dim = 32;
    int hidden_dim = 64;
    int common_dim = 64;
    int ggnn_rounds = 3;
    bool use_tok = true;
    bool use_ast = true;
    bool use_cfg = true;
    bool attention = true;
    int vocab_cap_code = 20000;
    int vocab_cap_desc = 10000;
    int vocab_cap_ast = 50000;
    int desc_len_cap = 30;
    Precision precision = Precision::f32;

    bool any_modality() const { return use_tok || use_ast || use_cfg; }
};

// Throws Error on out-of-range values and NoModalityEnabled when every
// modality switch is off.
void validate_config(const ModelConfig& cfg);

std::string config_to_text(const ModelConfig& cfg);
ModelConfig config_from_text(const std::string& text);

void save_config(const ModelConfig& cfg, const std::string& path);
ModelConfig load_config(const std::string& path);

}  // namespace mman
