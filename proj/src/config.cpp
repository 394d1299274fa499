#include "mman/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "mman/errors.hpp"

namespace mman {

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string modalities_text(const ModelConfig& cfg) {
    std::vector<std::string> parts;
    if (cfg.use_tok) parts.push_back("tok");
    if (cfg.use_ast) parts.push_back("ast");
    if (cfg.use_cfg) parts.push_back("cfg");
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error("bad numeric value for " + key + ": " + value);
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error("bad integer value for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw Error("bad boolean value for " + key + ": " + value);
}

}  // namespace

void validate_config(const ModelConfig& cfg) {
    if (!cfg.any_modality()) throw NoModalityEnabled();
    if (cfg.margin <= 0.0) throw Error("margin must be positive");
    if (cfg.batch_size < 1) throw Error("batch_size must be at least 1");
    if (cfg.learning_rate <= 0.0) throw Error("learning_rate must be positive");
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) throw Error("dropout must lie in [0, 1)");
    if (cfg.epochs < 0) throw Error("epochs must be non-negative");
    if (cfg.embed_dim < 1 || cfg.hidden_dim < 1 || cfg.common_dim < 1) {
        throw Error("embedding, hidden, and common dimensions must be positive");
    }
    if (cfg.embed_dim > cfg.hidden_dim) {
        throw Error("embed_dim must not exceed hidden_dim (vertex states are zero-padded embeddings)");
    }
    if (cfg.ggnn_rounds < 0) throw Error("ggnn_rounds must be non-negative");
    if (cfg.vocab_cap_code < 3 || cfg.vocab_cap_desc < 3 || cfg.vocab_cap_ast < 3) {
        throw Error("vocabulary caps must leave room for at least one real token");
    }
    if (cfg.desc_len_cap < 1) throw Error("desc_len_cap must be positive");
}

std::string config_to_text(const ModelConfig& cfg) {
    std::ostringstream out;
    out << "margin=" << format_double(cfg.margin) << '\n';
    out << "batch_size=" << cfg.batch_size << '\n';
    out << "learning_rate=" << format_double(cfg.learning_rate) << '\n';
    out << "dropout=" << format_double(cfg.dropout) << '\n';
    out << "epochs=" << cfg.epochs << '\n';
    out << "seed=" << cfg.seed << '\n';
    out << "embed_dim=" << cfg.embed_dim << '\n';
    out << "hidden_dim=" << cfg.hidden_dim << '\n';
    out << "common_dim=" << cfg.common_dim << '\n';
    out << "ggnn_rounds=" << cfg.ggnn_rounds << '\n';
    out << "modalities=" << modalities_text(cfg) << '\n';
    out << "attention=" << (cfg.attention ? "true" : "false") << '\n';
    out << "vocab_cap_code=" << cfg.vocab_cap_code << '\n';
    out << "vocab_cap_desc=" << cfg.vocab_cap_desc << '\n';
    out << "vocab_cap_ast=" << cfg.vocab_cap_ast << '\n';
    out << "desc_len_cap=" << cfg.desc_len_cap << '\n';
    out << "precision=" << (cfg.precision == Precision::f32 ? "f32" : "f64") << '\n';
    return out.str();
}

ModelConfig config_from_text(const std::string& text) {
    ModelConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        if (line[start] == '#') continue;
        auto eq = line.find('=', start);
        if (eq == std::string::npos) {
            throw Error("config line " + std::to_string(line_no) + " is not key=value: " + line);
        }
        std::string key = line.substr(start, eq - start);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::size_t vstart = value.find_first_not_of(" \t");
        value = vstart == std::string::npos ? "" : value.substr(vstart);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();

        if (key == "margin") {
            cfg.margin = parse_double(key, value);
        } else if (key == "batch_size") {
            cfg.batch_size = static_cast<int>(parse_int(key, value));
        } else if (key == "learning_rate") {
            cfg.learning_rate = parse_double(key, value);
        } else if (key == "dropout") {
            cfg.dropout = parse_double(key, value);
        } else if (key == "epochs") {
            cfg.epochs = static_cast<int>(parse_int(key, value));
        } else if (key == "seed") {
            long long v = parse_int(key, value);
            if (v < 0) throw Error("seed must be non-negative");
            cfg.seed = static_cast<std::uint64_t>(v);
        } else if (key == "embed_dim") {
            cfg.embed_dim = static_cast<int>(parse_int(key, value));
        } else if (key == "hidden_dim") {
            cfg.hidden_dim = static_cast<int>(parse_int(key, value));
        } else if (key == "common_dim") {
            cfg.common_dim = static_cast<int>(parse_int(key, value));
        } else if (key == "ggnn_rounds") {
            cfg.ggnn_rounds = static_cast<int>(parse_int(key, value));
        } else if (key == "modalities") {
            cfg.use_tok = cfg.use_ast = cfg.use_cfg = false;
            std::istringstream parts(value);
            std::string part;
            while (std::getline(parts, part, ',')) {
                if (part == "tok") {
                    cfg.use_tok = true;
                } else if (part == "ast") {
                    cfg.use_ast = true;
                } else if (part == "cfg") {
                    cfg.use_cfg = true;
                } else if (!part.empty()) {
                    throw Error("unknown modality: " + part);
                }
            }
        } else if (key == "attention") {
            cfg.attention = parse_bool(key, value);
        } else if (key == "vocab_cap_code") {
            cfg.vocab_cap_code = static_cast<int>(parse_int(key, value));
        } else if (key == "vocab_cap_desc") {
            cfg.vocab_cap_desc = static_cast<int>(parse_int(key, value));
        } else if (key == "vocab_cap_ast") {
            cfg.vocab_cap_ast = static_cast<int>(parse_int(key, value));
        } else if (key == "desc_len_cap") {
            cfg.desc_len_cap = static_cast<int>(parse_int(key, value));
        } else if (key == "precision") {
            if (value == "f32") {
                cfg.precision = Precision::f32;
            } else if (value == "f64") {
                cfg.precision = Precision::f64;
            } else {
                throw Error("precision must be f32 or f64, got: " + value);
            }
        } else {
            throw Error("unknown config key: " + key);
        }
    }
    validate_config(cfg);
    return cfg;
}

void save_config(const ModelConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open config file for writing: " + path);
    out << config_to_text(cfg);
    if (!out) throw Error("failed writing config file: " + path);
}

ModelConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_text(buf.str());
}

}  // namespace mman
