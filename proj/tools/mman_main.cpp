#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mman/commands.hpp"
#include "mman/errors.hpp"

namespace {

std::optional<std::filesystem::path> optional_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mman: multi-modal semantic retrieval over C functions"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    app.add_option("--seed", seed, "seed controlling every random draw")->capture_default_str();

    // extract ---------------------------------------------------------------
    std::string ex_corpus, ex_output;
    int ex_desc_cap = 30;
    auto* extract = app.add_subcommand("extract", "turn a corpus of functions into dataset records");
    extract->add_option("--corpus", ex_corpus, "corpus file, one {id, code, description} per line")
        ->required();
    extract->add_option("--output", ex_output, "dataset file to write")->required();
    extract->add_option("--desc-cap", ex_desc_cap, "description token cap")->capture_default_str();
    extract->callback([&] { mman::run_extract(ex_corpus, ex_output, ex_desc_cap, std::cout); });

    // split -----------------------------------------------------------------
    std::string sp_dataset, sp_train, sp_eval;
    double sp_fraction = 0.1;
    std::uint64_t sp_count = 0;
    auto* split = app.add_subcommand("split", "partition a dataset into train and eval files");
    split->add_option("--dataset", sp_dataset, "dataset file to split")->required();
    split->add_option("--train-output", sp_train, "training split to write")->required();
    split->add_option("--eval-output", sp_eval, "evaluation split to write")->required();
    split->add_option("--eval-fraction", sp_fraction, "share of records held out")
        ->capture_default_str();
    auto* sp_count_opt =
        split->add_option("--eval-count", sp_count, "exact held-out count (overrides the fraction)");
    split->callback([&] {
        std::optional<std::uint64_t> count;
        if (sp_count_opt->count() > 0) count = sp_count;
        mman::run_split(sp_dataset, sp_train, sp_eval, sp_fraction, count, seed, std::cout);
    });

    // train -----------------------------------------------------------------
    std::string tr_dataset, tr_model_dir, tr_config;
    bool tr_resume = false;
    int tr_epochs = 0, tr_batch = 0, tr_rounds = -1;
    double tr_lr = 0.0, tr_dropout = -1.0, tr_margin = 0.0;
    int tr_embed = 0, tr_hidden = 0, tr_common = 0;
    std::string tr_modalities, tr_precision;
    bool tr_no_attention = false;
    auto* train = app.add_subcommand("train", "train a model and write a rolling checkpoint");
    train->add_option("--dataset", tr_dataset, "training split")->required();
    train->add_option("--model-dir", tr_model_dir, "directory for checkpoint and vocabularies")
        ->required();
    train->add_option("--config", tr_config, "key=value config file");
    train->add_flag("--resume", tr_resume, "continue from the checkpoint in --model-dir");
    auto* o_epochs = train->add_option("--epochs", tr_epochs, "total epochs to reach");
    auto* o_batch = train->add_option("--batch-size", tr_batch, "triples per update");
    auto* o_lr = train->add_option("--learning-rate", tr_lr, "Adam step size");
    auto* o_dropout = train->add_option("--dropout", tr_dropout, "dropout probability");
    auto* o_margin = train->add_option("--margin", tr_margin, "ranking loss margin");
    auto* o_embed = train->add_option("--embed-dim", tr_embed, "embedding width");
    auto* o_hidden = train->add_option("--hidden-dim", tr_hidden, "encoder state width");
    auto* o_common = train->add_option("--common-dim", tr_common, "shared space width");
    auto* o_rounds = train->add_option("--ggnn-rounds", tr_rounds, "graph propagation rounds");
    auto* o_mod = train->add_option("--modalities", tr_modalities,
                                    "comma list from tok,ast,cfg (default all)");
    auto* o_prec = train->add_option("--precision", tr_precision, "f32 or f64 parameter storage");
    train->add_flag("--no-attention", tr_no_attention, "use plain summaries instead of attention");
    train->callback([&] {
        mman::ModelConfig cfg;
        if (!tr_config.empty()) cfg = mman::load_config(tr_config);
        if (app.count("--seed") > 0) cfg.seed = seed;
        if (o_epochs->count()) cfg.epochs = tr_epochs;
        if (o_batch->count()) cfg.batch_size = tr_batch;
        if (o_lr->count()) cfg.learning_rate = tr_lr;
        if (o_dropout->count()) cfg.dropout = tr_dropout;
        if (o_margin->count()) cfg.margin = tr_margin;
        if (o_embed->count()) cfg.embed_dim = tr_embed;
        if (o_hidden->count()) cfg.hidden_dim = tr_hidden;
        if (o_common->count()) cfg.common_dim = tr_common;
        if (o_rounds->count()) cfg.ggnn_rounds = tr_rounds;
        if (o_prec->count()) cfg.precision = mman::precision_from_string(tr_precision);
        if (o_mod->count()) {
            cfg.use_tok = cfg.use_ast = cfg.use_cfg = false;
            std::istringstream parts(tr_modalities);
            std::string part;
            while (std::getline(parts, part, ',')) {
                if (part == "tok") {
                    cfg.use_tok = true;
                } else if (part == "ast") {
                    cfg.use_ast = true;
                } else if (part == "cfg") {
                    cfg.use_cfg = true;
                } else if (!part.empty()) {
                    throw mman::Error("unknown modality: " + part);
                }
            }
        }
        if (tr_no_attention) cfg.attention = false;
        std::optional<int> epochs_override;
        if (tr_resume && o_epochs->count()) epochs_override = tr_epochs;
        mman::run_train(tr_dataset, tr_model_dir, cfg, tr_resume, epochs_override, std::cout);
    });

    // index -----------------------------------------------------------------
    std::string ix_dataset, ix_model_dir, ix_output;
    auto* index = app.add_subcommand("index", "embed every snippet and write a retrieval index");
    index->add_option("--dataset", ix_dataset, "dataset to index")->required();
    index->add_option("--model-dir", ix_model_dir, "trained model directory")->required();
    index->add_option("--output", ix_output, "index file to write")->required();
    index->callback([&] { mman::run_index(ix_dataset, ix_model_dir, ix_output, std::cout); });

    // search ----------------------------------------------------------------
    std::string se_model_dir, se_index, se_query, se_corpus;
    std::uint64_t se_k = 10;
    auto* search = app.add_subcommand("search", "rank indexed snippets against a text query");
    search->add_option("--model-dir", se_model_dir, "trained model directory")->required();
    search->add_option("--index", se_index, "retrieval index file")->required();
    search->add_option("--query", se_query, "natural-language query")->required();
    search->add_option("--top", se_k, "results to print")->capture_default_str();
    search->add_option("--corpus", se_corpus, "corpus file for source excerpts");
    search->callback([&] {
        mman::run_search(se_model_dir, se_index, se_query, se_k, optional_path(se_corpus),
                         std::cout);
    });

    // eval ------------------------------------------------------------------
    std::string ev_dataset, ev_model_dir, ev_index, ev_report;
    auto* eval = app.add_subcommand("eval", "score retrieval quality on a held-out split");
    eval->add_option("--dataset", ev_dataset, "evaluation split")->required();
    eval->add_option("--model-dir", ev_model_dir, "trained model directory")->required();
    eval->add_option("--index", ev_index, "retrieval index file")->required();
    eval->add_option("--report", ev_report, "report file to write");
    eval->callback([&] {
        mman::run_eval(ev_dataset, ev_model_dir, ev_index, optional_path(ev_report), std::cout);
    });

    // inspect-attention -----------------------------------------------------
    std::string ia_dataset, ia_model_dir, ia_record, ia_output;
    auto* inspect =
        app.add_subcommand("inspect-attention", "dump per-element attention weights for a record");
    inspect->add_option("--dataset", ia_dataset, "dataset holding the record")->required();
    inspect->add_option("--model-dir", ia_model_dir, "trained model directory")->required();
    inspect->add_option("--record", ia_record, "record id to inspect")->required();
    inspect->add_option("--output", ia_output, "report file (stdout when omitted)");
    inspect->callback([&] {
        mman::run_inspect_attention(ia_dataset, ia_model_dir, ia_record, optional_path(ia_output),
                                    std::cout);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const mman::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
