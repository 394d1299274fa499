#include "mman/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"
#include "mman/checkpoint.hpp"
#include "mman/dataset.hpp"
#include "mman/description.hpp"
#include "mman/errors.hpp"
#include "mman/trainer.hpp"

namespace mman {

namespace {

namespace fs = std::filesystem;

std::string fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

fs::path checkpoint_path(const fs::path& model_dir) { return model_dir / "checkpoint.mman"; }

void verify_fingerprint(const RetrievalIndex& index, const fs::path& model_dir) {
    const std::uint64_t actual = hash_file(checkpoint_path(model_dir));
    if (index.checkpoint_hash != actual) {
        throw Error("index fingerprint does not match " + checkpoint_path(model_dir).string() +
                    "; rebuild the index against this checkpoint");
    }
}

Vocabulary build_vocab_from(const std::vector<std::vector<std::string>>& sequences, int cap) {
    return Vocabulary::build(sequences, static_cast<std::size_t>(cap));
}

}  // namespace

void run_extract(const fs::path& corpus, const fs::path& dataset_out, int desc_cap,
                 std::ostream& log) {
    std::vector<CorpusRecord> records = load_corpus(corpus);
    ExtractionStats stats;
    std::vector<DatasetRecord> dataset = extract_corpus(records, desc_cap, stats);
    save_dataset(dataset, dataset_out);
    log << "extracted " << stats.written << " of " << records.size() << " functions\n";
    log << "  parse failures   " << stats.parse_failures << '\n';
    log << "  unsupported      " << stats.unsupported << '\n';
    log << "  no description   " << stats.no_description << '\n';
    log << "  graph too large  " << stats.graph_too_large << '\n';
}

void run_split(const fs::path& dataset, const fs::path& train_out, const fs::path& eval_out,
               double eval_fraction, std::optional<std::uint64_t> eval_count, std::uint64_t seed,
               std::ostream& log) {
    std::vector<DatasetRecord> records = load_dataset(dataset);
    const std::size_t n = records.size();
    std::size_t eval_n = eval_count
                             ? static_cast<std::size_t>(*eval_count)
                             : static_cast<std::size_t>(std::llround(eval_fraction * static_cast<double>(n)));
    if (eval_n > n) eval_n = n;
    if (n - eval_n < 2) {
        throw Error("split leaves " + std::to_string(n - eval_n) +
                    " training records; at least 2 are required");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(order);

    std::vector<DatasetRecord> eval_records, train_records;
    eval_records.reserve(eval_n);
    train_records.reserve(n - eval_n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = i < eval_n ? eval_records : train_records;
        dst.push_back(std::move(records[order[i]]));
    }
    save_dataset(train_records, train_out);
    save_dataset(eval_records, eval_out);
    log << "split " << n << " records into " << train_records.size() << " train / "
        << eval_records.size() << " eval\n";
}

void run_train(const fs::path& dataset, const fs::path& model_dir, const ModelConfig& cfg_in,
               bool resume, std::optional<int> epochs_override, std::ostream& log) {
    std::vector<DatasetRecord> records = load_dataset(dataset);
    if (records.size() < 2) throw CorpusTooSmall(records.size());
    fs::create_directories(model_dir);

    ModelConfig cfg = cfg_in;
    int start_epoch = 0;
    ParameterSet restored;
    if (resume) {
        Checkpoint ckpt = load_checkpoint(checkpoint_path(model_dir));
        cfg = config_from_text(ckpt.config_text);
        start_epoch = static_cast<int>(ckpt.epochs_done);
        restored = std::move(ckpt.params);
    }
    if (epochs_override) cfg.epochs = *epochs_override;
    validate_config(cfg);

    Vocabulary code_vocab, desc_vocab, ast_vocab;
    if (resume) {
        code_vocab = Vocabulary::load(model_dir / "code.vocab");
        desc_vocab = Vocabulary::load(model_dir / "desc.vocab");
        ast_vocab = Vocabulary::load(model_dir / "ast.vocab");
    } else {
        std::vector<std::vector<std::string>> code_seqs, desc_seqs, ast_seqs;
        for (const auto& r : records) {
            std::vector<std::string> code = r.name_tokens;
            code.insert(code.end(), r.body_tokens.begin(), r.body_tokens.end());
            code_seqs.push_back(std::move(code));
            desc_seqs.push_back(r.description_tokens);
            std::vector<std::string> labels;
            labels.reserve(r.ast.nodes.size());
            for (const auto& node : r.ast.nodes) labels.push_back(node.label);
            ast_seqs.push_back(std::move(labels));
        }
        code_vocab = build_vocab_from(code_seqs, cfg.vocab_cap_code);
        desc_vocab = build_vocab_from(desc_seqs, cfg.vocab_cap_desc);
        ast_vocab = build_vocab_from(ast_seqs, cfg.vocab_cap_ast);
        code_vocab.save(model_dir / "code.vocab");
        desc_vocab.save(model_dir / "desc.vocab");
        ast_vocab.save(model_dir / "ast.vocab");
    }

    Model model(cfg, std::move(code_vocab), std::move(desc_vocab), std::move(ast_vocab));
    if (resume) {
        model.params() = std::move(restored);
    } else {
        model.init_params();
    }

    std::ofstream stats_log(model_dir / "train_stats.txt",
                            resume ? std::ios::app : std::ios::trunc);
    if (!stats_log) throw Error("cannot open training stats log in " + model_dir.string());

    TrainOptions options;
    options.checkpoint_path = checkpoint_path(model_dir);
    options.on_epoch = [&](const EpochStats& s) {
        stats_log << "epoch " << s.epoch << " mean_loss " << fixed6(s.mean_loss) << " seconds "
                  << fixed6(s.seconds) << '\n';
        stats_log.flush();
        log << "epoch " << s.epoch << "  mean loss " << fixed6(s.mean_loss) << "  ("
            << fixed6(s.seconds) << "s)\n";
    };

    auto history = train_model(model, records, start_epoch, options);
    if (history.empty()) {
        // nothing ran (already at the target epoch count); still leave a
        // usable checkpoint behind
        Checkpoint ckpt;
        ckpt.config_text = config_to_text(cfg);
        ckpt.epochs_done = static_cast<std::uint64_t>(start_epoch);
        ckpt.params = model.params();
        save_checkpoint(checkpoint_path(model_dir), ckpt);
    }
    log << "trained " << history.size() << " epoch(s); checkpoint at "
        << checkpoint_path(model_dir).string() << '\n';
}

LoadedModel load_model_dir(const fs::path& model_dir) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path(model_dir));
    ModelConfig cfg = config_from_text(ckpt.config_text);
    Model model(cfg, Vocabulary::load(model_dir / "code.vocab"),
                Vocabulary::load(model_dir / "desc.vocab"),
                Vocabulary::load(model_dir / "ast.vocab"));
    model.params() = std::move(ckpt.params);
    return {std::move(model), ckpt.epochs_done, hash_file(checkpoint_path(model_dir))};
}

void run_index(const fs::path& dataset, const fs::path& model_dir, const fs::path& index_out,
               std::ostream& log) {
    LoadedModel loaded = load_model_dir(model_dir);
    std::vector<DatasetRecord> records = load_dataset(dataset);
    IndexBuildStats stats;
    RetrievalIndex index = build_index(loaded.model, records, loaded.checkpoint_hash, &stats);
    save_index(index_out, index);
    log << "indexed " << stats.indexed << " snippet(s)";
    if (stats.failed) log << ", skipped " << stats.failed;
    log << '\n';
}

void run_search(const fs::path& model_dir, const fs::path& index_path, const std::string& query,
                std::size_t top_k, const std::optional<fs::path>& corpus, std::ostream& log) {
    LoadedModel loaded = load_model_dir(model_dir);
    RetrievalIndex index = load_index(index_path);
    verify_fingerprint(index, model_dir);

    std::vector<std::string> tokens;
    try {
        tokens = extract_description(query,
                                     static_cast<std::size_t>(loaded.model.config().desc_len_cap));
    } catch (const NoDescription&) {
        throw EmptyQuery();
    }

    std::map<std::string, std::string> excerpts;
    if (corpus) {
        for (const auto& r : load_corpus(*corpus)) {
            std::string line = r.code.substr(0, r.code.find('\n'));
            if (line.size() > 60) line = line.substr(0, 57) + "...";
            excerpts[r.id] = std::move(line);
        }
    }

    auto hits = search(index, loaded.model.description_vector(tokens), top_k);
    for (std::size_t i = 0; i < hits.size(); ++i) {
        log << (i + 1) << "  " << fixed6(hits[i].score) << "  " << hits[i].id;
        auto it = excerpts.find(hits[i].id);
        if (it != excerpts.end()) log << "  " << it->second;
        log << '\n';
    }
}

void run_eval(const fs::path& eval_dataset, const fs::path& model_dir, const fs::path& index_path,
              const std::optional<fs::path>& report_out, std::ostream& log) {
    LoadedModel loaded = load_model_dir(model_dir);
    RetrievalIndex index = load_index(index_path);
    verify_fingerprint(index, model_dir);

    std::vector<DatasetRecord> queries = load_dataset(eval_dataset);
    EvalReport report = evaluate(loaded.model, index, queries);
    log << report.table_text();
    if (report_out) {
        std::ofstream out(*report_out, std::ios::binary);
        if (!out) throw Error("cannot open report file for writing: " + report_out->string());
        out << report.record_text() << '\n' << report.table_text();
        if (!out) throw Error("failed writing report file: " + report_out->string());
    }
}

void run_inspect_attention(const fs::path& dataset, const fs::path& model_dir,
                           const std::string& record_id, const std::optional<fs::path>& report_out,
                           std::ostream& log) {
    LoadedModel loaded = load_model_dir(model_dir);
    std::vector<DatasetRecord> records = load_dataset(dataset);
    const DatasetRecord* record = nullptr;
    for (const auto& r : records) {
        if (r.id == record_id) {
            record = &r;
            break;
        }
    }
    if (!record) throw Error("record not found in dataset: " + record_id);

    std::ofstream file_out;
    if (report_out) {
        file_out.open(*report_out, std::ios::binary);
        if (!file_out) throw Error("cannot open report file for writing: " + report_out->string());
    }
    std::ostream& out = report_out ? static_cast<std::ostream&>(file_out) : log;
    for (const auto& entry : loaded.model.attention_report(*record)) {
        nlohmann::json j = {
            {"modality", entry.modality}, {"label", entry.label}, {"weight", entry.weight}};
        out << j.dump() << '\n';
    }
}

}  // namespace mman
