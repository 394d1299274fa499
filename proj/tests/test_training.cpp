#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <unistd.h>

#include "doctest.h"
#include "mman/checkpoint.hpp"
#include "mman/commands.hpp"
#include "mman/errors.hpp"
#include "mman/trainer.hpp"
#include "support/synthetic_corpus.hpp"

using namespace mman;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("mman-train-" + std::to_string(static_cast<long long>(::getpid())));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.embed_dim = 4;
    cfg.hidden_dim = 6;
    cfg.common_dim = 6;
    cfg.ggnn_rounds = 1;
    cfg.batch_size = 2;
    cfg.epochs = 2;
    cfg.dropout = 0.0;
    cfg.seed = 42;
    return cfg;
}

std::vector<DatasetRecord> tiny_records(std::size_t count) {
    std::vector<CorpusRecord> corpus = mman::test::synthetic_corpus();
    std::vector<DatasetRecord> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(extract_record(corpus[i], 30));
    return out;
}

Model make_model(const ModelConfig& cfg, const std::vector<DatasetRecord>& records) {
    std::vector<std::vector<std::string>> code_seqs, desc_seqs, ast_seqs;
    for (const auto& r : records) {
        std::vector<std::string> code = r.name_tokens;
        code.insert(code.end(), r.body_tokens.begin(), r.body_tokens.end());
        code_seqs.push_back(std::move(code));
        desc_seqs.push_back(r.description_tokens);
        std::vector<std::string> labels;
        for (const auto& node : r.ast.nodes) labels.push_back(node.label);
        ast_seqs.push_back(std::move(labels));
    }
    Model model(cfg, Vocabulary::build(code_seqs, 1000), Vocabulary::build(desc_seqs, 1000),
                Vocabulary::build(ast_seqs, 1000));
    model.init_params();
    return model;
}

double param_distance(const ParameterSet& a, const ParameterSet& b) {
    double worst = 0.0;
    for (const auto& name : a.names()) worst = std::max(worst, a.at(name).max_abs_diff(b.at(name)));
    return worst;
}

}  // namespace

TEST_CASE("hinge loss matches the closed form on a value grid") {
    const double sims[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (double margin : {0.01, 0.05, 0.2}) {
        for (double pos : sims) {
            for (double neg : sims) {
                double expect = std::max(0.0, margin - pos + neg);
                CHECK(ranking_loss(pos, neg, margin) == expect);
            }
        }
    }
}

TEST_CASE("the loss gradient vanishes exactly when the ranking is satisfied") {
    auto grads_for = [](double pos_scale) {
        Tape tape;
        Var query = tape.leaf(Tensor::vector({1.0, 0.0, 0.5}));
        Var good = tape.leaf(Tensor::vector({pos_scale, 0.1, 0.4}));
        Var bad = tape.leaf(Tensor::vector({0.8, 0.6, -0.2}));
        Var margin = tape.leaf(Tensor::scalar(0.05));
        Var loss = tape.relu(
            tape.add(margin, tape.sub(tape.cosine(bad, query), tape.cosine(good, query))));
        tape.backward(loss);
        auto max_abs = [&](Var v) {
            if (!tape.has_grad(v)) return 0.0;
            const Tensor& g = tape.grad(v);
            double m = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) m = std::max(m, std::abs(g.data()[i]));
            return m;
        };
        return std::make_tuple(loss.value().item(), max_abs(query), max_abs(good), max_abs(bad));
    };

    auto [loss_ok, gq, gg, gb] = grads_for(1.0);  // good nearly parallel to query
    CHECK(loss_ok == 0.0);
    CHECK(gq == 0.0);
    CHECK(gg == 0.0);
    CHECK(gb == 0.0);

    auto [loss_bad, hq, hg, hb] = grads_for(-1.0);  // good now points away
    CHECK(loss_bad > 0.0);
    CHECK(hq > 0.0);
    CHECK(hg > 0.0);
    CHECK(hb > 0.0);
}

TEST_CASE("triple sampling permutes the records and never pairs a record with itself") {
    for (std::size_t count : {2u, 5u, 9u}) {
        for (std::uint64_t epoch : {0u, 1u, 7u}) {
            auto triples = sample_triples(count, 42, epoch);
            REQUIRE(triples.size() == count);
            std::set<std::size_t> seen;
            for (const auto& t : triples) {
                CHECK(t.record < count);
                CHECK(t.negative < count);
                CHECK(t.negative != t.record);
                seen.insert(t.record);
            }
            CHECK(seen.size() == count);

            auto again = sample_triples(count, 42, epoch);
            for (std::size_t i = 0; i < count; ++i) {
                CHECK(again[i].record == triples[i].record);
                CHECK(again[i].negative == triples[i].negative);
            }
        }
    }
}

TEST_CASE("different epochs draw different shuffles and distractors") {
    auto key = [](const std::vector<Triple>& ts) {
        std::string s;
        for (const auto& t : ts) {
            s += std::to_string(t.record) + ':' + std::to_string(t.negative) + ',';
        }
        return s;
    };
    std::set<std::string> keys;
    for (std::uint64_t epoch = 0; epoch < 4; ++epoch) keys.insert(key(sample_triples(9, 42, epoch)));
    CHECK(keys.size() == 4);

    // over many epochs every (record, distractor) pairing shows up
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (std::uint64_t epoch = 0; epoch < 300; ++epoch) {
        for (const auto& t : sample_triples(6, 42, epoch)) pairs.insert({t.record, t.negative});
    }
    CHECK(pairs.size() == 30);
}

TEST_CASE("sampling requires at least two records") {
    CHECK_THROWS_AS(sample_triples(0, 42, 0), Error);
    CHECK_THROWS_AS(sample_triples(1, 42, 0), Error);
}

TEST_CASE("a short run leaves finite losses, moved parameters, and a checkpoint") {
    auto records = tiny_records(4);
    ModelConfig cfg = tiny_config();
    Model model = make_model(cfg, records);
    ParameterSet before = model.params();

    fs::path ckpt_path = scratch_dir() / "smoke.ckpt";
    TrainOptions options;
    options.checkpoint_path = ckpt_path;
    std::vector<int> seen_epochs;
    options.on_epoch = [&](const EpochStats& s) { seen_epochs.push_back(s.epoch); };

    auto history = train_model(model, records, 0, options);
    REQUIRE(history.size() == 2);
    CHECK(seen_epochs == std::vector<int>{0, 1});
    for (const auto& s : history) {
        CHECK(std::isfinite(s.mean_loss));
        CHECK(s.mean_loss >= 0.0);
        CHECK(s.seconds >= 0.0);
    }
    CHECK(param_distance(before, model.params()) > 0.0);

    Checkpoint ckpt = load_checkpoint(ckpt_path);
    CHECK(ckpt.epochs_done == 2);
    CHECK(ckpt.config_text == config_to_text(cfg));
    CHECK(param_distance(ckpt.params, model.params()) == 0.0);
}

TEST_CASE("resuming reproduces the straight-through run bit for bit") {
    auto records = tiny_records(4);

    ModelConfig full_cfg = tiny_config();
    full_cfg.epochs = 3;
    Model full = make_model(full_cfg, records);
    fs::path full_path = scratch_dir() / "straight.ckpt";
    TrainOptions full_opts;
    full_opts.checkpoint_path = full_path;
    train_model(full, records, 0, full_opts);

    ModelConfig part_cfg = tiny_config();
    part_cfg.epochs = 2;
    Model part = make_model(part_cfg, records);
    fs::path part_path = scratch_dir() / "resumed.ckpt";
    TrainOptions part_opts;
    part_opts.checkpoint_path = part_path;
    train_model(part, records, 0, part_opts);

    // pick the run back up the way the CLI does: config and optimizer state
    // come out of the checkpoint, only the epoch target moves
    Checkpoint ckpt = load_checkpoint(part_path);
    ModelConfig resumed_cfg = config_from_text(ckpt.config_text);
    CHECK(ckpt.epochs_done == 2);
    resumed_cfg.epochs = 3;
    Model resumed = make_model(resumed_cfg, records);
    resumed.params() = std::move(ckpt.params);
    train_model(resumed, records, static_cast<int>(ckpt.epochs_done), part_opts);

    CHECK(hash_file(full_path) == hash_file(part_path));
}
