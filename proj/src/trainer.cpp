#include "mman/trainer.hpp"

#include <chrono>
#include <map>

#include "mman/checkpoint.hpp"
#include "mman/errors.hpp"

namespace mman {

double ranking_loss(double sim_pos, double sim_neg, double margin) {
    const double gap = margin - sim_pos + sim_neg;
    return gap > 0.0 ? gap : 0.0;
}

std::vector<Triple> sample_triples(std::size_t count, std::uint64_t seed, std::uint64_t epoch) {
    if (count < 2) throw CorpusTooSmall(count);
    Rng negatives(derive_seed(seed, "neg", epoch));
    std::vector<Triple> triples;
    triples.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        std::size_t other = negatives.index(count - 1);
        if (other >= r) ++other;  // uniform over everything but r itself
        triples.push_back({r, other});
    }
    Rng order(derive_seed(seed, "shuffle", epoch));
    order.shuffle(triples);
    return triples;
}

std::vector<EpochStats> train_model(Model& model, const std::vector<DatasetRecord>& records,
                                    int start_epoch, const TrainOptions& options) {
    if (records.size() < 2) throw CorpusTooSmall(records.size());
    const ModelConfig& cfg = model.config();
    const double margin = cfg.margin;
    const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);

    std::vector<EpochStats> history;
    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<Triple> triples =
            sample_triples(records.size(), cfg.seed, static_cast<std::uint64_t>(epoch));
        Rng dropout_rng(derive_seed(cfg.seed, "dropout", static_cast<std::uint64_t>(epoch)));

        double loss_total = 0.0;
        for (std::size_t begin = 0; begin < triples.size(); begin += batch_size) {
            const std::size_t end = std::min(begin + batch_size, triples.size());
            Tape tape;
            ParamVars pv(tape, model.params());
            Var margin_leaf = tape.leaf(Tensor::scalar(margin));

            // each description encodes once per batch, however many triples
            // reference it
            std::map<std::size_t, Var> desc_cache;
            auto description_of = [&](std::size_t index) {
                auto it = desc_cache.find(index);
                if (it != desc_cache.end()) return it->second;
                Var d = model.embed_description(pv, records[index].description_tokens, true,
                                                dropout_rng);
                desc_cache.emplace(index, d);
                return d;
            };

            Var batch_loss;
            for (std::size_t i = begin; i < end; ++i) {
                const Triple& tr = triples[i];
                Var snippet = model.embed_snippet(pv, records[tr.record], true, dropout_rng);
                Var pos = tape.cosine(snippet, description_of(tr.record));
                Var neg = tape.cosine(snippet, description_of(tr.negative));
                Var loss = tape.relu(tape.add(margin_leaf, tape.sub(neg, pos)));
                batch_loss = batch_loss.valid() ? tape.add(batch_loss, loss) : loss;
            }

            loss_total += batch_loss.value().item();
            tape.backward(batch_loss);
            auto grads = pv.collect_grads();
            clip_gradients(grads, kGradClipNorm);
            model.params().adam_step(grads, cfg.learning_rate);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = loss_total / static_cast<double>(triples.size());
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        history.push_back(stats);

        if (!options.checkpoint_path.empty()) {
            Checkpoint ckpt;
            ckpt.config_text = config_to_text(cfg);
            ckpt.epochs_done = static_cast<std::uint64_t>(epoch) + 1;
            ckpt.params = model.params();
            save_checkpoint(options.checkpoint_path, ckpt);
        }
        if (options.on_epoch) options.on_epoch(stats);
    }
    return history;
}

}  // namespace mman
