#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "mman/model.hpp"

namespace mman {

// Hinge on the similarity gap: max(0, margin - sim_pos + sim_neg).
double ranking_loss(double sim_pos, double sim_neg, double margin);

constexpr double kGradClipNorm = 5.0;

struct Triple {
    std::size_t record;    // positive pair: record's code and description
    std::size_t negative;  // index of the record lending the distractor description
};

// One triple per record per epoch; distractors are uniform over the other
// records and the visit order is shuffled. Both draws come from streams
// derived off (seed, epoch), so any epoch can be regenerated in isolation.
std::vector<Triple> sample_triples(std::size_t count, std::uint64_t seed, std::uint64_t epoch);

struct EpochStats {
    int epoch = 0;          // zero-based
    double mean_loss = 0.0; // averaged over triples
    double seconds = 0.0;
};

struct TrainOptions {
    // Rolling checkpoint rewritten after every epoch; empty disables writing.
    std::filesystem::path checkpoint_path;
    std::function<void(const EpochStats&)> on_epoch;
};

// Runs epochs [start_epoch, config.epochs). Resuming from a checkpoint is
// exact: epoch streams depend only on (seed, epoch) and the optimizer state
// rides in the checkpoint.
std::vector<EpochStats> train_model(Model& model, const std::vector<DatasetRecord>& records,
                                    int start_epoch, const TrainOptions& options);

}  // namespace mman
