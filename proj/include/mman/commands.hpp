#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "mman/config.hpp"
#include "mman/model.hpp"
#include "mman/retrieval.hpp"

namespace mman {

// Implementation behind the command-line verbs. Everything throws Error (or a
// subclass) on data problems; the front end maps exceptions to exit codes.

void run_extract(const std::filesystem::path& corpus, const std::filesystem::path& dataset_out,
                 int desc_cap, std::ostream& log);

void run_split(const std::filesystem::path& dataset, const std::filesystem::path& train_out,
               const std::filesystem::path& eval_out, double eval_fraction,
               std::optional<std::uint64_t> eval_count, std::uint64_t seed, std::ostream& log);

// Fresh runs build the vocabularies from the given dataset and write them next
// to the rolling checkpoint; --resume picks everything up from model_dir and
// continues at the recorded epoch.
void run_train(const std::filesystem::path& dataset, const std::filesystem::path& model_dir,
               const ModelConfig& cfg, bool resume, std::optional<int> epochs_override,
               std::ostream& log);

void run_index(const std::filesystem::path& dataset, const std::filesystem::path& model_dir,
               const std::filesystem::path& index_out, std::ostream& log);

void run_search(const std::filesystem::path& model_dir, const std::filesystem::path& index_path,
                const std::string& query, std::size_t top_k,
                const std::optional<std::filesystem::path>& corpus, std::ostream& log);

void run_eval(const std::filesystem::path& eval_dataset, const std::filesystem::path& model_dir,
              const std::filesystem::path& index_path,
              const std::optional<std::filesystem::path>& report_out, std::ostream& log);

void run_inspect_attention(const std::filesystem::path& dataset,
                           const std::filesystem::path& model_dir, const std::string& record_id,
                           const std::optional<std::filesystem::path>& report_out,
                           std::ostream& log);

// Loads checkpoint plus vocabularies from a model directory.
struct LoadedModel {
    Model model;
    std::uint64_t epochs_done;
    std::uint64_t checkpoint_hash;
};
LoadedModel load_model_dir(const std::filesystem::path& model_dir);

}  // namespace mman
