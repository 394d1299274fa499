#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mman/model.hpp"

namespace mman {

struct IndexEntry {
    std::string id;
    Tensor vec;  // common-space snippet vector, unnormalized
};

// Flat store of snippet vectors, pinned to the checkpoint that produced them.
struct RetrievalIndex {
    int dim = 0;
    std::uint64_t checkpoint_hash = 0;
    std::vector<IndexEntry> entries;
};

struct IndexBuildStats {
    std::size_t indexed = 0;
    std::size_t failed = 0;
};

RetrievalIndex build_index(const Model& model, const std::vector<DatasetRecord>& records,
                           std::uint64_t checkpoint_hash, IndexBuildStats* stats = nullptr);

void save_index(const std::filesystem::path& path, const RetrievalIndex& index);
RetrievalIndex load_index(const std::filesystem::path& path);

double cosine_similarity(const Tensor& a, const Tensor& b);

struct SearchHit {
    std::string id;
    double score = 0.0;
};

// Exhaustive scan, descending score; equal scores order by ascending id.
std::vector<SearchHit> search(const RetrievalIndex& index, const Tensor& query_vec, std::size_t k);

// franks hold the 1-based rank of each query's ground truth.
double success_rate_at_k(const std::vector<int>& franks, int k);
double mean_reciprocal_rank(const std::vector<int>& franks);

struct EvalReport {
    std::size_t query_count = 0;
    std::vector<int> franks;
    double r1 = 0.0;
    double r5 = 0.0;
    double r10 = 0.0;
    double mrr = 0.0;

    std::string record_text() const;  // one machine-readable line
    std::string table_text() const;   // human-readable summary
};

// Ranks every query's own snippet among all indexed vectors.
EvalReport evaluate(const Model& model, const RetrievalIndex& index,
                    const std::vector<DatasetRecord>& queries);

}  // namespace mman
