#include "mman/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mman/binio.hpp"
#include "mman/errors.hpp"

namespace mman {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

std::string fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

RetrievalIndex build_index(const Model& model, const std::vector<DatasetRecord>& records,
                           std::uint64_t checkpoint_hash, IndexBuildStats* stats) {
    RetrievalIndex index;
    index.dim = model.config().common_dim;
    index.checkpoint_hash = checkpoint_hash;
    for (const auto& record : records) {
        try {
            index.entries.push_back({record.id, model.snippet_vector(record)});
            if (stats) ++stats->indexed;
        } catch (const Error&) {
            if (stats) ++stats->failed;
        }
    }
    return index;
}

void save_index(const std::filesystem::path& path, const RetrievalIndex& index) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open index file for writing: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    put_u64(out, index.checkpoint_hash);
    put_u32(out, static_cast<std::uint32_t>(index.dim));
    put_u64(out, index.entries.size());
    for (const auto& entry : index.entries) {
        put_string(out, entry.id);
        if (entry.vec.rank() != 1 || entry.vec.dim(0) != index.dim) {
            throw Error("index entry " + entry.id + " has the wrong vector shape");
        }
        for (int i = 0; i < index.dim; ++i) put_f64(out, entry.vec.at(i));
    }
    if (!out) throw Error("failed writing index file: " + path.string());
}

RetrievalIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open index file: " + path.string());
    char magic[4] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
        throw Error(path.string() + " is not a retrieval index");
    }
    if (get_u32(in) != kVersion) throw Error("unsupported index version");
    RetrievalIndex index;
    index.checkpoint_hash = get_u64(in);
    index.dim = static_cast<int>(get_u32(in));
    if (index.dim < 1) throw Error("bad index dimension");
    const std::uint64_t count = get_u64(in);
    index.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        IndexEntry entry;
        entry.id = get_string(in);
        Tensor vec = Tensor::zeros({index.dim});
        for (int j = 0; j < index.dim; ++j) vec.at(j) = get_f64(in);
        entry.vec = std::move(vec);
        index.entries.push_back(std::move(entry));
    }
    return index;
}

double cosine_similarity(const Tensor& a, const Tensor& b) {
    if (a.rank() != 1 || !a.same_shape(b)) {
        throw ShapeMismatch("cosine between " + a.shape_string() + " and " + b.shape_string());
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < a.dim(0); ++i) {
        dot += a.at(i) * b.at(i);
        na += a.at(i) * a.at(i);
        nb += b.at(i) * b.at(i);
    }
    const double denom = std::sqrt(na) * std::sqrt(nb);
    return denom < 1e-12 ? 0.0 : dot / denom;
}

std::vector<SearchHit> search(const RetrievalIndex& index, const Tensor& query_vec, std::size_t k) {
    if (index.entries.empty()) throw EmptyIndex();
    std::vector<SearchHit> hits;
    hits.reserve(index.entries.size());
    for (const auto& entry : index.entries) {
        hits.push_back({entry.id, cosine_similarity(query_vec, entry.vec)});
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

double success_rate_at_k(const std::vector<int>& franks, int k) {
    if (franks.empty()) throw EmptyQuerySet();
    std::size_t hit = 0;
    for (int r : franks) {
        if (r <= k) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(franks.size());
}

double mean_reciprocal_rank(const std::vector<int>& franks) {
    if (franks.empty()) throw EmptyQuerySet();
    double total = 0.0;
    for (int r : franks) total += 1.0 / static_cast<double>(r);
    return total / static_cast<double>(franks.size());
}

EvalReport evaluate(const Model& model, const RetrievalIndex& index,
                    const std::vector<DatasetRecord>& queries) {
    if (queries.empty()) throw EmptyQuerySet();
    if (index.entries.empty()) throw EmptyIndex();

    EvalReport report;
    report.query_count = queries.size();
    for (const auto& query : queries) {
        const IndexEntry* own = nullptr;
        for (const auto& entry : index.entries) {
            if (entry.id == query.id) {
                own = &entry;
                break;
            }
        }
        if (!own) throw MissingGroundTruth(query.id);

        Tensor d = model.description_vector(query.description_tokens);
        const double own_score = cosine_similarity(d, own->vec);
        int rank = 1;
        for (const auto& entry : index.entries) {
            if (&entry == own) continue;
            const double score = cosine_similarity(d, entry.vec);
            if (score > own_score || (score == own_score && entry.id < own->id)) ++rank;
        }
        report.franks.push_back(rank);
    }
    report.r1 = success_rate_at_k(report.franks, 1);
    report.r5 = success_rate_at_k(report.franks, 5);
    report.r10 = success_rate_at_k(report.franks, 10);
    report.mrr = mean_reciprocal_rank(report.franks);
    return report;
}

std::string EvalReport::record_text() const {
    std::ostringstream out;
    out << "queries=" << query_count << " r1=" << fixed6(r1) << " r5=" << fixed6(r5)
        << " r10=" << fixed6(r10) << " mrr=" << fixed6(mrr);
    return out.str();
}

std::string EvalReport::table_text() const {
    std::ostringstream out;
    out << "queries        " << query_count << '\n';
    out << "SuccessRate@1  " << fixed6(r1) << '\n';
    out << "SuccessRate@5  " << fixed6(r5) << '\n';
    out << "SuccessRate@10 " << fixed6(r10) << '\n';
    out << "MRR            " << fixed6(mrr) << '\n';
    return out.str();
}

}  // namespace mman
