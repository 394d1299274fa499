#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mman/binary_ast.hpp"
#include "mman/cfg.hpp"

namespace mman {

// Raw input pair: one C function and its leading doc comment.
struct CorpusRecord {
    std::string id;
    std::string code;
    std::string description;
};

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);
void save_corpus(const std::vector<CorpusRecord>& records, const std::filesystem::path& path);

// One extracted function: the three code views plus the description tokens.
struct DatasetRecord {
    std::string id;
    std::vector<std::string> name_tokens;
    std::vector<std::string> body_tokens;
    std::vector<std::string> description_tokens;
    BinaryAst ast;
    Cfg cfg;
};

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);

struct ExtractionStats {
    std::size_t written = 0;
    std::size_t parse_failures = 0;
    std::size_t unsupported = 0;
    std::size_t no_description = 0;
    std::size_t graph_too_large = 0;
};

// Parse, tokenize, binarize, and build the simplified flow graph for one
// function. Throws; extract_corpus is the skip-and-count wrapper.
DatasetRecord extract_record(const CorpusRecord& record, int desc_cap);

std::vector<DatasetRecord> extract_corpus(const std::vector<CorpusRecord>& corpus, int desc_cap,
                                          ExtractionStats& stats);

}  // namespace mman
