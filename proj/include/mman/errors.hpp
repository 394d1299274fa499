#pragma once

#include <stdexcept>
#include <string>

namespace mman {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// frontend
struct ParseError : Error {
    int line;
    int column;
    ParseError(const std::string& msg, int line_, int column_)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(column_) + ": " + msg),
          line(line_), column(column_) {}
};

struct NoDescription : Error {
    NoDescription() : Error("no description text after stripping comment markers") {}
};

// modalities
struct UnsupportedConstruct : Error {
    explicit UnsupportedConstruct(const std::string& what) : Error("unsupported construct: " + what) {}
};

struct TooLarge : Error {
    explicit TooLarge(std::size_t vertices)
        : Error("control-flow graph has " + std::to_string(vertices) + " vertices, limit is 512") {}
};

// tensor core
struct ShapeMismatch : Error {
    using Error::Error;
};

struct NotScalar : Error {
    NotScalar() : Error("backward requires a scalar (rank-0) loss") {}
};

struct MissingGradient : Error {
    explicit MissingGradient(const std::string& name) : Error("no gradient entry for parameter: " + name) {}
};

// encoders
struct EmptySequence : Error {
    EmptySequence() : Error("cannot encode an empty sequence") {}
};

struct EmptyTree : Error {
    EmptyTree() : Error("cannot encode an empty tree") {}
};

struct EmptyGraph : Error {
    EmptyGraph() : Error("cannot encode an empty graph") {}
};

// fusion
struct AllMasked : Error {
    AllMasked() : Error("softmax over a fully masked set") {}
};

struct NoModalityEnabled : Error {
    NoModalityEnabled() : Error("model config enables no modality") {}
};

// training
struct CorpusTooSmall : Error {
    explicit CorpusTooSmall(std::size_t n)
        : Error("triple sampling needs at least 2 records, corpus has " + std::to_string(n)) {}
};

// retrieval
struct EmptyQuery : Error {
    EmptyQuery() : Error("query is empty after tokenization") {}
};

struct EmptyIndex : Error {
    EmptyIndex() : Error("retrieval index is empty") {}
};

struct EmptyQuerySet : Error {
    EmptyQuerySet() : Error("metric over an empty query set") {}
};

struct MissingGroundTruth : Error {
    explicit MissingGroundTruth(const std::string& id)
        : Error("ground-truth snippet not present in index: " + id) {}
};

}  // namespace mman
