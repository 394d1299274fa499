#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mman/rng.hpp"
#include "mman/tensor.hpp"

namespace mman {

class Tape;

// Handle to a value recorded on a tape.
class Var {
public:
    Var() = default;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    bool valid() const { return tape_ != nullptr; }
    int id() const { return id_; }
    Tape* tape() const { return tape_; }
    const Tensor& value() const;

private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Reverse-mode autodiff tape. Primitives are recorded in execution order,
// which is a topological order by construction; backward() walks it once in
// reverse. Gradient buffers are allocated lazily so nodes that the loss never
// reaches are skipped.
class Tape {
public:
    Var leaf(Tensor value);

    // --- primitives ---------------------------------------------------
    // matmul accepts (m x k)(k x n) -> (m x n), (m x k)(k) -> (m),
    // and (k)(k x n) -> (n).
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);  // elementwise
    Var scale(Var a, double k);
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var relu(Var a);
    Var concat(Var a, Var b);  // vectors
    // softmax over unmasked positions; masked outputs are exactly 0
    Var masked_softmax(Var scores, const std::vector<std::uint8_t>& mask);
    // rows of `table` (V x E) gathered by index -> (n x E)
    Var embedding_lookup(Var table, const std::vector<int>& ids);
    Var row(Var m, int r);  // one matrix row as a vector
    Var sum_rows(Var m);   // (n x H) -> (H)
    Var sum_all(Var a);    // -> scalar
    Var stack_rows(const std::vector<Var>& rows);  // n vectors (H) -> (n x H)
    // inverted dropout: identity when training=false, kept values scaled by
    // 1/(1-p) otherwise
    Var dropout(Var a, double p, bool training, Rng& rng);
    Var cosine(Var a, Var b);  // vectors -> scalar

    // --- reverse pass --------------------------------------------------
    void backward(Var loss);
    const Tensor& grad(Var v) const;
    bool has_grad(Var v) const;

    const Tensor& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    std::size_t size() const { return nodes_.size(); }
    void clear();

private:
    struct Node {
        Tensor value;
        std::function<void()> backward;  // empty for leaves
    };

    int push(Tensor value, std::function<void()> back = {});
    Tensor& grad_buf(int id);

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;          // parallel to nodes_
    std::vector<std::uint8_t> touched_;  // grad buffer initialized?
};

}  // namespace mman
