#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mman/tensor.hpp"

namespace mman {

// Named trainable tensors with Adam moment buffers. Names are unique and the
// map keeps them sorted, which fixes the iteration order everywhere (updates,
// serialization, fingerprints).
class ParameterSet {
public:
    struct Slot {
        Tensor value;
        Tensor m;
        Tensor v;
    };

    ParameterSet() = default;
    explicit ParameterSet(Precision precision) : precision_(precision) {}

    Precision precision() const { return precision_; }
    void set_precision(Precision p) { precision_ = p; }

    // Fresh weight, uniform in [-0.1, 0.1] from a stream derived off the run
    // seed and the parameter name, so adding a parameter never shifts the
    // initialization of the others.
    Tensor& create_uniform(const std::string& name, const std::vector<int>& shape,
                           std::uint64_t run_seed);
    Tensor& create_zeros(const std::string& name, const std::vector<int>& shape);

    bool has(const std::string& name) const { return slots_.count(name) != 0; }
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    const Slot& slot(const std::string& name) const;

    // Checkpoint restore path: replaces any existing slot wholesale.
    void install(const std::string& name, Slot s);

    std::vector<std::string> names() const;
    std::size_t count() const { return slots_.size(); }
    std::size_t total_values() const;

    long long step() const { return t_; }
    void set_step(long long t) { t_ = t; }

    // One Adam update over every slot; a missing gradient is a wiring bug and
    // throws. lr is the raw step size, bias correction included.
    void adam_step(const std::map<std::string, Tensor>& grads, double lr);

private:
    std::map<std::string, Slot> slots_;
    long long t_ = 0;
    Precision precision_ = Precision::f64;
};

double global_grad_norm(const std::map<std::string, Tensor>& grads);

// Rescales all gradients in place when their global L2 norm exceeds max_norm.
void clip_gradients(std::map<std::string, Tensor>& grads, double max_norm);

}  // namespace mman
