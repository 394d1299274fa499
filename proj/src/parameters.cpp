#include "mman/parameters.hpp"

#include <cmath>
#include <stdexcept>

#include "mman/errors.hpp"
#include "mman/rng.hpp"

namespace mman {

Tensor& ParameterSet::create_uniform(const std::string& name, const std::vector<int>& shape,
                                     std::uint64_t run_seed) {
    if (slots_.count(name)) throw Error("duplicate parameter: " + name);
    Tensor value = Tensor::zeros(shape);
    Rng rng(derive_seed(run_seed, name));
    for (std::size_t i = 0; i < value.size(); ++i) value.data()[i] = rng.uniform(-0.1, 0.1);
    if (precision_ == Precision::f32) value.round_to_f32();
    Slot slot{std::move(value), Tensor::zeros(shape), Tensor::zeros(shape)};
    return slots_.emplace(name, std::move(slot)).first->second.value;
}

Tensor& ParameterSet::create_zeros(const std::string& name, const std::vector<int>& shape) {
    if (slots_.count(name)) throw Error("duplicate parameter: " + name);
    Slot slot{Tensor::zeros(shape), Tensor::zeros(shape), Tensor::zeros(shape)};
    return slots_.emplace(name, std::move(slot)).first->second.value;
}

Tensor& ParameterSet::at(const std::string& name) {
    auto it = slots_.find(name);
    if (it == slots_.end()) throw Error("unknown parameter: " + name);
    return it->second.value;
}

const Tensor& ParameterSet::at(const std::string& name) const {
    auto it = slots_.find(name);
    if (it == slots_.end()) throw Error("unknown parameter: " + name);
    return it->second.value;
}

const ParameterSet::Slot& ParameterSet::slot(const std::string& name) const {
    auto it = slots_.find(name);
    if (it == slots_.end()) throw Error("unknown parameter: " + name);
    return it->second;
}

void ParameterSet::install(const std::string& name, Slot s) {
    if (!s.value.same_shape(s.m) || !s.value.same_shape(s.v)) {
        throw ShapeMismatch("moment shapes for " + name + " disagree with the value");
    }
    slots_[name] = std::move(s);
}

std::vector<std::string> ParameterSet::names() const {
    std::vector<std::string> out;
    out.reserve(slots_.size());
    for (const auto& [name, slot] : slots_) out.push_back(name);
    return out;
}

std::size_t ParameterSet::total_values() const {
    std::size_t n = 0;
    for (const auto& [name, slot] : slots_) n += slot.value.size();
    return n;
}

void ParameterSet::adam_step(const std::map<std::string, Tensor>& grads, double lr) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    t_ += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));

    for (auto& [name, slot] : slots_) {
        auto git = grads.find(name);
        if (git == grads.end()) throw MissingGradient(name);
        const Tensor& g = git->second;
        if (!g.same_shape(slot.value)) {
            throw ShapeMismatch("gradient for " + name + " is " + g.shape_string() + ", parameter is " +
                                slot.value.shape_string());
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double gi = g.data()[i];
            slot.m.data()[i] = beta1 * slot.m.data()[i] + (1.0 - beta1) * gi;
            slot.v.data()[i] = beta2 * slot.v.data()[i] + (1.0 - beta2) * gi * gi;
            const double mhat = slot.m.data()[i] / bc1;
            const double vhat = slot.v.data()[i] / bc2;
            slot.value.data()[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
        if (precision_ == Precision::f32) {
            slot.value.round_to_f32();
            slot.m.round_to_f32();
            slot.v.round_to_f32();
        }
    }
}

double global_grad_norm(const std::map<std::string, Tensor>& grads) {
    double sq = 0.0;
    for (const auto& [name, g] : grads) {
        for (std::size_t i = 0; i < g.size(); ++i) sq += g.data()[i] * g.data()[i];
    }
    return std::sqrt(sq);
}

void clip_gradients(std::map<std::string, Tensor>& grads, double max_norm) {
    const double norm = global_grad_norm(grads);
    if (norm <= max_norm) return;
    const double k = max_norm / norm;
    for (auto& [name, g] : grads) {
        for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] *= k;
    }
}

}  // namespace mman
