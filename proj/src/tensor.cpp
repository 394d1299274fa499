#include "mman/tensor.hpp"

#include <cmath>
#include <cstddef>

#include "mman/errors.hpp"

namespace mman {

std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string& s) {
    if (s == "f32") return Precision::f32;
    if (s == "f64") return Precision::f64;
    throw Error("unknown precision: " + s + " (expected f32 or f64)");
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::zeros(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeMismatch("tensor dimensions must be positive");
        n *= static_cast<std::size_t>(d);
    }
    return Tensor(shape, std::vector<double>(n, 0.0));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
    return Tensor({static_cast<int>(values.size())}, std::vector<double>(values));
}

Tensor Tensor::vector(const std::vector<double>& values) {
    return Tensor({static_cast<int>(values.size())}, values);
}

Tensor Tensor::matrix(int rows, int cols, const std::vector<double>& values) {
    if (values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ShapeMismatch("matrix literal has " + std::to_string(values.size()) + " values for [" +
                            std::to_string(rows) + " x " + std::to_string(cols) + "]");
    }
    return Tensor({rows, cols}, values);
}

double Tensor::item() const {
    if (!is_scalar()) throw ShapeMismatch("item() on non-scalar tensor " + shape_string());
    return data_[0];
}

std::string Tensor::shape_string() const {
    if (shape_.empty()) return "[scalar]";
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += " x ";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double Tensor::max_abs_diff(const Tensor& other) const {
    if (!same_shape(other)) {
        throw ShapeMismatch("max_abs_diff over " + shape_string() + " vs " + other.shape_string());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        m = std::max(m, std::fabs(data_[i] - other.data_[i]));
    }
    return m;
}

void Tensor::round_to_f32() {
    for (double& v : data_) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace mman
