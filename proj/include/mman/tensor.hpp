#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace mman {

// Storage precision for parameters and serialized artifacts. Arithmetic always
// runs in double; f32 means values are kept rounded to float after updates so
// checkpoints serialize losslessly at 4 bytes per element.
enum class Precision { f32, f64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

// Dense row-major tensor of rank 0..2.
class Tensor {
public:
    Tensor() = default;

    static Tensor scalar(double v);
    static Tensor zeros(const std::vector<int>& shape);
    static Tensor vector(std::initializer_list<double> values);
    static Tensor vector(const std::vector<double>& values);
    // row-major values, rows*cols entries
    static Tensor matrix(int rows, int cols, const std::vector<double>& values);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    std::size_t size() const { return data_.size(); }

    bool is_scalar() const { return shape_.empty(); }
    bool is_vector() const { return shape_.size() == 1; }
    bool is_matrix() const { return shape_.size() == 2; }
    int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
    int rows() const { return dim(0); }
    int cols() const { return dim(1); }

    double item() const;  // rank-0 access
    double& at(int i) { return data_[static_cast<std::size_t>(i)]; }
    double at(int i) const { return data_[static_cast<std::size_t>(i)]; }
    double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    std::string shape_string() const;

    bool all_finite() const;
    double max_abs_diff(const Tensor& other) const;

    // Round every element to the nearest float. Used to realize f32 storage
    // precision while keeping a single double-based compute path.
    void round_to_f32();

private:
    Tensor(std::vector<int> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {}

    std::vector<int> shape_;
    std::vector<double> data_;
};

}  // namespace mman
