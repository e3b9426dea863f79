#pragma once

#include "azsc/rng.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace azsc {

/// Dense n-dimensional array of doubles, row-major. Tensors are plain values:
/// operations never mutate their inputs.
class Tensor {
public:
    Tensor() = default; // empty placeholder, numel() == 0

    explicit Tensor(std::vector<size_t> shape);
    Tensor(std::vector<size_t> shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor zeros(std::vector<size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<size_t> shape, double v);
    static Tensor uniform(std::vector<size_t> shape, double lo, double hi, Rng& rng);

    const std::vector<size_t>& shape() const { return shape_; }
    size_t rank() const { return shape_.size(); }
    size_t dim(size_t i) const { return shape_[i]; }
    size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    // 2-d accessors (rank must be 2)
    size_t rows() const { return shape_[0]; }
    size_t cols() const { return shape_[1]; }
    double& at(size_t r, size_t c) { return data_[r * shape_[1] + c]; }
    double at(size_t r, size_t c) const { return data_[r * shape_[1] + c]; }

    /// Value of a single-element tensor.
    double item() const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool is_scalar() const { return numel() == 1; }
    bool all_finite() const;

    /// Same data, new shape; element counts must agree.
    Tensor reshaped(std::vector<size_t> shape) const;

    std::string shape_str() const;

private:
    std::vector<size_t> shape_;
    std::vector<double> data_;
};

/// exp(x - max) / sum along `axis`; numerically stable.
Tensor softmax(const Tensor& x, size_t axis);

size_t shape_product(const std::vector<size_t>& shape);

} // namespace azsc
