#include "azsc/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace azsc {

size_t shape_product(const std::vector<size_t>& shape) {
    size_t n = 1;
    for (size_t d : shape) n *= d;
    return n;
}

namespace {

void check_shape(const std::vector<size_t>& shape) {
    for (size_t d : shape) {
        if (d == 0) throw std::invalid_argument("tensor dimensions must be positive");
    }
    if (shape.empty()) throw std::invalid_argument("tensor rank must be at least 1");
}

} // namespace

Tensor::Tensor(std::vector<size_t> shape) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_product(shape_), 0.0);
}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (data_.size() != shape_product(shape_)) {
        throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_str());
    }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::full(std::vector<size_t> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
}

Tensor Tensor::uniform(std::vector<size_t> shape, double lo, double hi, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& x : t.data_) x = rng.uniform_range(lo, hi);
    return t;
}

double Tensor::item() const {
    if (numel() != 1) throw std::invalid_argument("item() on tensor of shape " + shape_str());
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Tensor Tensor::reshaped(std::vector<size_t> shape) const {
    check_shape(shape);
    if (shape_product(shape) != numel()) {
        throw std::invalid_argument("cannot reshape " + shape_str() + " to different element count");
    }
    return Tensor(std::move(shape), data_);
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape_[i]);
    }
    return s + "]";
}

Tensor softmax(const Tensor& x, size_t axis) {
    if (axis >= x.rank()) throw std::invalid_argument("softmax axis out of range");
    size_t outer = 1, inner = 1;
    const size_t n = x.dim(axis);
    for (size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

    Tensor out(x.shape());
    const double* src = x.data();
    double* dst = out.data();
    for (size_t o = 0; o < outer; ++o) {
        for (size_t in = 0; in < inner; ++in) {
            const size_t base = o * n * inner + in;
            double mx = src[base];
            for (size_t k = 1; k < n; ++k) mx = std::max(mx, src[base + k * inner]);
            double sum = 0.0;
            for (size_t k = 0; k < n; ++k) {
                const double e = std::exp(src[base + k * inner] - mx);
                dst[base + k * inner] = e;
                sum += e;
            }
            for (size_t k = 0; k < n; ++k) dst[base + k * inner] /= sum;
        }
    }
    return out;
}

} // namespace azsc
