#pragma once

#include "azsc/tensor.hpp"

#include <cstddef>
#include <vector>

namespace azsc {

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
};

/// Adam with bias correction. Moment tensors are keyed by parameter order,
/// fixed on the first step() call.
class AdamState {
public:
    explicit AdamState(AdamConfig config = {}) : config_(config) {}

    const AdamConfig& config() const { return config_; }
    size_t step_count() const { return step_; }

    /// params[i] -= lr * m_hat / (sqrt(v_hat) + eps), elementwise.
    void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads);

private:
    AdamConfig config_;
    size_t step_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

} // namespace azsc
