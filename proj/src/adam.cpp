#include "azsc/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace azsc {

void AdamState::step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam: " + std::to_string(params.size()) + " params vs " +
                                    std::to_string(grads.size()) + " grads");
    }
    if (m_.empty()) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const Tensor* p : params) {
            m_.push_back(Tensor::zeros(p->shape()));
            v_.push_back(Tensor::zeros(p->shape()));
        }
    } else if (m_.size() != params.size()) {
        throw std::invalid_argument("adam: parameter count changed between steps");
    }

    ++step_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step_));

    for (size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        if (!p.same_shape(g) || !p.same_shape(m_[i])) {
            throw std::invalid_argument("adam: shape mismatch for parameter " + std::to_string(i) +
                                        ": " + p.shape_str() + " vs " + g.shape_str());
        }
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (size_t j = 0; j < p.numel(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double m_hat = m[j] / corr1;
            const double v_hat = v[j] / corr2;
            p[j] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }
}

} // namespace azsc
