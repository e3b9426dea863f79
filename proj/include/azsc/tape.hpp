#pragma once

#include "azsc/tensor.hpp"

#include <functional>
#include <vector>

namespace azsc {

/// Handle to a value recorded on a Tape.
struct Var {
    size_t idx = static_cast<size_t>(-1);
    bool valid() const { return idx != static_cast<size_t>(-1); }
};

/// Reverse-mode differentiation over a recorded sequence of tensor ops.
///
/// Every op appends a node holding the forward value and a closure that
/// scatters the node's gradient back to its inputs. Nodes only ever refer to
/// earlier nodes, so walking the record in reverse creation order visits each
/// node after all of its consumers. A tape belongs to one forward/backward
/// pass on one thread; independent passes may run concurrently on their own
/// tapes.
class Tape {
public:
    /// Leaf that does not receive a gradient (inputs, constants).
    Var input(Tensor value);
    /// Leaf that accumulates a gradient during backward().
    Var param(Tensor value);

    const Tensor& value(Var v) const;
    /// Gradient accumulated by backward(); zeros if the value was never reached.
    Tensor grad(Var v) const;

    // elementwise; operands must have equal shapes, or either side may be a
    // single-element tensor (scalar broadcast)
    Var add(Var a, Var b);
    Var mul(Var a, Var b);
    Var tanh(Var a);
    Var sigmoid(Var a);

    Var matmul(Var a, Var b);
    /// mat[m,n] + bias[n] applied to every row.
    Var add_row_bias(Var mat, Var bias);
    Var slice_cols(Var mat, size_t col0, size_t width);
    Var concat_cols(Var a, Var b);
    /// out.row(i) = mat.row(rows[i]); duplicate rows accumulate gradient.
    Var gather_rows(Var mat, std::vector<size_t> rows);
    /// out[r,c] = mat[r,c] * col[r]; col has shape [m] or [m,1].
    Var scale_rows(Var mat, Var col);
    /// Row-wise softmax over positions where mask is 1; masked entries are
    /// exactly 0. Every row needs at least one unmasked position.
    Var masked_softmax_rows(Var scores, const Tensor& mask);
    /// steps of shape [b,v] stacked into [b,steps,v].
    Var stack_steps(const std::vector<Var>& steps);
    Var reshape(Var a, std::vector<size_t> shape);
    Var sum(Var a);

    /// Mean over masked positions of -log softmax(logits)[target].
    /// logits [b,s,v]; targets and mask [b,s]; targets must hold whole numbers
    /// in [0,v), mask entries 0 or 1.
    Var masked_sparse_crossentropy(Var logits, const Tensor& targets, const Tensor& mask);

    /// Seeds d(loss)/d(loss) = 1 and runs the record backwards. `loss` must be
    /// a single-element value produced through this tape.
    void backward(Var loss);

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad; // allocated on first contribution
        bool needs_grad = false;
        std::function<void(Tape&, const Tensor&)> backprop;
    };

    std::vector<Node> nodes_;

    Var push(Tensor value, bool needs_grad, std::function<void(Tape&, const Tensor&)> backprop);
    bool wants_grad(Var v) const { return nodes_[v.idx].needs_grad; }
    Tensor& grad_buffer(Var v);
    void check(Var v, const char* who) const;
};

} // namespace azsc
