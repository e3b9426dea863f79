#include "azsc/tape.hpp"

#include "azsc/errors.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace azsc {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// c[m,n] += a[m,k] * b[k,n]
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c) {
    const size_t m = a.rows(), k = a.cols(), n = b.cols();
    const double* pa = a.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        double* crow = pc + i * n;
        for (size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = pb + kk * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// c[m,k] += g[m,n] * b[k,n]^T
void matmul_nt_acc(const Tensor& g, const Tensor& b, Tensor& c) {
    const size_t m = g.rows(), n = g.cols(), k = b.rows();
    const double* pg = g.data();
    const double* pb = b.data();
    double* pc = c.data();
    for (size_t i = 0; i < m; ++i) {
        const double* grow = pg + i * n;
        double* crow = pc + i * k;
        for (size_t kk = 0; kk < k; ++kk) {
            const double* brow = pb + kk * n;
            double acc = 0.0;
            for (size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            crow[kk] += acc;
        }
    }
}

// c[k,n] += a[m,k]^T * g[m,n]
void matmul_tn_acc(const Tensor& a, const Tensor& g, Tensor& c) {
    const size_t m = a.rows(), k = a.cols(), n = g.cols();
    const double* pa = a.data();
    const double* pg = g.data();
    double* pc = c.data();
    for (size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        const double* grow = pg + i * n;
        for (size_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            double* crow = pc + kk * n;
            for (size_t j = 0; j < n; ++j) crow[j] += av * grow[j];
        }
    }
}

} // namespace

Var Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&, const Tensor&)> backprop) {
    assert(value.all_finite());
    Node node;
    node.value = std::move(value);
    node.needs_grad = needs_grad;
    node.backprop = std::move(backprop);
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
}

void Tape::check(Var v, const char* who) const {
    if (!v.valid() || v.idx >= nodes_.size()) {
        throw std::invalid_argument(std::string(who) + ": value is not on this tape");
    }
}

Var Tape::input(Tensor value) { return push(std::move(value), false, {}); }

Var Tape::param(Tensor value) { return push(std::move(value), true, {}); }

const Tensor& Tape::value(Var v) const {
    check(v, "value");
    return nodes_[v.idx].value;
}

Tensor Tape::grad(Var v) const {
    check(v, "grad");
    const Node& n = nodes_[v.idx];
    if (n.grad.empty()) return Tensor::zeros(n.value.shape());
    return n.grad;
}

Tensor& Tape::grad_buffer(Var v) {
    Node& n = nodes_[v.idx];
    if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
    return n.grad;
}

Var Tape::add(Var a, Var b) {
    check(a, "add");
    check(b, "add");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    const bool a_scalar = av.is_scalar(), b_scalar = bv.is_scalar();
    require(av.same_shape(bv) || a_scalar || b_scalar,
            "add: shapes " + av.shape_str() + " and " + bv.shape_str() + " do not broadcast");
    Tensor out = a_scalar && !b_scalar ? bv : av;
    if (a_scalar && !b_scalar) {
        const double s = av.item();
        for (size_t i = 0; i < out.numel(); ++i) out[i] += s;
    } else if (b_scalar && !a_scalar) {
        const double s = bv.item();
        for (size_t i = 0; i < out.numel(); ++i) out[i] += s;
    } else {
        for (size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
    }
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Tape& t, const Tensor& g) {
        for (Var v : {a, b}) {
            if (!t.wants_grad(v)) continue;
            Tensor& gb = t.grad_buffer(v);
            if (gb.is_scalar() && !g.is_scalar()) {
                double acc = 0.0;
                for (size_t i = 0; i < g.numel(); ++i) acc += g[i];
                gb[0] += acc;
            } else {
                for (size_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
            }
        }
    });
}

Var Tape::mul(Var a, Var b) {
    check(a, "mul");
    check(b, "mul");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    const bool a_scalar = av.is_scalar(), b_scalar = bv.is_scalar();
    require(av.same_shape(bv) || a_scalar || b_scalar,
            "mul: shapes " + av.shape_str() + " and " + bv.shape_str() + " do not broadcast");
    Tensor out = a_scalar && !b_scalar ? bv : av;
    if (a_scalar && !b_scalar) {
        const double s = av.item();
        for (size_t i = 0; i < out.numel(); ++i) out[i] *= s;
    } else if (b_scalar && !a_scalar) {
        const double s = bv.item();
        for (size_t i = 0; i < out.numel(); ++i) out[i] *= s;
    } else {
        for (size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
    }
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Tape& t, const Tensor& g) {
        const Tensor& av = t.value(a);
        const Tensor& bv = t.value(b);
        auto side = [&](Var v, const Tensor& other) {
            if (!t.wants_grad(v)) return;
            Tensor& gb = t.grad_buffer(v);
            if (gb.is_scalar() && !g.is_scalar()) {
                double acc = 0.0;
                for (size_t i = 0; i < g.numel(); ++i) acc += g[i] * other[other.is_scalar() ? 0 : i];
                gb[0] += acc;
            } else if (other.is_scalar()) {
                const double s = other.item();
                for (size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * s;
            } else {
                for (size_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * other[i];
            }
        };
        side(a, bv);
        side(b, av);
    });
}

Var Tape::tanh(Var a) {
    check(a, "tanh");
    Tensor out = value(a);
    for (size_t i = 0; i < out.numel(); ++i) out[i] = std::tanh(out[i]);
    Var result = push(std::move(out), wants_grad(a), {});
    nodes_[result.idx].backprop = [a, result](Tape& t, const Tensor& g) {
        if (!t.wants_grad(a)) return;
        const Tensor& y = t.value(result);
        Tensor& ga = t.grad_buffer(a);
        for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
    };
    return result;
}

Var Tape::sigmoid(Var a) {
    check(a, "sigmoid");
    Tensor out = value(a);
    for (size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
    Var result = push(std::move(out), wants_grad(a), {});
    nodes_[result.idx].backprop = [a, result](Tape& t, const Tensor& g) {
        if (!t.wants_grad(a)) return;
        const Tensor& y = t.value(result);
        Tensor& ga = t.grad_buffer(a);
        for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
    };
    return result;
}

Var Tape::matmul(Var a, Var b) {
    check(a, "matmul");
    check(b, "matmul");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require(av.rank() == 2 && bv.rank() == 2 && av.cols() == bv.rows(),
            "matmul: incompatible shapes " + av.shape_str() + " and " + bv.shape_str());
    Tensor out({av.rows(), bv.cols()});
    matmul_acc(av, bv, out);
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Tape& t, const Tensor& g) {
        if (t.wants_grad(a)) matmul_nt_acc(g, t.value(b), t.grad_buffer(a));
        if (t.wants_grad(b)) matmul_tn_acc(t.value(a), g, t.grad_buffer(b));
    });
}

Var Tape::add_row_bias(Var mat, Var bias) {
    check(mat, "add_row_bias");
    check(bias, "add_row_bias");
    const Tensor& mv = value(mat);
    const Tensor& bv = value(bias);
    require(mv.rank() == 2 && bv.rank() == 1 && bv.dim(0) == mv.cols(),
            "add_row_bias: shapes " + mv.shape_str() + " and " + bv.shape_str() + " do not align");
    Tensor out = mv;
    const size_t m = mv.rows(), n = mv.cols();
    for (size_t r = 0; r < m; ++r) {
        for (size_t c = 0; c < n; ++c) out[r * n + c] += bv[c];
    }
    return push(std::move(out), wants_grad(mat) || wants_grad(bias),
                [mat, bias, m, n](Tape& t, const Tensor& g) {
                    if (t.wants_grad(mat)) {
                        Tensor& gm = t.grad_buffer(mat);
                        for (size_t i = 0; i < g.numel(); ++i) gm[i] += g[i];
                    }
                    if (t.wants_grad(bias)) {
                        Tensor& gb = t.grad_buffer(bias);
                        for (size_t r = 0; r < m; ++r) {
                            for (size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
                        }
                    }
                });
}

Var Tape::slice_cols(Var mat, size_t col0, size_t width) {
    check(mat, "slice_cols");
    const Tensor& mv = value(mat);
    require(mv.rank() == 2 && width > 0 && col0 + width <= mv.cols(),
            "slice_cols: window [" + std::to_string(col0) + "," + std::to_string(col0 + width) +
                ") out of range for " + mv.shape_str());
    const size_t m = mv.rows(), n = mv.cols();
    Tensor out({m, width});
    for (size_t r = 0; r < m; ++r) {
        for (size_t c = 0; c < width; ++c) out[r * width + c] = mv[r * n + col0 + c];
    }
    return push(std::move(out), wants_grad(mat), [mat, col0, width, m, n](Tape& t, const Tensor& g) {
        if (!t.wants_grad(mat)) return;
        Tensor& gm = t.grad_buffer(mat);
        for (size_t r = 0; r < m; ++r) {
            for (size_t c = 0; c < width; ++c) gm[r * n + col0 + c] += g[r * width + c];
        }
    });
}

Var Tape::concat_cols(Var a, Var b) {
    check(a, "concat_cols");
    check(b, "concat_cols");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    require(av.rank() == 2 && bv.rank() == 2 && av.rows() == bv.rows(),
            "concat_cols: shapes " + av.shape_str() + " and " + bv.shape_str() + " do not align");
    const size_t m = av.rows(), na = av.cols(), nb = bv.cols();
    Tensor out({m, na + nb});
    for (size_t r = 0; r < m; ++r) {
        for (size_t c = 0; c < na; ++c) out[r * (na + nb) + c] = av[r * na + c];
        for (size_t c = 0; c < nb; ++c) out[r * (na + nb) + na + c] = bv[r * nb + c];
    }
    return push(std::move(out), wants_grad(a) || wants_grad(b),
                [a, b, m, na, nb](Tape& t, const Tensor& g) {
                    if (t.wants_grad(a)) {
                        Tensor& ga = t.grad_buffer(a);
                        for (size_t r = 0; r < m; ++r) {
                            for (size_t c = 0; c < na; ++c) ga[r * na + c] += g[r * (na + nb) + c];
                        }
                    }
                    if (t.wants_grad(b)) {
                        Tensor& gb = t.grad_buffer(b);
                        for (size_t r = 0; r < m; ++r) {
                            for (size_t c = 0; c < nb; ++c) gb[r * nb + c] += g[r * (na + nb) + na + c];
                        }
                    }
                });
}

Var Tape::gather_rows(Var mat, std::vector<size_t> rows) {
    check(mat, "gather_rows");
    const Tensor& mv = value(mat);
    require(mv.rank() == 2, "gather_rows: matrix must be rank 2, got " + mv.shape_str());
    require(!rows.empty(), "gather_rows: empty row list");
    const size_t n = mv.cols();
    for (size_t r : rows) {
        require(r < mv.rows(), "gather_rows: row " + std::to_string(r) + " out of range for " + mv.shape_str());
    }
    Tensor out({rows.size(), n});
    for (size_t i = 0; i < rows.size(); ++i) {
        const double* src = mv.data() + rows[i] * n;
        double* dst = out.data() + i * n;
        for (size_t c = 0; c < n; ++c) dst[c] = src[c];
    }
    return push(std::move(out), wants_grad(mat),
                [mat, rows = std::move(rows), n](Tape& t, const Tensor& g) {
                    if (!t.wants_grad(mat)) return;
                    Tensor& gm = t.grad_buffer(mat);
                    for (size_t i = 0; i < rows.size(); ++i) {
                        double* dst = gm.data() + rows[i] * n;
                        const double* src = g.data() + i * n;
                        for (size_t c = 0; c < n; ++c) dst[c] += src[c];
                    }
                });
}

Var Tape::scale_rows(Var mat, Var col) {
    check(mat, "scale_rows");
    check(col, "scale_rows");
    const Tensor& mv = value(mat);
    const Tensor& cv = value(col);
    const bool col_ok = (cv.rank() == 1 && cv.dim(0) == mv.rows()) ||
                        (cv.rank() == 2 && cv.rows() == mv.rows() && cv.cols() == 1);
    require(mv.rank() == 2 && col_ok,
            "scale_rows: shapes " + mv.shape_str() + " and " + cv.shape_str() + " do not align");
    const size_t m = mv.rows(), n = mv.cols();
    Tensor out = mv;
    for (size_t r = 0; r < m; ++r) {
        const double s = cv[r];
        for (size_t c = 0; c < n; ++c) out[r * n + c] *= s;
    }
    return push(std::move(out), wants_grad(mat) || wants_grad(col),
                [mat, col, m, n](Tape& t, const Tensor& g) {
                    const Tensor& mv = t.value(mat);
                    const Tensor& cv = t.value(col);
                    if (t.wants_grad(mat)) {
                        Tensor& gm = t.grad_buffer(mat);
                        for (size_t r = 0; r < m; ++r) {
                            const double s = cv[r];
                            for (size_t c = 0; c < n; ++c) gm[r * n + c] += g[r * n + c] * s;
                        }
                    }
                    if (t.wants_grad(col)) {
                        Tensor& gc = t.grad_buffer(col);
                        for (size_t r = 0; r < m; ++r) {
                            double acc = 0.0;
                            for (size_t c = 0; c < n; ++c) acc += g[r * n + c] * mv[r * n + c];
                            gc[r] += acc;
                        }
                    }
                });
}

Var Tape::masked_softmax_rows(Var scores, const Tensor& mask) {
    check(scores, "masked_softmax_rows");
    const Tensor& sv = value(scores);
    require(sv.rank() == 2 && mask.same_shape(sv),
            "masked_softmax_rows: mask " + mask.shape_str() + " does not match scores " + sv.shape_str());
    for (size_t i = 0; i < mask.numel(); ++i) {
        require(mask[i] == 0.0 || mask[i] == 1.0, "masked_softmax_rows: mask entries must be 0 or 1");
    }
    const size_t m = sv.rows(), n = sv.cols();
    Tensor out({m, n});
    for (size_t r = 0; r < m; ++r) {
        double mx = -HUGE_VAL;
        for (size_t c = 0; c < n; ++c) {
            if (mask[r * n + c] == 1.0) mx = std::max(mx, sv[r * n + c]);
        }
        if (mx == -HUGE_VAL) throw InputError("masked_softmax_rows: row " + std::to_string(r) + " has no valid positions");
        double sum = 0.0;
        for (size_t c = 0; c < n; ++c) {
            if (mask[r * n + c] == 1.0) {
                const double e = std::exp(sv[r * n + c] - mx);
                out[r * n + c] = e;
                sum += e;
            }
        }
        for (size_t c = 0; c < n; ++c) {
            if (mask[r * n + c] == 1.0) out[r * n + c] /= sum;
        }
    }
    Var result = push(std::move(out), wants_grad(scores), {});
    nodes_[result.idx].backprop = [scores, result, mask, m, n](Tape& t, const Tensor& g) {
        if (!t.wants_grad(scores)) return;
        const Tensor& w = t.value(result);
        Tensor& gs = t.grad_buffer(scores);
        for (size_t r = 0; r < m; ++r) {
            double dot = 0.0;
            for (size_t c = 0; c < n; ++c) {
                if (mask[r * n + c] == 1.0) dot += g[r * n + c] * w[r * n + c];
            }
            for (size_t c = 0; c < n; ++c) {
                if (mask[r * n + c] == 1.0) gs[r * n + c] += w[r * n + c] * (g[r * n + c] - dot);
            }
        }
    };
    return result;
}

Var Tape::stack_steps(const std::vector<Var>& steps) {
    require(!steps.empty(), "stack_steps: no steps");
    for (Var v : steps) check(v, "stack_steps");
    const Tensor& first = value(steps[0]);
    require(first.rank() == 2, "stack_steps: steps must be rank 2");
    const size_t b = first.rows(), v = first.cols(), s = steps.size();
    bool needs = false;
    for (Var sv : steps) {
        require(value(sv).same_shape(first), "stack_steps: step shapes differ");
        needs = needs || wants_grad(sv);
    }
    Tensor out({b, s, v});
    for (size_t si = 0; si < s; ++si) {
        const Tensor& sval = value(steps[si]);
        for (size_t bi = 0; bi < b; ++bi) {
            const double* src = sval.data() + bi * v;
            double* dst = out.data() + (bi * s + si) * v;
            for (size_t c = 0; c < v; ++c) dst[c] = src[c];
        }
    }
    return push(std::move(out), needs, [steps, b, s, v](Tape& t, const Tensor& g) {
        for (size_t si = 0; si < s; ++si) {
            if (!t.wants_grad(steps[si])) continue;
            Tensor& gs = t.grad_buffer(steps[si]);
            for (size_t bi = 0; bi < b; ++bi) {
                const double* src = g.data() + (bi * s + si) * v;
                double* dst = gs.data() + bi * v;
                for (size_t c = 0; c < v; ++c) dst[c] += src[c];
            }
        }
    });
}

Var Tape::reshape(Var a, std::vector<size_t> shape) {
    check(a, "reshape");
    Tensor out = value(a).reshaped(shape);
    return push(std::move(out), wants_grad(a), [a](Tape& t, const Tensor& g) {
        if (!t.wants_grad(a)) return;
        Tensor& ga = t.grad_buffer(a);
        for (size_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
    });
}

Var Tape::sum(Var a) {
    check(a, "sum");
    const Tensor& av = value(a);
    double acc = 0.0;
    for (size_t i = 0; i < av.numel(); ++i) acc += av[i];
    return push(Tensor::scalar(acc), wants_grad(a), [a](Tape& t, const Tensor& g) {
        if (!t.wants_grad(a)) return;
        Tensor& ga = t.grad_buffer(a);
        const double s = g.item();
        for (size_t i = 0; i < ga.numel(); ++i) ga[i] += s;
    });
}

Var Tape::masked_sparse_crossentropy(Var logits, const Tensor& targets, const Tensor& mask) {
    check(logits, "masked_sparse_crossentropy");
    const Tensor& lv = value(logits);
    require(lv.rank() == 3, "masked_sparse_crossentropy: logits must be rank 3, got " + lv.shape_str());
    const size_t b = lv.dim(0), s = lv.dim(1), v = lv.dim(2);
    require(targets.rank() == 2 && targets.dim(0) == b && targets.dim(1) == s,
            "masked_sparse_crossentropy: targets " + targets.shape_str() + " do not match logits " + lv.shape_str());
    require(mask.same_shape(targets), "masked_sparse_crossentropy: mask " + mask.shape_str() +
                                          " does not match targets " + targets.shape_str());

    std::vector<size_t> tgt(b * s);
    size_t n_masked = 0;
    for (size_t i = 0; i < b * s; ++i) {
        require(mask[i] == 0.0 || mask[i] == 1.0, "masked_sparse_crossentropy: mask entries must be 0 or 1");
        const double tv = targets[i];
        require(tv == std::floor(tv) && tv >= 0.0 && tv < static_cast<double>(v),
                "masked_sparse_crossentropy: target " + std::to_string(tv) + " outside [0," + std::to_string(v) + ")");
        tgt[i] = static_cast<size_t>(tv);
        if (mask[i] == 1.0) ++n_masked;
    }
    if (n_masked == 0) throw InputError("masked_sparse_crossentropy: no unmasked positions");

    // probs kept for the backward pass
    Tensor probs({b, s, v});
    double total = 0.0;
    for (size_t i = 0; i < b * s; ++i) {
        if (mask[i] == 0.0) continue;
        const double* row = lv.data() + i * v;
        double* prow = probs.data() + i * v;
        double mx = row[0];
        for (size_t c = 1; c < v; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (size_t c = 0; c < v; ++c) {
            const double e = std::exp(row[c] - mx);
            prow[c] = e;
            sum += e;
        }
        for (size_t c = 0; c < v; ++c) prow[c] /= sum;
        total += std::log(sum) + mx - row[tgt[i]];
    }
    const double loss = total / static_cast<double>(n_masked);

    return push(Tensor::scalar(loss), wants_grad(logits),
                [logits, probs = std::move(probs), tgt = std::move(tgt), mask, b, s, v,
                 n_masked](Tape& t, const Tensor& g) {
                    if (!t.wants_grad(logits)) return;
                    Tensor& gl = t.grad_buffer(logits);
                    const double scale = g.item() / static_cast<double>(n_masked);
                    for (size_t i = 0; i < b * s; ++i) {
                        if (mask[i] == 0.0) continue;
                        const double* prow = probs.data() + i * v;
                        double* grow = gl.data() + i * v;
                        for (size_t c = 0; c < v; ++c) grow[c] += scale * prow[c];
                        grow[tgt[i]] -= scale;
                    }
                });
}

void Tape::backward(Var loss) {
    check(loss, "backward");
    const Tensor& lv = value(loss);
    if (!lv.is_scalar()) {
        throw std::invalid_argument("backward: loss must be a single element, got " + lv.shape_str());
    }
    grad_buffer(loss)[0] += 1.0;
    for (size_t i = nodes_.size(); i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.empty() || !n.backprop) continue;
        n.backprop(*this, n.grad);
    }
}

} // namespace azsc
