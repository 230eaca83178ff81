#include "relsem/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace relsem {

namespace {

std::atomic<uint64_t> g_next_id{1};

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

size_t count(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
}

NodePtr make_node(std::vector<int> shape, std::vector<double> value) {
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    return n;
}

void require_2d(const Tensor& t, const char* who, const char* arg) {
    if (t.ndim() != 2)
        throw ShapeError(std::string(who) + ": " + arg + " must be 2-d, got " +
                         std::to_string(t.ndim()) + "-d");
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (a.shape() != b.shape()) {
        for (int i = 0; i < std::min(a.ndim(), b.ndim()); ++i) {
            if (a.dim(i) != b.dim(i))
                throw ShapeError(std::string(who) + ": axis " + std::to_string(i) +
                                 " disagrees (" + std::to_string(a.dim(i)) + " vs " +
                                 std::to_string(b.dim(i)) + ")");
        }
        throw ShapeError(std::string(who) + ": rank mismatch (" + std::to_string(a.ndim()) +
                         " vs " + std::to_string(b.ndim()) + ")");
    }
}

// Builds the result node and wires parents/backward only when a parent needs it.
Tensor finish(NodePtr out, std::vector<Tensor> parents,
              std::function<void(TensorNode&)> backward_fn) {
    bool needs = false;
    for (const auto& p : parents) needs = needs || p.requires_grad();
    if (needs) {
        out->requires_grad = true;
        out->parents.reserve(parents.size());
        for (auto& p : parents) out->parents.push_back(p.node());
        out->backward_fn = std::move(backward_fn);
    }
    return Tensor(out);
}

void accumulate(TensorNode& parent, const std::vector<double>& delta) {
    parent.ensure_grad();
    for (size_t i = 0; i < delta.size(); ++i) parent.grad[i] += delta[i];
}

}  // namespace

// ---- Tensor ----------------------------------------------------------------

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double fill, bool requires_grad) {
    size_t n = count(shape);
    auto node = make_node(std::move(shape), std::vector<double>(n, fill));
    node->requires_grad = requires_grad;
    return Tensor(node);
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values,
                           bool requires_grad) {
    if (count(shape) != values.size())
        throw ShapeError("from_values: shape holds " + std::to_string(count(shape)) +
                         " elements but " + std::to_string(values.size()) + " given");
    auto node = make_node(std::move(shape), std::move(values));
    node->requires_grad = requires_grad;
    return Tensor(node);
}

Tensor Tensor::scalar(double v) { return from_values({1}, {v}); }

Tensor Tensor::randn_trunc(std::vector<int> shape, double stddev, Rng& rng,
                           bool requires_grad) {
    size_t n = count(shape);
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = rng.truncated_normal(stddev);
    auto node = make_node(std::move(shape), std::move(v));
    node->requires_grad = requires_grad;
    return Tensor(node);
}

double Tensor::item() const {
    if (size() != 1) throw ShapeError("item: tensor has " + std::to_string(size()) + " elements");
    return node_->value[0];
}

std::vector<double>& Tensor::grad() {
    node_->ensure_grad();
    return node_->grad;
}

const std::vector<double>& Tensor::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

void Tensor::zero_grad() {
    if (node_) node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::backward() const {
    if (size() != 1)
        throw ShapeError("backward: loss must be scalar, got " + std::to_string(size()) +
                         " elements");
    // Reachable subgraph, then reverse creation order; ids are monotone along
    // parent edges so this is a valid topological schedule.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    std::vector<TensorNode*> stack{node_.get()};
    seen.insert(node_.get());
    while (!stack.empty()) {
        TensorNode* n = stack.back();
        stack.pop_back();
        order.push_back(n);
        for (auto& p : n->parents) {
            if (seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    std::sort(order.begin(), order.end(),
              [](TensorNode* a, TensorNode* b) { return a->id > b->id; });

    node_->ensure_grad();
    node_->grad[0] += 1.0;
    for (TensorNode* n : order) {
        if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
    }
}

// ---- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] + b.values()[i];
    return finish(make_node(a.shape(), std::move(v)), {a, b}, [](TensorNode& self) {
        for (int k = 0; k < 2; ++k)
            if (self.parents[k]->requires_grad) accumulate(*self.parents[k], self.grad);
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] - b.values()[i];
    return finish(make_node(a.shape(), std::move(v)), {a, b}, [](TensorNode& self) {
        if (self.parents[0]->requires_grad) accumulate(*self.parents[0], self.grad);
        if (self.parents[1]->requires_grad) {
            auto& p = *self.parents[1];
            p.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * b.values()[i];
    return finish(make_node(a.shape(), std::move(v)), {a, b}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) {
            pa.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
            pb.ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i] * pa.value[i];
        }
    });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> v(a.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = a.values()[i] * c;
    return finish(make_node(a.shape(), std::move(v)), {a}, [c](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * c;
    });
}

// ---- matrix products -------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul", "lhs");
    require_2d(b, "matmul", "rhs");
    if (a.dim(1) != b.dim(0))
        throw ShapeError("matmul: inner axis disagrees (lhs columns " + std::to_string(a.dim(1)) +
                         " vs rhs rows " + std::to_string(b.dim(0)) + ")");
    const int n = a.dim(0), k = a.dim(1), m = b.dim(1);
    std::vector<double> v(static_cast<size_t>(n) * m, 0.0);
    const double* pa = a.values().data();
    const double* pb = b.values().data();
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) {
            const double ail = pa[i * k + l];
            if (ail == 0.0) continue;
            for (int j = 0; j < m; ++j) v[static_cast<size_t>(i) * m + j] += ail * pb[l * m + j];
        }
    return finish(make_node({n, m}, std::move(v)), {a, b}, [n, k, m](TensorNode& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        const double* dy = self.grad.data();
        if (A.requires_grad) {
            A.ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < k; ++l) {
                    double acc = 0.0;
                    for (int j = 0; j < m; ++j) acc += dy[i * m + j] * B.value[l * m + j];
                    A.grad[static_cast<size_t>(i) * k + l] += acc;
                }
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (int l = 0; l < k; ++l)
                for (int j = 0; j < m; ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < n; ++i) acc += A.value[i * k + l] * dy[i * m + j];
                    B.grad[static_cast<size_t>(l) * m + j] += acc;
                }
        }
    });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul_nt", "lhs");
    require_2d(b, "matmul_nt", "rhs");
    if (a.dim(1) != b.dim(1))
        throw ShapeError("matmul_nt: inner axis disagrees (lhs columns " +
                         std::to_string(a.dim(1)) + " vs rhs columns " +
                         std::to_string(b.dim(1)) + ")");
    const int n = a.dim(0), k = a.dim(1), m = b.dim(0);
    std::vector<double> v(static_cast<size_t>(n) * m, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int l = 0; l < k; ++l) acc += a.values()[i * k + l] * b.values()[j * k + l];
            v[static_cast<size_t>(i) * m + j] = acc;
        }
    return finish(make_node({n, m}, std::move(v)), {a, b}, [n, k, m](TensorNode& self) {
        auto& A = *self.parents[0];
        auto& B = *self.parents[1];
        const double* dy = self.grad.data();
        if (A.requires_grad) {
            A.ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < k; ++l) {
                    double acc = 0.0;
                    for (int j = 0; j < m; ++j) acc += dy[i * m + j] * B.value[j * k + l];
                    A.grad[static_cast<size_t>(i) * k + l] += acc;
                }
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (int j = 0; j < m; ++j)
                for (int l = 0; l < k; ++l) {
                    double acc = 0.0;
                    for (int i = 0; i < n; ++i) acc += dy[i * m + j] * A.value[i * k + l];
                    B.grad[static_cast<size_t>(j) * k + l] += acc;
                }
        }
    });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
    require_2d(x, "linear", "x");
    require_2d(w, "linear", "W");
    if (bias.ndim() != 1)
        throw ShapeError("linear: bias must be 1-d, got " + std::to_string(bias.ndim()) + "-d");
    if (x.dim(1) != w.dim(0))
        throw ShapeError("linear: inner axis disagrees (x columns " + std::to_string(x.dim(1)) +
                         " vs W rows " + std::to_string(w.dim(0)) + ")");
    if (bias.dim(0) != w.dim(1))
        throw ShapeError("linear: bias axis disagrees (bias " + std::to_string(bias.dim(0)) +
                         " vs W columns " + std::to_string(w.dim(1)) + ")");
    const int n = x.dim(0), k = x.dim(1), m = w.dim(1);
    std::vector<double> v(static_cast<size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) v[static_cast<size_t>(i) * m + j] = bias.values()[j];
        for (int l = 0; l < k; ++l) {
            const double xil = x.values()[i * k + l];
            if (xil == 0.0) continue;
            for (int j = 0; j < m; ++j)
                v[static_cast<size_t>(i) * m + j] += xil * w.values()[l * m + j];
        }
    }
    return finish(make_node({n, m}, std::move(v)), {x, w, bias}, [n, k, m](TensorNode& self) {
        auto& X = *self.parents[0];
        auto& W = *self.parents[1];
        auto& B = *self.parents[2];
        const double* dy = self.grad.data();
        if (X.requires_grad) {
            X.ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < k; ++l) {
                    double acc = 0.0;
                    for (int j = 0; j < m; ++j) acc += dy[i * m + j] * W.value[l * m + j];
                    X.grad[static_cast<size_t>(i) * k + l] += acc;
                }
        }
        if (W.requires_grad) {
            W.ensure_grad();
            for (int l = 0; l < k; ++l)
                for (int j = 0; j < m; ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < n; ++i) acc += X.value[i * k + l] * dy[i * m + j];
                    W.grad[static_cast<size_t>(l) * m + j] += acc;
                }
        }
        if (B.requires_grad) {
            B.ensure_grad();
            for (int j = 0; j < m; ++j) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) acc += dy[i * m + j];
                B.grad[static_cast<size_t>(j)] += acc;
            }
        }
    });
}

// ---- activations -----------------------------------------------------------

Tensor relu(const Tensor& x) {
    std::vector<double> v(x.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = x.values()[i] > 0.0 ? x.values()[i] : 0.0;
    return finish(make_node(x.shape(), std::move(v)), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
            if (p.value[i] > 0.0) p.grad[i] += self.grad[i];
    });
}

Tensor gelu(const Tensor& x) {
    std::vector<double> v(x.size());
    for (size_t i = 0; i < v.size(); ++i) {
        double xi = x.values()[i];
        double u = kGeluC * (xi + kGeluA * xi * xi * xi);
        v[i] = 0.5 * xi * (1.0 + std::tanh(u));
    }
    return finish(make_node(x.shape(), std::move(v)), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            double xi = p.value[i];
            double u = kGeluC * (xi + kGeluA * xi * xi * xi);
            double t = std::tanh(u);
            double du = kGeluC * (1.0 + 3.0 * kGeluA * xi * xi);
            double d = 0.5 * (1.0 + t) + 0.5 * xi * (1.0 - t * t) * du;
            p.grad[i] += self.grad[i] * d;
        }
    });
}

Tensor tanh_op(const Tensor& x) {
    std::vector<double> v(x.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::tanh(x.values()[i]);
    return finish(make_node(x.shape(), std::move(v)), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            double y = self.value[i];
            p.grad[i] += self.grad[i] * (1.0 - y * y);
        }
    });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> v(x.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + std::exp(-x.values()[i]));
    return finish(make_node(x.shape(), std::move(v)), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            double y = self.value[i];
            p.grad[i] += self.grad[i] * y * (1.0 - y);
        }
    });
}

// ---- layer norm ------------------------------------------------------------

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
    require_2d(x, "layer_norm", "x");
    const int n = x.dim(0), d = x.dim(1);
    if (d == 0) throw ShapeError("layer_norm: empty normalization axis");
    if (eps <= 0.0) throw ShapeError("layer_norm: eps must be positive");
    if (gain.ndim() != 1 || gain.dim(0) != d)
        throw ShapeError("layer_norm: gain axis disagrees with x columns (" +
                         std::to_string(gain.size()) + " vs " + std::to_string(d) + ")");
    if (shift.ndim() != 1 || shift.dim(0) != d)
        throw ShapeError("layer_norm: shift axis disagrees with x columns (" +
                         std::to_string(shift.size()) + " vs " + std::to_string(d) + ")");

    std::vector<double> v(x.size());
    auto mean = std::make_shared<std::vector<double>>(n);
    auto inv_std = std::make_shared<std::vector<double>>(n);
    for (int i = 0; i < n; ++i) {
        double mu = 0.0;
        for (int j = 0; j < d; ++j) mu += x.values()[i * d + j];
        mu /= d;
        double var = 0.0;
        for (int j = 0; j < d; ++j) {
            double c = x.values()[i * d + j] - mu;
            var += c * c;
        }
        var /= d;
        double inv = 1.0 / std::sqrt(var + eps);
        (*mean)[i] = mu;
        (*inv_std)[i] = inv;
        for (int j = 0; j < d; ++j) {
            double xh = (x.values()[i * d + j] - mu) * inv;
            v[static_cast<size_t>(i) * d + j] = gain.values()[j] * xh + shift.values()[j];
        }
    }
    return finish(make_node({n, d}, std::move(v)), {x, gain, shift},
                  [n, d, mean, inv_std](TensorNode& self) {
        auto& X = *self.parents[0];
        auto& G = *self.parents[1];
        auto& S = *self.parents[2];
        const double* dy = self.grad.data();
        if (G.requires_grad) G.ensure_grad();
        if (S.requires_grad) S.ensure_grad();
        if (X.requires_grad) X.ensure_grad();
        for (int i = 0; i < n; ++i) {
            const double mu = (*mean)[i];
            const double inv = (*inv_std)[i];
            if (G.requires_grad || S.requires_grad) {
                for (int j = 0; j < d; ++j) {
                    double xh = (X.value[i * d + j] - mu) * inv;
                    if (G.requires_grad) G.grad[j] += dy[i * d + j] * xh;
                    if (S.requires_grad) S.grad[j] += dy[i * d + j];
                }
            }
            if (X.requires_grad) {
                // dxh = dy*g; dx = inv*(dxh - mean(dxh) - xh*mean(dxh*xh))
                double m1 = 0.0, m2 = 0.0;
                for (int j = 0; j < d; ++j) {
                    double xh = (X.value[i * d + j] - mu) * inv;
                    double dxh = dy[i * d + j] * G.value[j];
                    m1 += dxh;
                    m2 += dxh * xh;
                }
                m1 /= d;
                m2 /= d;
                for (int j = 0; j < d; ++j) {
                    double xh = (X.value[i * d + j] - mu) * inv;
                    double dxh = dy[i * d + j] * G.value[j];
                    X.grad[static_cast<size_t>(i) * d + j] += inv * (dxh - m1 - xh * m2);
                }
            }
        }
    });
}

// ---- gather / reshuffle ----------------------------------------------------

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
    require_2d(table, "embedding_rows", "table");
    const int v_size = table.dim(0), d = table.dim(1);
    for (size_t i = 0; i < ids.size(); ++i)
        if (ids[i] < 0 || ids[i] >= v_size)
            throw VocabError("embedding_rows: id " + std::to_string(ids[i]) + " at position " +
                             std::to_string(i) + " outside table of " + std::to_string(v_size) +
                             " rows");
    const int n = static_cast<int>(ids.size());
    std::vector<double> v(static_cast<size_t>(n) * d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) v[static_cast<size_t>(i) * d + j] = table.at(ids[i], j);
    auto ids_copy = std::make_shared<std::vector<int>>(ids);
    return finish(make_node({n, d}, std::move(v)), {table}, [d, ids_copy](TensorNode& self) {
        auto& T = *self.parents[0];
        if (!T.requires_grad) return;
        T.ensure_grad();
        for (size_t i = 0; i < ids_copy->size(); ++i)
            for (int j = 0; j < d; ++j)
                T.grad[static_cast<size_t>((*ids_copy)[i]) * d + j] += self.grad[i * d + j];
    });
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ShapeError("concat_cols: no inputs");
    const int n = xs[0].dim(0);
    int total = 0;
    for (const auto& x : xs) {
        require_2d(x, "concat_cols", "input");
        if (x.dim(0) != n)
            throw ShapeError("concat_cols: row axis disagrees (" + std::to_string(x.dim(0)) +
                             " vs " + std::to_string(n) + ")");
        total += x.dim(1);
    }
    std::vector<double> v(static_cast<size_t>(n) * total);
    int off = 0;
    std::vector<int> widths;
    for (const auto& x : xs) {
        const int m = x.dim(1);
        widths.push_back(m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                v[static_cast<size_t>(i) * total + off + j] = x.at(i, j);
        off += m;
    }
    return finish(make_node({n, total}, std::move(v)), xs,
                  [n, total, widths](TensorNode& self) {
        int off = 0;
        for (size_t k = 0; k < widths.size(); ++k) {
            auto& p = *self.parents[k];
            const int m = widths[k];
            if (p.requires_grad) {
                p.ensure_grad();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j)
                        p.grad[static_cast<size_t>(i) * m + j] +=
                            self.grad[static_cast<size_t>(i) * total + off + j];
            }
            off += m;
        }
    });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) { return concat_cols(std::vector<Tensor>{a, b}); }

Tensor slice_cols(const Tensor& x, int c0, int c1) {
    require_2d(x, "slice_cols", "x");
    const int n = x.dim(0), m = x.dim(1);
    if (c0 < 0 || c1 > m || c0 >= c1)
        throw ShapeError("slice_cols: range [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") invalid for " + std::to_string(m) + " columns");
    const int w = c1 - c0;
    std::vector<double> v(static_cast<size_t>(n) * w);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < w; ++j) v[static_cast<size_t>(i) * w + j] = x.at(i, c0 + j);
    return finish(make_node({n, w}, std::move(v)), {x}, [n, m, c0, w](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j)
                p.grad[static_cast<size_t>(i) * m + c0 + j] +=
                    self.grad[static_cast<size_t>(i) * w + j];
    });
}

Tensor slice_rows(const Tensor& x, int r0, int r1) {
    require_2d(x, "slice_rows", "x");
    const int n = x.dim(0), m = x.dim(1);
    if (r0 < 0 || r1 > n || r0 >= r1)
        throw ShapeError("slice_rows: range [" + std::to_string(r0) + "," + std::to_string(r1) +
                         ") invalid for " + std::to_string(n) + " rows");
    const int h = r1 - r0;
    std::vector<double> v(x.values().begin() + static_cast<size_t>(r0) * m,
                          x.values().begin() + static_cast<size_t>(r1) * m);
    return finish(make_node({h, m}, std::move(v)), {x}, [r0, m, h](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < m; ++j)
                p.grad[static_cast<size_t>(r0 + i) * m + j] +=
                    self.grad[static_cast<size_t>(i) * m + j];
    });
}

Tensor row(const Tensor& x, int r) { return slice_rows(x, r, r + 1); }

Tensor stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw ShapeError("stack_rows: no inputs");
    const int m = rows[0].dim(1);
    for (const auto& r : rows) {
        require_2d(r, "stack_rows", "row");
        if (r.dim(0) != 1 || r.dim(1) != m)
            throw ShapeError("stack_rows: each input must be [1," + std::to_string(m) + "]");
    }
    const int n = static_cast<int>(rows.size());
    std::vector<double> v(static_cast<size_t>(n) * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) v[static_cast<size_t>(i) * m + j] = rows[i].at(0, j);
    return finish(make_node({n, m}, std::move(v)), rows, [n, m](TensorNode& self) {
        for (int i = 0; i < n; ++i) {
            auto& p = *self.parents[i];
            if (!p.requires_grad) continue;
            p.ensure_grad();
            for (int j = 0; j < m; ++j) p.grad[j] += self.grad[static_cast<size_t>(i) * m + j];
        }
    });
}

// ---- softmax / loss --------------------------------------------------------

Tensor masked_softmax_rows(const Tensor& x, const std::vector<uint8_t>& col_valid) {
    require_2d(x, "masked_softmax_rows", "x");
    const int n = x.dim(0), m = x.dim(1);
    if (static_cast<int>(col_valid.size()) != m)
        throw ShapeError("masked_softmax_rows: mask length " + std::to_string(col_valid.size()) +
                         " vs " + std::to_string(m) + " columns");
    bool any = false;
    for (uint8_t b : col_valid) any = any || (b != 0);
    if (!any) throw MaskError("masked_softmax_rows: every position is masked");

    std::vector<double> v(x.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        double mx = -1e308;
        for (int j = 0; j < m; ++j)
            if (col_valid[j] && x.at(i, j) > mx) mx = x.at(i, j);
        double z = 0.0;
        for (int j = 0; j < m; ++j)
            if (col_valid[j]) z += std::exp(x.at(i, j) - mx);
        for (int j = 0; j < m; ++j)
            if (col_valid[j]) v[static_cast<size_t>(i) * m + j] = std::exp(x.at(i, j) - mx) / z;
    }
    auto mask = std::make_shared<std::vector<uint8_t>>(col_valid);
    return finish(make_node({n, m}, std::move(v)), {x}, [n, m, mask](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (int i = 0; i < n; ++i) {
            double dot = 0.0;
            for (int j = 0; j < m; ++j)
                if ((*mask)[j])
                    dot += self.grad[static_cast<size_t>(i) * m + j] *
                           self.value[static_cast<size_t>(i) * m + j];
            for (int j = 0; j < m; ++j)
                if ((*mask)[j]) {
                    double y = self.value[static_cast<size_t>(i) * m + j];
                    p.grad[static_cast<size_t>(i) * m + j] +=
                        y * (self.grad[static_cast<size_t>(i) * m + j] - dot);
                }
        }
    });
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets,
                     const std::vector<uint8_t>& loss_mask) {
    require_2d(logits, "cross_entropy", "logits");
    const int n = logits.dim(0), k = logits.dim(1);
    if (static_cast<int>(targets.size()) != n)
        throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets vs " +
                         std::to_string(n) + " rows");
    if (static_cast<int>(loss_mask.size()) != n)
        throw ShapeError("cross_entropy: mask length " + std::to_string(loss_mask.size()) +
                         " vs " + std::to_string(n) + " rows");
    int live = 0;
    for (int i = 0; i < n; ++i) {
        if (!loss_mask[i]) continue;
        ++live;
        if (targets[i] < 0 || targets[i] >= k)
            throw LabelError("cross_entropy: target " + std::to_string(targets[i]) + " at row " +
                             std::to_string(i) + " outside " + std::to_string(k) + " classes");
    }
    if (live == 0) throw MaskError("cross_entropy: every position is masked");

    auto probs = std::make_shared<std::vector<double>>(logits.size(), 0.0);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!loss_mask[i]) continue;
        double mx = logits.at(i, 0);
        for (int j = 1; j < k; ++j) mx = std::max(mx, logits.at(i, j));
        double z = 0.0;
        for (int j = 0; j < k; ++j) z += std::exp(logits.at(i, j) - mx);
        double logz = std::log(z) + mx;
        for (int j = 0; j < k; ++j)
            (*probs)[static_cast<size_t>(i) * k + j] = std::exp(logits.at(i, j) - logz);
        loss -= logits.at(i, targets[i]) - logz;
    }
    loss /= live;

    auto tcopy = std::make_shared<std::vector<int>>(targets);
    auto mcopy = std::make_shared<std::vector<uint8_t>>(loss_mask);
    return finish(make_node({1}, {loss}), {logits},
                  [n, k, live, probs, tcopy, mcopy](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        const double up = self.grad[0] / live;
        for (int i = 0; i < n; ++i) {
            if (!(*mcopy)[i]) continue;
            for (int j = 0; j < k; ++j) {
                double g = (*probs)[static_cast<size_t>(i) * k + j];
                if (j == (*tcopy)[i]) g -= 1.0;
                p.grad[static_cast<size_t>(i) * k + j] += up * g;
            }
        }
    });
}

Tensor sum(const Tensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v;
    return finish(make_node({1}, {acc}), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += self.grad[0];
    });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw ConfigError("dropout: rate " + std::to_string(rate) + " outside [0,1)");
    if (rate == 0.0) return x;
    const double keep = 1.0 - rate;
    auto mask = std::make_shared<std::vector<double>>(x.size());
    std::vector<double> v(x.size());
    for (size_t i = 0; i < v.size(); ++i) {
        double m = rng.next_double() < rate ? 0.0 : 1.0 / keep;
        (*mask)[i] = m;
        v[i] = x.values()[i] * m;
    }
    return finish(make_node(x.shape(), std::move(v)), {x}, [mask](TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * (*mask)[i];
    });
}

}  // namespace relsem
