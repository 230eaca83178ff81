#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "relsem/errors.hpp"
#include "relsem/rng.hpp"

namespace relsem {

struct TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

// One vertex of a reverse-mode computation graph. Values are written once at
// construction; a backward pass only ever touches `grad`.
struct TensorNode {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until the node participates in a backward pass
    bool requires_grad = false;
    uint64_t id = 0;  // creation order; children always have larger ids than parents
    std::string name;
    std::vector<NodePtr> parents;
    // Scatter this node's grad into the parents' grads. Null for leaves.
    std::function<void(TensorNode&)> backward_fn;

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

// Value-semantics handle onto a graph node. Copying a Tensor aliases the node.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double fill, bool requires_grad = false);
    static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double v);
    // i.i.d. truncated-normal entries, the default init for projections.
    static Tensor randn_trunc(std::vector<int> shape, double stddev, Rng& rng,
                              bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const { return node_->shape; }
    int ndim() const { return static_cast<int>(node_->shape.size()); }
    int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }
    size_t size() const { return node_->value.size(); }
    uint64_t id() const { return node_->id; }

    double& at(int i) { return node_->value[static_cast<size_t>(i)]; }
    double at(int i) const { return node_->value[static_cast<size_t>(i)]; }
    double& at(int i, int j) { return node_->value[flat(i, j)]; }
    double at(int i, int j) const { return node_->value[flat(i, j)]; }
    double item() const;

    std::vector<double>& values() { return node_->value; }
    const std::vector<double>& values() const { return node_->value; }
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    bool has_grad() const { return node_ && !node_->grad.empty(); }
    void zero_grad();

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool b) { node_->requires_grad = b; }
    const std::string& name() const { return node_->name; }
    void set_name(std::string n) { node_->name = std::move(n); }

    // Reverse-mode pass from a scalar node: seeds grad 1 and walks the
    // reachable subgraph in reverse creation order.
    void backward() const;

    NodePtr node() const { return node_; }
    explicit Tensor(NodePtr n) : node_(std::move(n)) {}

private:
    size_t flat(int i, int j) const {
        return static_cast<size_t>(i) * static_cast<size_t>(node_->shape[1]) +
               static_cast<size_t>(j);
    }
    NodePtr node_;
};

// ---- differentiable ops ----------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);          // same shape
Tensor sub(const Tensor& a, const Tensor& b);          // same shape
Tensor mul(const Tensor& a, const Tensor& b);          // elementwise, same shape
Tensor scale(const Tensor& a, double c);
Tensor matmul(const Tensor& a, const Tensor& b);       // [n,k] x [k,m]
Tensor matmul_nt(const Tensor& a, const Tensor& b);    // [n,k] x [m,k]^T -> [n,m]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);  // [n,a]x[a,b]+[b]

Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);  // tanh approximation
Tensor tanh_op(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps);

// Gather rows of a [V,d] table; backward scatter-adds into the table.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

Tensor concat_cols(const std::vector<Tensor>& xs);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& x, int c0, int c1);    // half-open
Tensor slice_rows(const Tensor& x, int r0, int r1);    // half-open
Tensor row(const Tensor& x, int r);                    // [1, m]
Tensor stack_rows(const std::vector<Tensor>& rows);    // n x [1,m] -> [n,m]

// Row-wise softmax over the columns flagged valid; invalid columns get weight
// exactly 0. Throws MaskError when nothing is valid.
Tensor masked_softmax_rows(const Tensor& x, const std::vector<uint8_t>& col_valid);

// Mean negative log-softmax over unmasked rows, max-stabilized.
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets,
                     const std::vector<uint8_t>& loss_mask);

Tensor sum(const Tensor& x);  // -> scalar [1]

// Inverted-scaled dropout; identity when rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

}  // namespace relsem
