#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relsem/errors.hpp"
#include "relsem/rng.hpp"
#include "relsem/tensor.hpp"

namespace relsem::nn {

// Named parameters in registration order. Order is part of the determinism
// contract: initialization draws from one Rng stream in registration order.
class ParamMap {
public:
    Tensor& add(const std::string& name, Tensor t);
    Tensor* find(const std::string& name);
    const Tensor* find(const std::string& name) const;
    // Lookup that throws relsem::Error when the parameter does not exist.
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
    std::vector<Tensor> tensors() const;
    size_t total_values() const;
    void zero_grads();

private:
    std::vector<std::pair<std::string, Tensor>> items_;
    std::unordered_map<std::string, size_t> index_;
};

struct EncoderConfig {
    int layers = 2;
    int model_dim = 32;
    int heads = 4;
    int ff_dim = 64;
    int vocab_size = 0;
    int max_positions = 128;
    double dropout = 0.1;

    void validate() const;
};

// Per-forward context: training mode routes dropout through the given stream.
struct Mode {
    double dropout = 0.0;
    Rng* rng = nullptr;

    static Mode eval() { return {}; }
    static Mode train(double rate, Rng& rng) { return {rate, &rng}; }
    bool training() const { return rng != nullptr && dropout > 0.0; }
};

inline Tensor maybe_dropout(const Tensor& x, const Mode& mode) {
    return mode.training() ? dropout(x, mode.dropout, *mode.rng) : x;
}

class Linear {
public:
    Linear() = default;
    Linear(ParamMap& pm, const std::string& prefix, int in, int out, Rng& rng);
    Tensor forward(const Tensor& x) const { return linear(x, w_, b_); }
    int in_dim() const { return w_.dim(0); }
    int out_dim() const { return w_.dim(1); }

private:
    Tensor w_, b_;
};

class LayerNorm {
public:
    LayerNorm() = default;
    LayerNorm(ParamMap& pm, const std::string& prefix, int dim);
    Tensor forward(const Tensor& x) const { return layer_norm(x, gain_, shift_, kEps); }
    static constexpr double kEps = 1e-12;

private:
    Tensor gain_, shift_;
};

class Embedding {
public:
    Embedding() = default;
    Embedding(ParamMap& pm, const std::string& name, int rows, int dim, Rng& rng);
    Tensor forward(const std::vector<int>& ids) const { return embedding_rows(table_, ids); }
    int rows() const { return table_.dim(0); }
    int dim() const { return table_.dim(1); }

private:
    Tensor table_;
};

// Scaled dot-product self-attention. attn_mask flags real positions; padding
// positions (false) receive exactly zero attention weight.
class MultiHeadAttention {
public:
    MultiHeadAttention() = default;
    MultiHeadAttention(ParamMap& pm, const std::string& prefix, int model_dim, int heads,
                       Rng& rng);
    Tensor forward(const Tensor& x, const std::vector<uint8_t>& attn_mask) const;
    int heads() const { return heads_; }

private:
    Linear wq_, wk_, wv_, wo_;
    int heads_ = 0;
};

class EncoderLayer {
public:
    EncoderLayer() = default;
    EncoderLayer(ParamMap& pm, const std::string& prefix, const EncoderConfig& cfg, Rng& rng);
    Tensor forward(const Tensor& x, const std::vector<uint8_t>& attn_mask,
                   const Mode& mode) const;

private:
    MultiHeadAttention attn_;
    LayerNorm ln_attn_, ln_ff_;
    Linear ff_in_, ff_out_;
};

// Token + absolute-position + segment embeddings through a stack of post-norm
// attention/feed-forward blocks.
class Encoder {
public:
    Encoder() = default;
    Encoder(ParamMap& pm, const std::string& prefix, const EncoderConfig& cfg, Rng& rng);
    Tensor forward(const std::vector<int>& token_ids, const std::vector<int>& segment_ids,
                   const std::vector<uint8_t>& attn_mask, const Mode& mode = Mode::eval()) const;
    const EncoderConfig& config() const { return cfg_; }

private:
    EncoderConfig cfg_;
    Embedding tok_, pos_, seg_;
    LayerNorm ln_emb_;
    std::vector<EncoderLayer> layers_;
};

// One-layer bidirectional LSTM. states[i] = [fwd_i ; bwd_i]. When n_valid < n
// the trailing rows are treated as padding: they get zero states, the forward
// final state is taken after row n_valid-1 and the backward direction starts
// there.
class BiLstm {
public:
    struct Out {
        Tensor states;     // [n, 2*hidden]
        Tensor final_fwd;  // [1, hidden]
        Tensor final_bwd;  // [1, hidden]
    };

    BiLstm() = default;
    BiLstm(ParamMap& pm, const std::string& prefix, int input_dim, int hidden, Rng& rng);
    Out forward(const Tensor& seq, int n_valid = -1) const;
    int hidden() const { return hidden_; }

private:
    Tensor one_direction(const Tensor& seq, int n_valid, bool reverse,
                         std::vector<Tensor>& hs) const;
    // Gate layout in the 4H axis: input, forget, cell, output.
    Tensor fwd_wx_, fwd_wh_, fwd_b_, bwd_wx_, bwd_wh_, bwd_b_;
    int input_dim_ = 0, hidden_ = 0;
};

// linear -> relu -> linear, returning unnormalized logits.
class Mlp {
public:
    Mlp() = default;
    Mlp(ParamMap& pm, const std::string& prefix, int in, int hidden, int out, Rng& rng);
    Tensor forward(const Tensor& x) const;
    int out_dim() const { return l2_.out_dim(); }

private:
    Linear l1_, l2_;
};

struct AdamConfig {
    double lr = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam over an explicit parameter list.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig cfg);
    // Applies one update from the accumulated grads. Throws NonFiniteError
    // naming the parameter if any gradient entry is NaN/Inf.
    void step();
    void zero_grads();
    int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    AdamConfig cfg_;
    int64_t step_ = 0;
};

// Scales gradients so the global L2 norm is at most max_norm; returns the
// pre-clip norm.
double clip_global_norm(const std::vector<Tensor>& params, double max_norm);

}  // namespace relsem::nn
