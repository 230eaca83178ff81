#include "relsem/nn.hpp"

#include <cmath>

namespace relsem::nn {

namespace {
constexpr double kInitStd = 0.02;
}

// ---- ParamMap ---------------------------------------------------------------

Tensor& ParamMap::add(const std::string& name, Tensor t) {
    if (index_.count(name)) throw ConfigError("duplicate parameter name: " + name);
    t.set_requires_grad(true);
    t.set_name(name);
    items_.emplace_back(name, std::move(t));
    index_[name] = items_.size() - 1;
    return items_.back().second;
}

Tensor* ParamMap::find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second].second;
}

const Tensor* ParamMap::find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second].second;
}

Tensor& ParamMap::at(const std::string& name) {
    Tensor* t = find(name);
    if (!t) throw Error("no parameter named '" + name + "'");
    return *t;
}

const Tensor& ParamMap::at(const std::string& name) const {
    const Tensor* t = find(name);
    if (!t) throw Error("no parameter named '" + name + "'");
    return *t;
}

std::vector<Tensor> ParamMap::tensors() const {
    std::vector<Tensor> out;
    out.reserve(items_.size());
    for (const auto& [name, t] : items_) out.push_back(t);
    return out;
}

size_t ParamMap::total_values() const {
    size_t n = 0;
    for (const auto& [name, t] : items_) n += t.size();
    return n;
}

void ParamMap::zero_grads() {
    for (auto& [name, t] : items_) t.zero_grad();
}

// ---- EncoderConfig ----------------------------------------------------------

void EncoderConfig::validate() const {
    if (layers < 1 || model_dim < 1 || heads < 1 || ff_dim < 1 || vocab_size < 1 ||
        max_positions < 1)
        throw ConfigError("encoder config: all counts must be >= 1");
    if (model_dim % heads != 0)
        throw ConfigError("encoder config: model_dim " + std::to_string(model_dim) +
                          " not divisible by heads " + std::to_string(heads));
    if (dropout < 0.0 || dropout >= 1.0)
        throw ConfigError("encoder config: dropout " + std::to_string(dropout) +
                          " outside [0,1)");
}

// ---- layers -------------------------------------------------------------------

Linear::Linear(ParamMap& pm, const std::string& prefix, int in, int out, Rng& rng) {
    w_ = pm.add(prefix + ".w", Tensor::randn_trunc({in, out}, kInitStd, rng));
    b_ = pm.add(prefix + ".b", Tensor::zeros({out}));
}

LayerNorm::LayerNorm(ParamMap& pm, const std::string& prefix, int dim) {
    gain_ = pm.add(prefix + ".gain", Tensor::full({dim}, 1.0));
    shift_ = pm.add(prefix + ".shift", Tensor::zeros({dim}));
}

Embedding::Embedding(ParamMap& pm, const std::string& name, int rows, int dim, Rng& rng) {
    table_ = pm.add(name, Tensor::randn_trunc({rows, dim}, kInitStd, rng));
}

MultiHeadAttention::MultiHeadAttention(ParamMap& pm, const std::string& prefix, int model_dim,
                                       int heads, Rng& rng)
    : heads_(heads) {
    if (model_dim % heads != 0)
        throw ConfigError("attention: model_dim " + std::to_string(model_dim) +
                          " not divisible by heads " + std::to_string(heads));
    wq_ = Linear(pm, prefix + ".wq", model_dim, model_dim, rng);
    wk_ = Linear(pm, prefix + ".wk", model_dim, model_dim, rng);
    wv_ = Linear(pm, prefix + ".wv", model_dim, model_dim, rng);
    wo_ = Linear(pm, prefix + ".wo", model_dim, model_dim, rng);
}

Tensor MultiHeadAttention::forward(const Tensor& x, const std::vector<uint8_t>& attn_mask) const {
    const int n = x.dim(0), d = x.dim(1);
    if (static_cast<int>(attn_mask.size()) != n)
        throw ShapeError("attention: mask length " + std::to_string(attn_mask.size()) + " vs " +
                         std::to_string(n) + " positions");
    const int dh = d / heads_;
    Tensor q = wq_.forward(x);
    Tensor k = wk_.forward(x);
    Tensor v = wv_.forward(x);
    std::vector<Tensor> head_outs;
    head_outs.reserve(static_cast<size_t>(heads_));
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    for (int h = 0; h < heads_; ++h) {
        Tensor qh = slice_cols(q, h * dh, (h + 1) * dh);
        Tensor kh = slice_cols(k, h * dh, (h + 1) * dh);
        Tensor vh = slice_cols(v, h * dh, (h + 1) * dh);
        Tensor scores = scale(matmul_nt(qh, kh), inv_sqrt);
        Tensor probs = masked_softmax_rows(scores, attn_mask);
        head_outs.push_back(matmul(probs, vh));
    }
    return wo_.forward(concat_cols(head_outs));
}

EncoderLayer::EncoderLayer(ParamMap& pm, const std::string& prefix, const EncoderConfig& cfg,
                           Rng& rng) {
    attn_ = MultiHeadAttention(pm, prefix + ".attn", cfg.model_dim, cfg.heads, rng);
    ln_attn_ = LayerNorm(pm, prefix + ".ln_attn", cfg.model_dim);
    ln_ff_ = LayerNorm(pm, prefix + ".ln_ff", cfg.model_dim);
    ff_in_ = Linear(pm, prefix + ".ff_in", cfg.model_dim, cfg.ff_dim, rng);
    ff_out_ = Linear(pm, prefix + ".ff_out", cfg.ff_dim, cfg.model_dim, rng);
}

Tensor EncoderLayer::forward(const Tensor& x, const std::vector<uint8_t>& attn_mask,
                             const Mode& mode) const {
    Tensor a = maybe_dropout(attn_.forward(x, attn_mask), mode);
    Tensor h = ln_attn_.forward(add(x, a));
    Tensor f = maybe_dropout(ff_out_.forward(gelu(ff_in_.forward(h))), mode);
    return ln_ff_.forward(add(h, f));
}

Encoder::Encoder(ParamMap& pm, const std::string& prefix, const EncoderConfig& cfg, Rng& rng)
    : cfg_(cfg) {
    cfg_.validate();
    tok_ = Embedding(pm, prefix + ".tok_emb", cfg.vocab_size, cfg.model_dim, rng);
    pos_ = Embedding(pm, prefix + ".pos_emb", cfg.max_positions, cfg.model_dim, rng);
    seg_ = Embedding(pm, prefix + ".seg_emb", 2, cfg.model_dim, rng);
    ln_emb_ = LayerNorm(pm, prefix + ".ln_emb", cfg.model_dim);
    layers_.reserve(static_cast<size_t>(cfg.layers));
    for (int l = 0; l < cfg.layers; ++l)
        layers_.emplace_back(pm, prefix + ".layer" + std::to_string(l), cfg, rng);
}

Tensor Encoder::forward(const std::vector<int>& token_ids, const std::vector<int>& segment_ids,
                        const std::vector<uint8_t>& attn_mask, const Mode& mode) const {
    const int n = static_cast<int>(token_ids.size());
    if (n == 0) throw LengthError("encoder: empty input");
    if (n > cfg_.max_positions)
        throw LengthError("encoder: input of " + std::to_string(n) + " tokens exceeds " +
                          std::to_string(cfg_.max_positions) + " positions");
    if (segment_ids.size() != token_ids.size() || attn_mask.size() != token_ids.size())
        throw ShapeError("encoder: token/segment/mask lengths disagree");
    for (int id : token_ids)
        if (id < 0 || id >= cfg_.vocab_size)
            throw VocabError("encoder: token id " + std::to_string(id) + " outside vocabulary of " +
                             std::to_string(cfg_.vocab_size));
    for (int s : segment_ids)
        if (s < 0 || s > 1) throw VocabError("encoder: segment id must be 0 or 1");

    std::vector<int> positions(token_ids.size());
    for (int i = 0; i < n; ++i) positions[static_cast<size_t>(i)] = i;

    Tensor h = add(add(tok_.forward(token_ids), pos_.forward(positions)),
                   seg_.forward(segment_ids));
    h = maybe_dropout(ln_emb_.forward(h), mode);
    for (const auto& layer : layers_) h = layer.forward(h, attn_mask, mode);
    return h;
}

// ---- BiLSTM -------------------------------------------------------------------

BiLstm::BiLstm(ParamMap& pm, const std::string& prefix, int input_dim, int hidden, Rng& rng)
    : input_dim_(input_dim), hidden_(hidden) {
    fwd_wx_ = pm.add(prefix + ".fwd.wx", Tensor::randn_trunc({input_dim, 4 * hidden}, kInitStd, rng));
    fwd_wh_ = pm.add(prefix + ".fwd.wh", Tensor::randn_trunc({hidden, 4 * hidden}, kInitStd, rng));
    fwd_b_ = pm.add(prefix + ".fwd.b", Tensor::zeros({4 * hidden}));
    bwd_wx_ = pm.add(prefix + ".bwd.wx", Tensor::randn_trunc({input_dim, 4 * hidden}, kInitStd, rng));
    bwd_wh_ = pm.add(prefix + ".bwd.wh", Tensor::randn_trunc({hidden, 4 * hidden}, kInitStd, rng));
    bwd_b_ = pm.add(prefix + ".bwd.b", Tensor::zeros({4 * hidden}));
}

Tensor BiLstm::one_direction(const Tensor& seq, int n_valid, bool reverse,
                             std::vector<Tensor>& hs) const {
    const Tensor& wx = reverse ? bwd_wx_ : fwd_wx_;
    const Tensor& wh = reverse ? bwd_wh_ : fwd_wh_;
    const Tensor& b = reverse ? bwd_b_ : fwd_b_;
    const int h_dim = hidden_;
    Tensor h = Tensor::zeros({1, h_dim});
    Tensor c = Tensor::zeros({1, h_dim});
    hs.assign(static_cast<size_t>(seq.dim(0)), Tensor());
    for (int step = 0; step < n_valid; ++step) {
        int t = reverse ? n_valid - 1 - step : step;
        Tensor xt = row(seq, t);
        Tensor z = add(linear(xt, wx, b), matmul(h, wh));
        Tensor gi = sigmoid(slice_cols(z, 0, h_dim));
        Tensor gf = sigmoid(slice_cols(z, h_dim, 2 * h_dim));
        Tensor gg = tanh_op(slice_cols(z, 2 * h_dim, 3 * h_dim));
        Tensor go = sigmoid(slice_cols(z, 3 * h_dim, 4 * h_dim));
        c = add(mul(gf, c), mul(gi, gg));
        h = mul(go, tanh_op(c));
        hs[static_cast<size_t>(t)] = h;
    }
    for (int t = n_valid; t < seq.dim(0); ++t)
        hs[static_cast<size_t>(t)] = Tensor::zeros({1, h_dim});
    return h;  // state after the last processed step
}

BiLstm::Out BiLstm::forward(const Tensor& seq, int n_valid) const {
    if (seq.ndim() != 2 || seq.dim(0) == 0) throw ShapeError("bilstm: empty sequence");
    if (seq.dim(1) != input_dim_)
        throw ShapeError("bilstm: input axis disagrees (" + std::to_string(seq.dim(1)) + " vs " +
                         std::to_string(input_dim_) + ")");
    const int n = seq.dim(0);
    if (n_valid < 0) n_valid = n;
    if (n_valid == 0 || n_valid > n)
        throw ShapeError("bilstm: n_valid " + std::to_string(n_valid) + " outside [1," +
                         std::to_string(n) + "]");
    std::vector<Tensor> fwd_h, bwd_h;
    Tensor final_fwd = one_direction(seq, n_valid, false, fwd_h);
    Tensor final_bwd = one_direction(seq, n_valid, true, bwd_h);
    std::vector<Tensor> rows;
    rows.reserve(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) rows.push_back(concat_cols(fwd_h[static_cast<size_t>(t)],
                                                           bwd_h[static_cast<size_t>(t)]));
    return Out{stack_rows(rows), final_fwd, final_bwd};
}

// ---- MLP ------------------------------------------------------------------------

Mlp::Mlp(ParamMap& pm, const std::string& prefix, int in, int hidden, int out, Rng& rng) {
    if (hidden < 1 || out < 1) throw ConfigError("mlp: hidden and out must be >= 1");
    l1_ = Linear(pm, prefix + ".l1", in, hidden, rng);
    l2_ = Linear(pm, prefix + ".l2", hidden, out, rng);
}

Tensor Mlp::forward(const Tensor& x) const { return l2_.forward(relu(l1_.forward(x))); }

// ---- Adam -----------------------------------------------------------------------

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.lr <= 0.0) throw ConfigError("adam: learning rate must be positive");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
    }
}

void Adam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& p = params_[pi];
        if (!p.has_grad()) continue;  // no gradient reached this parameter
        const auto& g = p.grad();
        auto& val = p.values();
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw NonFiniteError("adam: non-finite gradient in parameter '" +
                                     (p.name().empty() ? std::string("<unnamed>") : p.name()) +
                                     "' at element " + std::to_string(i));
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            val[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grads() {
    for (auto& p : params_) p.zero_grad();
}

double clip_global_norm(const std::vector<Tensor>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params) {
        if (!p.has_grad()) continue;
        for (double g : p.grad()) sq += g * g;
    }
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        const double s = max_norm / norm;
        for (const auto& p : params) {
            if (!p.has_grad()) continue;
            Tensor handle = p;  // tensors are shared handles; writes reach the node
            for (double& gi : handle.grad()) gi *= s;
        }
    }
    return norm;
}

}  // namespace relsem::nn
