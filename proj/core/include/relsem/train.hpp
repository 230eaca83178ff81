// Batched training loop shared by the three models: deterministic shuffling,
// right-padding, mean-of-instance losses, Adam with global-norm clipping,
// periodic dev evaluation with patience-based early stopping, and in-memory
// retention of the best parameters.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "relsem/errors.hpp"
#include "relsem/models.hpp"
#include "relsem/nn.hpp"
#include "relsem/rng.hpp"
#include "relsem/tensor.hpp"

namespace relsem::train {

struct TrainConfig {
  double lr = 5e-5;
  int batch_size = 8;
  int max_epochs = 50;
  uint64_t seed = 1;
  bool freeze_encoder = false;
  int eval_every = 1;   // epochs between dev evaluations
  int patience = 10;    // evaluations without improvement before stopping
  double dropout = 0.1;
  double clip_norm = 1.0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  bool evaluated = false;
  double dev_metric = 0.0;
};

struct History {
  std::vector<EpochRecord> records;
  int best_epoch = 0;
  double best_metric = 0.0;
  int epochs_run = 0;
  bool stopped_early = false;
};

// Plain-text table and tab-separated series forms of the history.
void write_history_text(std::ostream& out, const History& h);
void write_history_tsv(std::ostream& out, const History& h);

// Right-pads every instance to the longest input in the batch: [PAD] token
// ids, attention mask off, segment 0.  keep_len and everything derived from
// it are untouched, so the loss masking is unchanged.
template <typename Encoded>
std::vector<Encoded> pad_batch(std::vector<Encoded> batch, int pad_id) {
  if (batch.empty()) throw ConfigError("cannot pad an empty batch");
  size_t width = 0;
  for (const Encoded& e : batch) width = std::max(width, e.input_ids.size());
  for (Encoded& e : batch) {
    while (e.input_ids.size() < width) {
      e.input_ids.push_back(pad_id);
      e.segment_ids.push_back(0);
      e.attn_mask.push_back(0);
    }
  }
  return batch;
}

// Deterministic epoch ordering: a pure function of (seed, epoch).
std::vector<size_t> shuffled_indices(size_t n, uint64_t seed, int epoch);

// Dev metrics for early stopping; all "higher is better".
double relation_micro_f1(const models::ReModel& m, const std::vector<enc::ReEncoded>& dev,
                         const std::string& null_label);
double sense_accuracy_on(const models::SenseModel& m, const std::vector<enc::SrlEncoded>& dev);
double argument_micro_f1(const models::ArgModel& m, const std::vector<enc::SrlEncoded>& dev);

// Trains `model` on `train_set`, scoring `dev_set` with `dev_metric` (higher
// is better) every cfg.eval_every epochs.  The model's parameters end at the
// best dev score seen.  Model must provide loss(encoded, mode) and
// trainable(freeze_encoder).
template <typename Model, typename Encoded>
History fit(Model& model, const std::vector<Encoded>& train_set,
            const std::vector<Encoded>& dev_set, const TrainConfig& cfg,
            const std::function<double(const Model&, const std::vector<Encoded>&)>& dev_metric) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");

  const int pad_id = 0;  // [PAD] is id 0 in every vocabulary this project builds
  std::vector<Tensor> params = model.trainable(cfg.freeze_encoder);
  nn::AdamConfig acfg;
  acfg.lr = cfg.lr;
  nn::Adam opt(params, acfg);
  Rng dropout_rng(Rng::derive(cfg.seed, 0x9e3779b97f4a7c15ull));

  History h;
  std::vector<std::vector<double>> best_values;
  int evals_since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const std::vector<size_t> order = shuffled_indices(train_set.size(), cfg.seed, epoch);
    double epoch_loss = 0.0;
    size_t batch_index = 0;
    for (size_t at = 0; at < order.size(); at += static_cast<size_t>(cfg.batch_size), ++batch_index) {
      const size_t stop = std::min(order.size(), at + static_cast<size_t>(cfg.batch_size));
      std::vector<Encoded> batch;
      batch.reserve(stop - at);
      for (size_t k = at; k < stop; ++k) batch.push_back(train_set[order[k]]);
      batch = pad_batch(std::move(batch), pad_id);

      nn::Mode mode = cfg.dropout > 0.0 ? nn::Mode::train(cfg.dropout, dropout_rng)
                                        : nn::Mode::eval();
      Tensor total;
      for (const Encoded& e : batch) {
        Tensor li = model.loss(e, mode);
        total = total.defined() ? add(total, li) : li;
      }
      Tensor batch_loss = scale(total, 1.0 / static_cast<double>(batch.size()));
      const double lv = batch_loss.item();
      if (!std::isfinite(lv))
        throw NonFiniteError("batch " + std::to_string(batch_index) + " in epoch " +
                             std::to_string(epoch) + ": loss is not finite");
      epoch_loss += lv * static_cast<double>(batch.size());

      batch_loss.backward();
      nn::clip_global_norm(params, cfg.clip_norm);
      try {
        opt.step();
      } catch (const NonFiniteError& e) {
        throw NonFiniteError("batch " + std::to_string(batch_index) + " in epoch " +
                             std::to_string(epoch) + ": " + e.what());
      }
      opt.zero_grads();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(train_set.size());
    h.epochs_run = epoch;

    if (epoch % cfg.eval_every == 0) {
      rec.evaluated = true;
      rec.dev_metric = dev_metric(model, dev_set);
      const bool first = best_values.empty();
      if (first || rec.dev_metric > h.best_metric) {
        h.best_metric = rec.dev_metric;
        h.best_epoch = epoch;
        best_values.clear();
        for (const auto& [name, t] : model.params().items()) best_values.push_back(t.values());
        evals_since_best = 0;
      } else {
        ++evals_since_best;
      }
      h.records.push_back(rec);
      if (evals_since_best >= cfg.patience) {
        h.stopped_early = true;
        break;
      }
    } else {
      h.records.push_back(rec);
    }
  }

  if (!best_values.empty()) {
    size_t i = 0;
    for (auto& [name, t] : model.params().items()) {
      Tensor handle = t;
      handle.values() = best_values[i++];
    }
  }
  return h;
}

}  // namespace relsem::train
