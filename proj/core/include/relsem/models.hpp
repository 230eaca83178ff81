// The three task assemblies: relation classifier (position-aware BiLSTM over
// the encoder output), predicate sense tagger (per-token MLP with indicator
// embeddings), and argument tagger (indicator-aware BiLSTM with
// predicate-conditioned per-token MLP).
#pragma once

#include <string>
#include <vector>

#include "relsem/checkpoint.hpp"
#include "relsem/encoding.hpp"
#include "relsem/eval.hpp"
#include "relsem/nn.hpp"
#include "relsem/tensor.hpp"

namespace relsem::models {

// Head sizes on top of the encoder.  Desk-scale defaults; `preset` offers
// full-scale values matching the standard pre-trained-encoder sizes.
struct HeadConfig {
  int lstm_hidden = 16;
  int mlp_hidden = 32;
  int pos_dim = 20;       // relative-position embedding width (relation task)
  int pos_clip = 64;      // distances clipped to [-pos_clip, +pos_clip] at lookup
  int indicator_dim = 10; // predicate indicator embedding width (tagging tasks)

  void validate() const;
  int pos_rows() const { return 2 * pos_clip + 1; }
};

struct Preset {
  nn::EncoderConfig encoder;  // vocab_size left 0 for the caller to fill in
  HeadConfig head;
};
// "tiny" (desk scale), "base", "large".  Unknown names raise ConfigError.
Preset preset(const std::string& name);

// Uniform prediction record across the three tasks.
struct LabeledPrediction {
  std::string label;                   // relation or sense label
  std::vector<std::string> word_tags;  // word-level BIO tags (argument task)
  eval::SpanSet spans;                 // decoded argument spans
};

class ReModel {
 public:
  ReModel(const nn::EncoderConfig& ecfg, const HeadConfig& hcfg, enc::LabelVocab relations,
          uint64_t seed);

  // Encoder output over the full template (all input rows).
  Tensor encode_hidden(const enc::ReEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  // Classification head on a given hidden matrix; only rows before keep_len
  // participate, so the discarded tail cannot influence the logits.
  Tensor head_logits(const Tensor& hidden, const enc::ReEncoded& e,
                         const nn::Mode& mode = nn::Mode::eval()) const;
  Tensor logits(const enc::ReEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  // Cross entropy against e.relation (resolved through the label vocab).
  Tensor loss(const enc::ReEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  LabeledPrediction predict(const enc::ReEncoded& e) const;

  nn::ParamMap& params() { return pm_; }
  const nn::ParamMap& params() const { return pm_; }
  std::vector<Tensor> trainable(bool freeze_encoder) const;
  const enc::LabelVocab& labels() const { return labels_; }
  const nn::EncoderConfig& encoder_config() const { return ecfg_; }
  const HeadConfig& head_config() const { return hcfg_; }

  void save(const std::string& path) const;
  static ReModel load(const std::string& path);

 private:
  nn::EncoderConfig ecfg_;
  HeadConfig hcfg_;
  enc::LabelVocab labels_;
  nn::ParamMap pm_;
  nn::Encoder encoder_;
  nn::Embedding subj_pos_, obj_pos_;
  nn::BiLstm lstm_;
  nn::Mlp mlp_;
};

class SenseModel {
 public:
  SenseModel(const nn::EncoderConfig& ecfg, const HeadConfig& hcfg, enc::LabelVocab labels,
             uint64_t seed);

  Tensor encode_hidden(const enc::SrlEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  Tensor head_logits(const Tensor& hidden, const enc::SrlEncoded& e,
                         const nn::Mode& mode = nn::Mode::eval()) const;
  // Per-token logits over the kept window: [keep_len, |labels|].
  Tensor logits(const enc::SrlEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  Tensor loss(const enc::SrlEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  // Highest sense class at the predicate's first piece; the outside and
  // sub-token tags never win at inference.
  LabeledPrediction predict(const enc::SrlEncoded& e) const;

  nn::ParamMap& params() { return pm_; }
  const nn::ParamMap& params() const { return pm_; }
  std::vector<Tensor> trainable(bool freeze_encoder) const;
  const enc::LabelVocab& labels() const { return labels_; }
  const nn::EncoderConfig& encoder_config() const { return ecfg_; }
  const HeadConfig& head_config() const { return hcfg_; }

  void save(const std::string& path) const;
  static SenseModel load(const std::string& path);

 private:
  nn::EncoderConfig ecfg_;
  HeadConfig hcfg_;
  enc::LabelVocab labels_;
  nn::ParamMap pm_;
  nn::Encoder encoder_;
  nn::Embedding indicator_;
  nn::Mlp mlp_;
};

class ArgModel {
 public:
  ArgModel(const nn::EncoderConfig& ecfg, const HeadConfig& hcfg, enc::LabelVocab labels,
           uint64_t seed);

  Tensor encode_hidden(const enc::SrlEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  Tensor head_logits(const Tensor& hidden, const enc::SrlEncoded& e,
                         const nn::Mode& mode = nn::Mode::eval()) const;
  Tensor logits(const enc::SrlEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  Tensor loss(const enc::SrlEncoded& e, const nn::Mode& mode = nn::Mode::eval()) const;
  // Word-level argmax (sub-token tag excluded) -> BIO decode.
  LabeledPrediction predict(const enc::SrlEncoded& e) const;

  nn::ParamMap& params() { return pm_; }
  const nn::ParamMap& params() const { return pm_; }
  std::vector<Tensor> trainable(bool freeze_encoder) const;
  const enc::LabelVocab& labels() const { return labels_; }
  const nn::EncoderConfig& encoder_config() const { return ecfg_; }
  const HeadConfig& head_config() const { return hcfg_; }

  void save(const std::string& path) const;
  static ArgModel load(const std::string& path);

 private:
  nn::EncoderConfig ecfg_;
  HeadConfig hcfg_;
  enc::LabelVocab labels_;
  nn::ParamMap pm_;
  nn::Encoder encoder_;
  nn::Embedding indicator_;
  nn::BiLstm lstm_;
  nn::Mlp mlp_;
};

// One-file model archive: kind tag, encoder and head configuration, label
// vocabulary, then the full parameter manifest.
struct ModelArchive {
  std::string kind;  // "re" | "sense" | "arg"
  nn::EncoderConfig encoder;
  HeadConfig head;
  std::vector<std::string> labels;
  std::vector<ckpt::ManifestEntry> params;
};
void save_archive(const std::string& path, const std::string& kind, const nn::EncoderConfig& ecfg,
                  const HeadConfig& hcfg, const enc::LabelVocab& labels, const nn::ParamMap& pm);
ModelArchive load_archive(const std::string& path);
// Kind tag of an archive on disk without loading parameters into a model.
std::string archive_kind(const std::string& path);

}  // namespace relsem::models
