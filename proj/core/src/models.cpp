#include "relsem/models.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "relsem/checkpoint.hpp"
#include "relsem/errors.hpp"

namespace relsem::models {

namespace {

constexpr char kArchiveMagic[8] = {'R', 'S', 'L', 'M', 'D', 'L', '0', '1'};

int clip_position(int p, int clip) { return std::clamp(p, -clip, clip) + clip; }

std::vector<int> clipped_positions(const std::vector<int>& raw, int clip) {
  std::vector<int> ids;
  ids.reserve(raw.size());
  for (int p : raw) ids.push_back(clip_position(p, clip));
  return ids;
}

int argmax_row(const Tensor& logits, int row, const std::vector<int>& skip_ids) {
  int best = -1;
  double best_v = 0.0;
  for (int j = 0; j < logits.dim(1); ++j) {
    if (std::find(skip_ids.begin(), skip_ids.end(), j) != skip_ids.end()) continue;
    double v = logits.at(row, j);
    if (best < 0 || v > best_v) {  // strict '>' keeps the lowest id on ties
      best = j;
      best_v = v;
    }
  }
  if (best < 0) throw LabelError("argmax over an empty class set");
  return best;
}

void check_re_encoded(const enc::ReEncoded& e) {
  const int total = static_cast<int>(e.input_ids.size());
  if (e.keep_len < 3 || e.keep_len > total)
    throw InstanceError("encoded instance: keep_len " + std::to_string(e.keep_len) +
                        " invalid for " + std::to_string(total) + " input ids");
  if (e.segment_ids.size() != e.input_ids.size() || e.attn_mask.size() != e.input_ids.size())
    throw ShapeError("encoded instance: segment/attention sequences disagree with input length");
  if (static_cast<int>(e.pos_subj.size()) != e.keep_len ||
      static_cast<int>(e.pos_obj.size()) != e.keep_len)
    throw ShapeError("encoded instance: position sequences must cover exactly the kept window");
}

void check_srl_encoded(const enc::SrlEncoded& e) {
  const int total = static_cast<int>(e.input_ids.size());
  if (e.keep_len < 3 || e.keep_len > total)
    throw InstanceError("encoded instance: keep_len " + std::to_string(e.keep_len) +
                        " invalid for " + std::to_string(total) + " input ids");
  if (e.segment_ids.size() != e.input_ids.size() || e.attn_mask.size() != e.input_ids.size())
    throw ShapeError("encoded instance: segment/attention sequences disagree with input length");
  if (static_cast<int>(e.indicator.size()) != e.keep_len ||
      static_cast<int>(e.labels.size()) != e.keep_len ||
      static_cast<int>(e.loss_mask.size()) != e.keep_len)
    throw ShapeError("encoded instance: indicator/label/loss sequences must cover the kept window");
  if (e.predicate_piece < 0 || e.predicate_piece >= e.keep_len)
    throw InstanceError("encoded instance: predicate piece " + std::to_string(e.predicate_piece) +
                        " outside the kept window of " + std::to_string(e.keep_len));
}

std::vector<int> indicator_ids(const enc::SrlEncoded& e) {
  std::vector<int> ids;
  ids.reserve(e.indicator.size());
  for (uint8_t b : e.indicator) ids.push_back(b ? 1 : 0);
  return ids;
}

std::vector<Tensor> filter_trainable(const nn::ParamMap& pm, bool freeze_encoder) {
  std::vector<Tensor> out;
  for (const auto& [name, t] : pm.items()) {
    if (freeze_encoder && name.rfind("encoder.", 0) == 0) continue;
    out.push_back(t);
  }
  return out;
}

}  // namespace

void HeadConfig::validate() const {
  if (lstm_hidden <= 0 || mlp_hidden <= 0 || pos_dim <= 0 || pos_clip <= 0 || indicator_dim <= 0)
    throw ConfigError("head config: all sizes must be positive");
}

Preset preset(const std::string& name) {
  Preset p;
  if (name == "tiny") {
    p.encoder = {2, 32, 4, 64, 0, 128, 0.1};
    p.head = {16, 32, 20, 64, 10};
  } else if (name == "base") {
    p.encoder = {12, 768, 12, 3072, 0, 512, 0.1};
    p.head = {768, 300, 20, 64, 10};
  } else if (name == "large") {
    p.encoder = {24, 1024, 16, 4096, 0, 512, 0.1};
    p.head = {768, 300, 20, 64, 10};
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected tiny, base, or large)");
  }
  return p;
}

// ---------------------------------------------------------------- ReModel

ReModel::ReModel(const nn::EncoderConfig& ecfg, const HeadConfig& hcfg, enc::LabelVocab relations,
                 uint64_t seed)
    : ecfg_(ecfg), hcfg_(hcfg), labels_(std::move(relations)) {
  ecfg_.validate();
  hcfg_.validate();
  if (labels_.size() == 0) throw ConfigError("relation model: empty label inventory");
  Rng rng(seed);
  encoder_ = nn::Encoder(pm_, "encoder", ecfg_, rng);
  subj_pos_ = nn::Embedding(pm_, "head.subj_pos", hcfg_.pos_rows(), hcfg_.pos_dim, rng);
  obj_pos_ = nn::Embedding(pm_, "head.obj_pos", hcfg_.pos_rows(), hcfg_.pos_dim, rng);
  lstm_ = nn::BiLstm(pm_, "head.lstm", ecfg_.model_dim + 2 * hcfg_.pos_dim, hcfg_.lstm_hidden, rng);
  mlp_ = nn::Mlp(pm_, "head.mlp", 2 * hcfg_.lstm_hidden, hcfg_.mlp_hidden, labels_.size(), rng);
}

Tensor ReModel::encode_hidden(const enc::ReEncoded& e, const nn::Mode& mode) const {
  check_re_encoded(e);
  return encoder_.forward(e.input_ids, e.segment_ids, e.attn_mask, mode);
}

Tensor ReModel::head_logits(const Tensor& hidden, const enc::ReEncoded& e,
                            const nn::Mode& mode) const {
  check_re_encoded(e);
  // Everything after the first separator is discarded here; only the kept
  // window feeds the head.
  Tensor kept = slice_rows(hidden, 0, e.keep_len);
  Tensor es = subj_pos_.forward(clipped_positions(e.pos_subj, hcfg_.pos_clip));
  Tensor eo = obj_pos_.forward(clipped_positions(e.pos_obj, hcfg_.pos_clip));
  Tensor x = concat_cols({kept, es, eo});
  nn::BiLstm::Out out = lstm_.forward(x);
  Tensor finals = concat_cols(out.final_fwd, out.final_bwd);
  return mlp_.forward(nn::maybe_dropout(finals, mode));
}

Tensor ReModel::logits(const enc::ReEncoded& e, const nn::Mode& mode) const {
  return head_logits(encode_hidden(e, mode), e, mode);
}

Tensor ReModel::loss(const enc::ReEncoded& e, const nn::Mode& mode) const {
  const int target = e.relation_id >= 0 ? e.relation_id : labels_.id(e.relation);
  return cross_entropy(logits(e, mode), {target}, {1});
}

LabeledPrediction ReModel::predict(const enc::ReEncoded& e) const {
  Tensor lg = logits(e);
  LabeledPrediction p;
  p.label = labels_.label(argmax_row(lg, 0, {}));
  return p;
}

std::vector<Tensor> ReModel::trainable(bool freeze_encoder) const {
  return filter_trainable(pm_, freeze_encoder);
}

void ReModel::save(const std::string& path) const {
  save_archive(path, "re", ecfg_, hcfg_, labels_, pm_);
}

ReModel ReModel::load(const std::string& path) {
  ModelArchive a = load_archive(path);
  if (a.kind != "re")
    throw CheckpointError("archive " + path + " holds a '" + a.kind + "' model, expected 're'");
  ReModel m(a.encoder, a.head, enc::LabelVocab(a.labels), 0);
  ckpt::load_into(m.pm_, a.params);
  return m;
}

// -------------------------------------------------------------- SenseModel

SenseModel::SenseModel(const nn::EncoderConfig& ecfg, const HeadConfig& hcfg,
                       enc::LabelVocab labels, uint64_t seed)
    : ecfg_(ecfg), hcfg_(hcfg), labels_(std::move(labels)) {
  ecfg_.validate();
  hcfg_.validate();
  if (!labels_.contains(enc::kOutsideLabel) || !labels_.contains(enc::kSubtokenLabel))
    throw ConfigError("sense model: label inventory must include the outside and sub-token tags");
  Rng rng(seed);
  encoder_ = nn::Encoder(pm_, "encoder", ecfg_, rng);
  indicator_ = nn::Embedding(pm_, "head.indicator", 2, hcfg_.indicator_dim, rng);
  mlp_ = nn::Mlp(pm_, "head.mlp", ecfg_.model_dim + hcfg_.indicator_dim, hcfg_.mlp_hidden,
                 labels_.size(), rng);
}

Tensor SenseModel::encode_hidden(const enc::SrlEncoded& e, const nn::Mode& mode) const {
  check_srl_encoded(e);
  return encoder_.forward(e.input_ids, e.segment_ids, e.attn_mask, mode);
}

Tensor SenseModel::head_logits(const Tensor& hidden, const enc::SrlEncoded& e,
                               const nn::Mode& mode) const {
  check_srl_encoded(e);
  Tensor kept = slice_rows(hidden, 0, e.keep_len);
  Tensor ind = indicator_.forward(indicator_ids(e));
  Tensor x = concat_cols(kept, ind);
  return mlp_.forward(nn::maybe_dropout(x, mode));
}

Tensor SenseModel::logits(const enc::SrlEncoded& e, const nn::Mode& mode) const {
  return head_logits(encode_hidden(e, mode), e, mode);
}

Tensor SenseModel::loss(const enc::SrlEncoded& e, const nn::Mode& mode) const {
  return cross_entropy(logits(e, mode), e.labels, e.loss_mask);
}

LabeledPrediction SenseModel::predict(const enc::SrlEncoded& e) const {
  Tensor lg = logits(e);
  const std::vector<int> skip = {labels_.id(enc::kOutsideLabel), labels_.id(enc::kSubtokenLabel)};
  LabeledPrediction p;
  p.label = labels_.label(argmax_row(lg, e.predicate_piece, skip));
  return p;
}

std::vector<Tensor> SenseModel::trainable(bool freeze_encoder) const {
  return filter_trainable(pm_, freeze_encoder);
}

void SenseModel::save(const std::string& path) const {
  save_archive(path, "sense", ecfg_, hcfg_, labels_, pm_);
}

SenseModel SenseModel::load(const std::string& path) {
  ModelArchive a = load_archive(path);
  if (a.kind != "sense")
    throw CheckpointError("archive " + path + " holds a '" + a.kind + "' model, expected 'sense'");
  SenseModel m(a.encoder, a.head, enc::LabelVocab(a.labels), 0);
  ckpt::load_into(m.pm_, a.params);
  return m;
}

// ---------------------------------------------------------------- ArgModel

ArgModel::ArgModel(const nn::EncoderConfig& ecfg, const HeadConfig& hcfg, enc::LabelVocab labels,
                   uint64_t seed)
    : ecfg_(ecfg), hcfg_(hcfg), labels_(std::move(labels)) {
  ecfg_.validate();
  hcfg_.validate();
  if (!labels_.contains(enc::kOutsideLabel) || !labels_.contains(enc::kSubtokenLabel))
    throw ConfigError("argument model: label inventory must include the outside and sub-token tags");
  Rng rng(seed);
  encoder_ = nn::Encoder(pm_, "encoder", ecfg_, rng);
  indicator_ = nn::Embedding(pm_, "head.indicator", 2, hcfg_.indicator_dim, rng);
  lstm_ = nn::BiLstm(pm_, "head.lstm", ecfg_.model_dim + hcfg_.indicator_dim, hcfg_.lstm_hidden,
                     rng);
  mlp_ = nn::Mlp(pm_, "head.mlp", 4 * hcfg_.lstm_hidden, hcfg_.mlp_hidden, labels_.size(), rng);
}

Tensor ArgModel::encode_hidden(const enc::SrlEncoded& e, const nn::Mode& mode) const {
  check_srl_encoded(e);
  return encoder_.forward(e.input_ids, e.segment_ids, e.attn_mask, mode);
}

Tensor ArgModel::head_logits(const Tensor& hidden, const enc::SrlEncoded& e,
                             const nn::Mode& mode) const {
  check_srl_encoded(e);
  Tensor kept = slice_rows(hidden, 0, e.keep_len);
  Tensor ind = indicator_.forward(indicator_ids(e));
  nn::BiLstm::Out out = lstm_.forward(concat_cols(kept, ind));
  // Every token's representation is paired with the predicate's.
  Tensor g_p = row(out.states, e.predicate_piece);
  std::vector<Tensor> rep(static_cast<size_t>(e.keep_len), g_p);
  Tensor x = concat_cols(out.states, stack_rows(rep));
  return mlp_.forward(nn::maybe_dropout(x, mode));
}

Tensor ArgModel::logits(const enc::SrlEncoded& e, const nn::Mode& mode) const {
  return head_logits(encode_hidden(e, mode), e, mode);
}

Tensor ArgModel::loss(const enc::SrlEncoded& e, const nn::Mode& mode) const {
  return cross_entropy(logits(e, mode), e.labels, e.loss_mask);
}

LabeledPrediction ArgModel::predict(const enc::SrlEncoded& e) const {
  Tensor lg = logits(e);
  const std::vector<int> skip = {labels_.id(enc::kSubtokenLabel)};
  LabeledPrediction p;
  p.word_tags.reserve(e.word_firsts.size());
  for (int first : e.word_firsts)
    p.word_tags.push_back(labels_.label(argmax_row(lg, first, skip)));
  p.spans = eval::decode_bio(p.word_tags);
  return p;
}

std::vector<Tensor> ArgModel::trainable(bool freeze_encoder) const {
  return filter_trainable(pm_, freeze_encoder);
}

void ArgModel::save(const std::string& path) const {
  save_archive(path, "arg", ecfg_, hcfg_, labels_, pm_);
}

ArgModel ArgModel::load(const std::string& path) {
  ModelArchive a = load_archive(path);
  if (a.kind != "arg")
    throw CheckpointError("archive " + path + " holds a '" + a.kind + "' model, expected 'arg'");
  ArgModel m(a.encoder, a.head, enc::LabelVocab(a.labels), 0);
  ckpt::load_into(m.pm_, a.params);
  return m;
}

// ----------------------------------------------------------------- archive

void save_archive(const std::string& path, const std::string& kind, const nn::EncoderConfig& ecfg,
                  const HeadConfig& hcfg, const enc::LabelVocab& labels, const nn::ParamMap& pm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write model archive: " + path);
  out.write(kArchiveMagic, 8);
  ckpt::put_str(out, kind);
  ckpt::put_u32(out, static_cast<uint32_t>(ecfg.layers));
  ckpt::put_u32(out, static_cast<uint32_t>(ecfg.model_dim));
  ckpt::put_u32(out, static_cast<uint32_t>(ecfg.heads));
  ckpt::put_u32(out, static_cast<uint32_t>(ecfg.ff_dim));
  ckpt::put_u32(out, static_cast<uint32_t>(ecfg.vocab_size));
  ckpt::put_u32(out, static_cast<uint32_t>(ecfg.max_positions));
  ckpt::put_f64(out, ecfg.dropout);
  ckpt::put_u32(out, static_cast<uint32_t>(hcfg.lstm_hidden));
  ckpt::put_u32(out, static_cast<uint32_t>(hcfg.mlp_hidden));
  ckpt::put_u32(out, static_cast<uint32_t>(hcfg.pos_dim));
  ckpt::put_u32(out, static_cast<uint32_t>(hcfg.pos_clip));
  ckpt::put_u32(out, static_cast<uint32_t>(hcfg.indicator_dim));
  ckpt::put_u32(out, static_cast<uint32_t>(labels.size()));
  for (const std::string& l : labels.labels()) ckpt::put_str(out, l);
  ckpt::write_manifest(out, pm);
  if (!out) throw CheckpointError("failed writing model archive: " + path);
}

ModelArchive load_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open model archive: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kArchiveMagic, 6) != 0)
    throw CheckpointError(path + ": not a model archive");
  if (std::memcmp(magic, kArchiveMagic, 8) != 0)
    throw CheckpointError(path + ": unsupported archive version");
  ModelArchive a;
  a.kind = ckpt::get_str(in);
  a.encoder.layers = static_cast<int>(ckpt::get_u32(in));
  a.encoder.model_dim = static_cast<int>(ckpt::get_u32(in));
  a.encoder.heads = static_cast<int>(ckpt::get_u32(in));
  a.encoder.ff_dim = static_cast<int>(ckpt::get_u32(in));
  a.encoder.vocab_size = static_cast<int>(ckpt::get_u32(in));
  a.encoder.max_positions = static_cast<int>(ckpt::get_u32(in));
  a.encoder.dropout = ckpt::get_f64(in);
  a.head.lstm_hidden = static_cast<int>(ckpt::get_u32(in));
  a.head.mlp_hidden = static_cast<int>(ckpt::get_u32(in));
  a.head.pos_dim = static_cast<int>(ckpt::get_u32(in));
  a.head.pos_clip = static_cast<int>(ckpt::get_u32(in));
  a.head.indicator_dim = static_cast<int>(ckpt::get_u32(in));
  uint32_t nlabels = ckpt::get_u32(in);
  for (uint32_t i = 0; i < nlabels; ++i) a.labels.push_back(ckpt::get_str(in));
  a.params = ckpt::read_manifest(in);
  return a;
}

std::string archive_kind(const std::string& path) { return load_archive(path).kind; }

}  // namespace relsem::models
