#include "relsem/encoding.hpp"

#include <algorithm>
#include <fstream>

#include "relsem/errors.hpp"
#include "relsem/eval.hpp"

namespace relsem::enc {

namespace {

void check_span(int start, int end, int n, const std::string& what, const std::string& id) {
  if (start < 0 || end < start || end >= n)
    throw InstanceError("instance " + (id.empty() ? "?" : id) + ": " + what + " span [" +
                        std::to_string(start) + ", " + std::to_string(end) +
                        "] invalid for a " + std::to_string(n) + "-word sentence");
}

}  // namespace

void ReInstance::validate() const {
  const int n = static_cast<int>(words.size());
  if (n == 0) throw InstanceError("instance " + (id.empty() ? "?" : id) + ": empty sentence");
  check_span(subj_start, subj_end, n, "subject", id);
  check_span(obj_start, obj_end, n, "object", id);
  const bool disjoint = subj_end < obj_start || obj_end < subj_start;
  if (!disjoint)
    throw InstanceError("instance " + (id.empty() ? "?" : id) +
                        ": subject and object spans overlap");
  if (subj_type.empty() || obj_type.empty())
    throw InstanceError("instance " + (id.empty() ? "?" : id) + ": missing entity type");
}

void SrlInstance::validate() const {
  const int n = static_cast<int>(words.size());
  if (n == 0) throw InstanceError("instance " + (id.empty() ? "?" : id) + ": empty sentence");
  if (predicate < 0 || predicate >= n)
    throw InstanceError("instance " + (id.empty() ? "?" : id) + ": predicate index " +
                        std::to_string(predicate) + " outside the sentence");
  std::vector<uint8_t> used(static_cast<size_t>(n), 0);
  for (const Arg& a : arguments) {
    check_span(a.start, a.end, n, "argument", id);
    if (a.role.empty())
      throw InstanceError("instance " + (id.empty() ? "?" : id) + ": argument with empty role");
    for (int i = a.start; i <= a.end; ++i) {
      if (used[static_cast<size_t>(i)])
        throw InstanceError("instance " + (id.empty() ? "?" : id) +
                            ": overlapping argument spans at word " + std::to_string(i));
      used[static_cast<size_t>(i)] = 1;
    }
  }
}

LabelVocab::LabelVocab(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw LabelError("empty label at position " + std::to_string(i));
    for (size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j]) throw LabelError("duplicate label '" + labels_[i] + "'");
  }
}

LabelVocab LabelVocab::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open label file: " + path);
  std::vector<std::string> labels;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty())
      throw FormatError("label file " + path + ": empty label at line " + std::to_string(lineno));
    labels.push_back(line);
  }
  if (labels.empty()) throw FormatError("label file " + path + " is empty");
  return LabelVocab(std::move(labels));
}

void LabelVocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write label file: " + path);
  for (const std::string& l : labels_) out << l << '\n';
  if (!out) throw FormatError("failed writing label file: " + path);
}

int LabelVocab::id(const std::string& label) const {
  for (size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  throw LabelError("label '" + label + "' is not in the label inventory");
}

const std::string& LabelVocab::label(int id) const {
  if (id < 0 || id >= size())
    throw LabelError("label id " + std::to_string(id) + " out of range [0, " +
                     std::to_string(size()) + ")");
  return labels_[static_cast<size_t>(id)];
}

bool LabelVocab::contains(const std::string& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

LabelVocab make_sense_labels(const std::vector<std::string>& senses) {
  std::vector<std::string> labels = {kOutsideLabel, kSubtokenLabel};
  labels.insert(labels.end(), senses.begin(), senses.end());
  return LabelVocab(std::move(labels));
}

LabelVocab make_arg_labels(const std::vector<std::string>& roles) {
  std::vector<std::string> labels = {kOutsideLabel, kSubtokenLabel};
  for (const std::string& r : roles) {
    labels.push_back("B-" + r);
    labels.push_back("I-" + r);
  }
  return LabelVocab(std::move(labels));
}

MaskedSentence mask_entities(const ReInstance& inst, bool per_word) {
  inst.validate();
  MaskedSentence out;
  const std::string subj_mask = "SUBJ-" + inst.subj_type;
  const std::string obj_mask = "OBJ-" + inst.obj_type;
  const int n = static_cast<int>(inst.words.size());
  for (int i = 0; i < n; ++i) {
    const bool in_subj = i >= inst.subj_start && i <= inst.subj_end;
    const bool in_obj = i >= inst.obj_start && i <= inst.obj_end;
    if (in_subj) {
      if (per_word || i == inst.subj_start) {
        if (i == inst.subj_start) out.subj_start = static_cast<int>(out.words.size());
        out.words.push_back(subj_mask);
        out.subj_end = static_cast<int>(out.words.size()) - 1;
      }
    } else if (in_obj) {
      if (per_word || i == inst.obj_start) {
        if (i == inst.obj_start) out.obj_start = static_cast<int>(out.words.size());
        out.words.push_back(obj_mask);
        out.obj_end = static_cast<int>(out.words.size()) - 1;
      }
    } else {
      out.words.push_back(inst.words[static_cast<size_t>(i)]);
    }
  }
  return out;
}

std::vector<int> position_sequence(int keep_len, int s1, int s2) {
  if (keep_len <= 0) throw InstanceError("position sequence over an empty window");
  if (s1 < 0 || s2 < s1 || s2 >= keep_len)
    throw InstanceError("position sequence span [" + std::to_string(s1) + ", " +
                        std::to_string(s2) + "] invalid for window " + std::to_string(keep_len));
  std::vector<int> pos(static_cast<size_t>(keep_len));
  for (int i = 0; i < keep_len; ++i) {
    if (i < s1)
      pos[static_cast<size_t>(i)] = i - s1;
    else if (i <= s2)
      pos[static_cast<size_t>(i)] = 0;
    else
      pos[static_cast<size_t>(i)] = i - s2;
  }
  return pos;
}

ReEncoded encode_re(const ReInstance& inst, const tok::Vocab& vocab, const ReOptions& opt) {
  inst.validate();
  const MaskedSentence masked = mask_entities(inst, opt.mask_per_word);
  const tok::TokenizedSentence sent = tok::tokenize_words(masked.words, vocab);

  std::vector<std::string> subj_words(inst.words.begin() + inst.subj_start,
                                      inst.words.begin() + inst.subj_end + 1);
  std::vector<std::string> obj_words(inst.words.begin() + inst.obj_start,
                                     inst.words.begin() + inst.obj_end + 1);
  const tok::TokenizedSentence subj = tok::tokenize_words(subj_words, vocab);
  const tok::TokenizedSentence obj = tok::tokenize_words(obj_words, vocab);

  // [CLS] + sentence + [SEP] + subject + [SEP] + object + [SEP]
  const int overhead = 4 + subj.piece_count() + obj.piece_count();
  const int min_words = std::max(masked.subj_end, masked.obj_end) + 1;
  int kept_words = masked.words.empty() ? 0 : static_cast<int>(masked.words.size());
  auto pieces_for = [&](int w) { return w == 0 ? 0 : sent.word_pieces[static_cast<size_t>(w) - 1].second; };
  while (kept_words > min_words && pieces_for(kept_words) + overhead > opt.max_positions)
    --kept_words;
  if (pieces_for(kept_words) + overhead > opt.max_positions)
    throw LengthError("instance " + (inst.id.empty() ? "?" : inst.id) + ": needs " +
                      std::to_string(pieces_for(kept_words) + overhead) +
                      " positions even after truncation (window " +
                      std::to_string(opt.max_positions) + ")");

  const int kept_pieces = pieces_for(kept_words);
  ReEncoded e;
  e.keep_len = kept_pieces + 2;
  e.input_ids.push_back(vocab.cls_id());
  e.input_ids.insert(e.input_ids.end(), sent.ids.begin(), sent.ids.begin() + kept_pieces);
  e.input_ids.push_back(vocab.sep_id());
  e.input_ids.insert(e.input_ids.end(), subj.ids.begin(), subj.ids.end());
  e.input_ids.push_back(vocab.sep_id());
  e.input_ids.insert(e.input_ids.end(), obj.ids.begin(), obj.ids.end());
  e.input_ids.push_back(vocab.sep_id());

  e.s1 = 1 + sent.word_pieces[static_cast<size_t>(masked.subj_start)].first;
  e.s2 = 1 + sent.word_pieces[static_cast<size_t>(masked.subj_end)].second - 1;
  e.o1 = 1 + sent.word_pieces[static_cast<size_t>(masked.obj_start)].first;
  e.o2 = 1 + sent.word_pieces[static_cast<size_t>(masked.obj_end)].second - 1;
  e.pos_subj = position_sequence(e.keep_len, e.s1, e.s2);
  e.pos_obj = position_sequence(e.keep_len, e.o1, e.o2);

  const int total = static_cast<int>(e.input_ids.size());
  e.segment_ids.assign(static_cast<size_t>(total), 1);
  for (int i = 0; i < e.keep_len; ++i) e.segment_ids[static_cast<size_t>(i)] = 0;
  e.attn_mask.assign(static_cast<size_t>(total), 1);
  e.relation = inst.relation;
  return e;
}

namespace {

// Shared template assembly for the two tagging tasks:
// [CLS] sentence [SEP] predicate-word [SEP].
SrlEncoded build_srl_frame(const SrlInstance& inst, const tok::Vocab& vocab,
                           const SrlOptions& opt, int min_words) {
  const tok::TokenizedSentence sent = tok::tokenize_words(inst.words, vocab);
  const std::vector<std::string> pred_word = {inst.words[static_cast<size_t>(inst.predicate)]};
  const tok::TokenizedSentence pred = tok::tokenize_words(pred_word, vocab);

  const int overhead = 3 + pred.piece_count();
  auto pieces_for = [&](int w) { return w == 0 ? 0 : sent.word_pieces[static_cast<size_t>(w) - 1].second; };
  int kept_words = static_cast<int>(inst.words.size());
  while (kept_words > min_words && pieces_for(kept_words) + overhead > opt.max_positions)
    --kept_words;
  if (pieces_for(kept_words) + overhead > opt.max_positions)
    throw LengthError("instance " + (inst.id.empty() ? "?" : inst.id) + ": needs " +
                      std::to_string(pieces_for(kept_words) + overhead) +
                      " positions even after truncation (window " +
                      std::to_string(opt.max_positions) + ")");

  const int kept_pieces = pieces_for(kept_words);
  SrlEncoded e;
  e.keep_len = kept_pieces + 2;
  e.input_ids.push_back(vocab.cls_id());
  e.input_ids.insert(e.input_ids.end(), sent.ids.begin(), sent.ids.begin() + kept_pieces);
  e.input_ids.push_back(vocab.sep_id());
  e.input_ids.insert(e.input_ids.end(), pred.ids.begin(), pred.ids.end());
  e.input_ids.push_back(vocab.sep_id());

  const int total = static_cast<int>(e.input_ids.size());
  e.segment_ids.assign(static_cast<size_t>(total), 1);
  for (int i = 0; i < e.keep_len; ++i) e.segment_ids[static_cast<size_t>(i)] = 0;
  e.attn_mask.assign(static_cast<size_t>(total), 1);

  e.indicator.assign(static_cast<size_t>(e.keep_len), 0);
  const auto [pfirst, plast] = sent.word_pieces[static_cast<size_t>(inst.predicate)];
  for (int p = pfirst; p < plast; ++p) e.indicator[static_cast<size_t>(1 + p)] = 1;
  e.predicate_piece = 1 + pfirst;

  e.word_firsts.reserve(static_cast<size_t>(kept_words));
  for (int w = 0; w < kept_words; ++w)
    e.word_firsts.push_back(1 + sent.word_pieces[static_cast<size_t>(w)].first);

  // Continuation tagging shared by both tasks; task code overwrites the
  // word-initial pieces afterwards.
  e.labels.assign(static_cast<size_t>(e.keep_len), 0);
  e.loss_mask.assign(static_cast<size_t>(e.keep_len), 0);
  return e;
}

}  // namespace

SrlEncoded encode_sense(const SrlInstance& inst, const tok::Vocab& vocab,
                        const LabelVocab& labels, const SrlOptions& opt) {
  inst.validate();
  if (inst.sense.empty())
    throw InstanceError("instance " + (inst.id.empty() ? "?" : inst.id) +
                        ": predicate sense is required for sense encoding");
  const int o_id = labels.id(kOutsideLabel);
  const int x_id = labels.id(kSubtokenLabel);
  const int sense_id = labels.id(inst.sense);

  SrlEncoded e = build_srl_frame(inst, vocab, opt, inst.predicate + 1);
  std::fill(e.labels.begin(), e.labels.end(), o_id);
  // Sense tagging trains on every sentence sub-token: word-initial pieces
  // are O (or the sense), continuations are X.
  const int kept_words = static_cast<int>(e.word_firsts.size());
  for (int w = 0; w < kept_words; ++w) {
    const int first = e.word_firsts[static_cast<size_t>(w)];
    const int next = (w + 1 < kept_words) ? e.word_firsts[static_cast<size_t>(w + 1)]
                                          : e.keep_len - 1;
    for (int p = first; p < next; ++p) {
      e.labels[static_cast<size_t>(p)] = (p == first) ? o_id : x_id;
      e.loss_mask[static_cast<size_t>(p)] = 1;
    }
  }
  e.labels[static_cast<size_t>(e.predicate_piece)] = sense_id;
  return e;
}

SrlEncoded encode_arguments(const SrlInstance& inst, const tok::Vocab& vocab,
                            const LabelVocab& labels, const SrlOptions& opt) {
  inst.validate();
  const int x_id = labels.id(kSubtokenLabel);
  const int o_id = labels.id(kOutsideLabel);

  int min_words = inst.predicate + 1;
  eval::SpanSet spans;
  for (const SrlInstance::Arg& a : inst.arguments) {
    min_words = std::max(min_words, a.end + 1);
    spans.insert({a.start, a.end, a.role});
  }
  SrlEncoded e = build_srl_frame(inst, vocab, opt, min_words);
  std::fill(e.labels.begin(), e.labels.end(), o_id);

  const int kept_words = static_cast<int>(e.word_firsts.size());
  const std::vector<std::string> word_tags =
      eval::encode_bio(spans, static_cast<int>(inst.words.size()));
  for (int w = 0; w < kept_words; ++w) {
    const int first = e.word_firsts[static_cast<size_t>(w)];
    const int next = (w + 1 < kept_words) ? e.word_firsts[static_cast<size_t>(w + 1)]
                                          : e.keep_len - 1;
    e.labels[static_cast<size_t>(first)] = labels.id(word_tags[static_cast<size_t>(w)]);
    e.loss_mask[static_cast<size_t>(first)] = 1;
    for (int p = first + 1; p < next; ++p) e.labels[static_cast<size_t>(p)] = x_id;
  }
  return e;
}

std::vector<std::string> gold_word_tags(const SrlEncoded& e, const LabelVocab& labels) {
  std::vector<std::string> tags;
  tags.reserve(e.word_firsts.size());
  for (int first : e.word_firsts) tags.push_back(labels.label(e.labels[static_cast<size_t>(first)]));
  return tags;
}

}  // namespace relsem::enc
