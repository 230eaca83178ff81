// Task-specific input preparation: entity masking and relative-position
// sequences for relation classification, predicate-indicator sequences and
// sub-token label alignment for predicate sense and argument tagging.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relsem/errors.hpp"
#include "relsem/tokenizer.hpp"

namespace relsem::enc {

// One relation-classification example over a word-tokenized sentence.
// Entity spans are inclusive word indices.
struct ReInstance {
  std::string id;
  std::vector<std::string> words;
  int subj_start = 0, subj_end = 0;
  int obj_start = 0, obj_end = 0;
  std::string subj_type, obj_type;
  std::string relation;

  void validate() const;  // throws InstanceError
};

// One predicate frame for sense / argument tagging.  `arguments` are
// inclusive word spans; `sense` may be empty when only arguments are known.
struct SrlInstance {
  struct Arg {
    int start = 0, end = 0;
    std::string role;
  };

  std::string id;
  std::vector<std::string> words;
  int predicate = 0;
  std::string sense;
  std::vector<Arg> arguments;

  void validate() const;
};

// Dense bidirectional label <-> id map.
class LabelVocab {
 public:
  LabelVocab() = default;
  explicit LabelVocab(std::vector<std::string> labels);
  static LabelVocab from_file(const std::string& path);
  void save(const std::string& path) const;

  int id(const std::string& label) const;   // throws LabelError
  const std::string& label(int id) const;   // throws LabelError
  bool contains(const std::string& label) const;
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
};

// Tag spaces for the two tagging heads.  Both put the outside tag first and
// the sub-token padding tag second, then the task inventory in given order.
LabelVocab make_sense_labels(const std::vector<std::string>& senses);
LabelVocab make_arg_labels(const std::vector<std::string>& roles);
inline constexpr const char* kOutsideLabel = "O";
inline constexpr const char* kSubtokenLabel = "X";

// Sentence with entity spans replaced by mask placeholders, plus the spans'
// positions in the masked word sequence.  Default: one placeholder per span;
// `per_word` keeps span widths and masks each word individually.
struct MaskedSentence {
  std::vector<std::string> words;
  int subj_start = 0, subj_end = 0;
  int obj_start = 0, obj_end = 0;
};
MaskedSentence mask_entities(const ReInstance& inst, bool per_word = false);

// Relative position of every sequence slot to the inclusive span [s1, s2]:
// negative before, zero inside, positive after.  Values are raw word-piece
// offsets; clipping happens only at embedding lookup.
std::vector<int> position_sequence(int keep_len, int s1, int s2);

struct ReOptions {
  int max_positions = 128;
  bool mask_per_word = false;
};

struct ReEncoded {
  std::vector<int> input_ids;
  std::vector<int> segment_ids;
  std::vector<uint8_t> attn_mask;  // all ones until batch padding appends zeros
  int keep_len = 0;                // [CLS] + sentence pieces + first [SEP]
  int s1 = 0, s2 = 0;              // subject piece span, inclusive
  int o1 = 0, o2 = 0;              // object piece span, inclusive
  std::vector<int> pos_subj;       // length keep_len, unclipped
  std::vector<int> pos_obj;
  std::string relation;            // gold label carried through for training
  int relation_id = -1;            // resolved against a label vocab by the caller
};

// [CLS] masked-sentence [SEP] subject-words [SEP] object-words [SEP], with
// sentence words dropped from the right when the total exceeds
// max_positions.  Truncation that would cut an entity raises LengthError.
ReEncoded encode_re(const ReInstance& inst, const tok::Vocab& vocab, const ReOptions& opt = {});

struct SrlOptions {
  int max_positions = 128;
};

struct SrlEncoded {
  std::vector<int> input_ids;
  std::vector<int> segment_ids;
  std::vector<uint8_t> attn_mask;
  int keep_len = 0;
  std::vector<uint8_t> indicator;  // 1 on the predicate's pieces, length keep_len
  std::vector<int> labels;         // per-piece label ids, length keep_len
  std::vector<uint8_t> loss_mask;  // length keep_len
  int predicate_piece = 0;         // first piece of the predicate word
  std::vector<int> word_firsts;    // first-piece index of each kept word
};

// [CLS] sentence [SEP] predicate-word [SEP] with per-piece sense labels:
// sense at the predicate's first piece, outside tag on other word-initial
// pieces, sub-token tag on continuations.  Loss covers all sentence pieces.
SrlEncoded encode_sense(const SrlInstance& inst, const tok::Vocab& vocab,
                        const LabelVocab& labels, const SrlOptions& opt = {});

// Same template with BIO-over-words labels: each word's first piece carries
// its BIO tag, continuations carry the sub-token tag and are excluded from
// the loss along with [CLS]/[SEP].
SrlEncoded encode_arguments(const SrlInstance& inst, const tok::Vocab& vocab,
                            const LabelVocab& labels, const SrlOptions& opt = {});

// Gold word-level tags recovered from an argument encoding (one tag per kept
// word, read off the word-initial pieces).
std::vector<std::string> gold_word_tags(const SrlEncoded& e, const LabelVocab& labels);

}  // namespace relsem::enc
