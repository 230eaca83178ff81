// Sub-word tokenizer: greedy longest-match segmentation against a fixed
// vocabulary, with an invertible word -> sub-token alignment.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "relsem/errors.hpp"

namespace relsem::tok {

// Fixed token inventory.  Ids are line numbers in the vocabulary file.
class Vocab {
 public:
  static constexpr const char* kPad = "[PAD]";
  static constexpr const char* kUnk = "[UNK]";
  static constexpr const char* kCls = "[CLS]";
  static constexpr const char* kSep = "[SEP]";
  static constexpr const char* kContinuation = "##";

  // One token per line, id = zero-based line number.  The four control
  // tokens must all be present somewhere in the file.
  static Vocab from_file(const std::string& path);
  // Builds a vocabulary from a token list; the control tokens are prepended
  // automatically when absent so synthetic vocabularies stay convenient.
  static Vocab from_tokens(const std::vector<std::string>& tokens);

  void save(const std::string& path) const;

  int id(const std::string& token) const;  // throws VocabError when absent
  const std::string& token(int id) const;  // throws VocabError when out of range
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }

  // Entity-mask placeholders ("SUBJ-PER", "OBJ-ORG", ...) are never split.
  static bool is_mask_token(const std::string& token);
  static bool is_control_token(const std::string& token);
  // Atomic tokens bypass sub-word segmentation entirely.
  static bool is_atomic(const std::string& token);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::pair<std::string, int>> index_;  // sorted for lookup
  int pad_id_ = -1, unk_id_ = -1, cls_id_ = -1, sep_id_ = -1;

  void build_index();
};

// Sub-token sequence for a sentence together with the alignment needed to
// map word positions to sub-token positions and back.
struct TokenizedSentence {
  std::vector<std::string> pieces;
  std::vector<int> ids;
  // Half-open piece range [first, last) for each input word, in order.
  std::vector<std::pair<int, int>> word_pieces;

  int piece_count() const { return static_cast<int>(pieces.size()); }
  int word_count() const { return static_cast<int>(word_pieces.size()); }
};

// Byte offsets of UTF-8 code-point starts, plus one past-the-end offset.
// Malformed continuation bytes are treated as single-byte code points so the
// tokenizer degrades to [UNK] rather than crashing on dirty input.
std::vector<size_t> utf8_boundaries(const std::string& text);

// Greedy longest-match segmentation of one word.  Continuation pieces carry
// the "##" prefix.  Words longer than `max_chars` code points, and words with
// any unmatchable remainder, collapse to a single [UNK].
std::vector<std::string> wordpiece(const std::string& word, const Vocab& vocab,
                                   int max_chars = 100);

// Tokenizes every word and records the word -> piece alignment.  The
// concatenation of the per-word piece ranges reproduces `pieces` exactly.
TokenizedSentence tokenize_words(const std::vector<std::string>& words, const Vocab& vocab);

}  // namespace relsem::tok
