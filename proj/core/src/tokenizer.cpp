#include "relsem/tokenizer.hpp"

#include <algorithm>
#include <fstream>

#include "relsem/errors.hpp"

namespace relsem::tok {

namespace {

const char* kControls[] = {Vocab::kPad, Vocab::kUnk, Vocab::kCls, Vocab::kSep};

}  // namespace

void Vocab::build_index() {
  index_.clear();
  index_.reserve(tokens_.size());
  for (size_t i = 0; i < tokens_.size(); ++i) index_.emplace_back(tokens_[i], static_cast<int>(i));
  std::sort(index_.begin(), index_.end());
  for (size_t i = 1; i < index_.size(); ++i) {
    if (index_[i].first == index_[i - 1].first) {
      throw VocabError("duplicate vocabulary token '" + index_[i].first + "' (lines " +
                       std::to_string(index_[i - 1].second + 1) + " and " +
                       std::to_string(index_[i].second + 1) + ")");
    }
  }
  auto locate = [&](const char* tok) {
    auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(std::string(tok), -1));
    if (it == index_.end() || it->first != tok)
      throw VocabError(std::string("vocabulary is missing control token ") + tok);
    return it->second;
  };
  pad_id_ = locate(kPad);
  unk_id_ = locate(kUnk);
  cls_id_ = locate(kCls);
  sep_id_ = locate(kSep);
}

Vocab Vocab::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open vocabulary file: " + path);
  Vocab v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty())
      throw FormatError("vocabulary file " + path + ": empty token at line " + std::to_string(lineno));
    v.tokens_.push_back(line);
  }
  if (v.tokens_.empty()) throw FormatError("vocabulary file " + path + " is empty");
  v.build_index();
  return v;
}

Vocab Vocab::from_tokens(const std::vector<std::string>& tokens) {
  Vocab v;
  for (const char* ctrl : kControls) {
    if (std::find(tokens.begin(), tokens.end(), ctrl) == tokens.end()) v.tokens_.push_back(ctrl);
  }
  for (const std::string& t : tokens) {
    if (t.empty()) throw VocabError("empty token in vocabulary list");
    v.tokens_.push_back(t);
  }
  v.build_index();
  return v;
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write vocabulary file: " + path);
  for (const std::string& t : tokens_) out << t << '\n';
  if (!out) throw FormatError("failed writing vocabulary file: " + path);
}

int Vocab::id(const std::string& token) const {
  auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(token, -1));
  if (it == index_.end() || it->first != token)
    throw VocabError("token '" + token + "' is not in the vocabulary");
  return it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size())
    throw VocabError("token id " + std::to_string(id) + " out of range [0, " +
                     std::to_string(size()) + ")");
  return tokens_[static_cast<size_t>(id)];
}

bool Vocab::contains(const std::string& token) const {
  auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(token, -1));
  return it != index_.end() && it->first == token;
}

bool Vocab::is_mask_token(const std::string& token) {
  return (token.size() > 5 && token.compare(0, 5, "SUBJ-") == 0) ||
         (token.size() > 4 && token.compare(0, 4, "OBJ-") == 0);
}

bool Vocab::is_control_token(const std::string& token) {
  for (const char* ctrl : kControls)
    if (token == ctrl) return true;
  return false;
}

bool Vocab::is_atomic(const std::string& token) {
  return is_control_token(token) || is_mask_token(token);
}

std::vector<size_t> utf8_boundaries(const std::string& text) {
  std::vector<size_t> bounds;
  size_t i = 0;
  while (i < text.size()) {
    bounds.push_back(i);
    unsigned char lead = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if (lead >= 0xF0)
      len = 4;
    else if (lead >= 0xE0)
      len = 3;
    else if (lead >= 0xC0)
      len = 2;
    // Clip to the string and to the actual run of continuation bytes, so a
    // truncated multi-byte sequence still advances one unit at a time.
    size_t j = i + 1;
    while (j < text.size() && j < i + len && (static_cast<unsigned char>(text[j]) & 0xC0) == 0x80) ++j;
    i = j;
  }
  bounds.push_back(text.size());
  return bounds;
}

std::vector<std::string> wordpiece(const std::string& word, const Vocab& vocab, int max_chars) {
  if (word.empty()) throw VocabError("cannot tokenize an empty word");
  if (Vocab::is_atomic(word)) return {word};

  const std::vector<size_t> bounds = utf8_boundaries(word);
  const int nchars = static_cast<int>(bounds.size()) - 1;
  if (nchars > max_chars) return {Vocab::kUnk};

  std::vector<std::string> pieces;
  int start = 0;
  while (start < nchars) {
    int matched_end = -1;
    std::string matched;
    for (int end = nchars; end > start; --end) {
      std::string sub = word.substr(bounds[start], bounds[end] - bounds[start]);
      if (start > 0) sub = Vocab::kContinuation + sub;
      if (vocab.contains(sub)) {
        matched_end = end;
        matched = std::move(sub);
        break;
      }
    }
    if (matched_end < 0) return {Vocab::kUnk};  // whole word falls back, not the tail
    pieces.push_back(std::move(matched));
    start = matched_end;
  }
  return pieces;
}

TokenizedSentence tokenize_words(const std::vector<std::string>& words, const Vocab& vocab) {
  TokenizedSentence out;
  for (const std::string& w : words) {
    std::vector<std::string> pieces = wordpiece(w, vocab);
    int first = out.piece_count();
    for (std::string& p : pieces) {
      out.ids.push_back(vocab.id(p));
      out.pieces.push_back(std::move(p));
    }
    out.word_pieces.emplace_back(first, out.piece_count());
  }
  return out;
}

}  // namespace relsem::tok
