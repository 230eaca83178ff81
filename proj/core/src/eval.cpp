#include "relsem/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "relsem/errors.hpp"

namespace relsem::eval {

namespace {

bool has_prefix(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

void check_paired(size_t gold, size_t pred, const char* what) {
  if (gold != pred)
    throw PairingError(std::string(what) + ": gold has " + std::to_string(gold) +
                       " instances but predictions have " + std::to_string(pred));
}

}  // namespace

SpanSet decode_bio(const std::vector<std::string>& tags) {
  SpanSet spans;
  bool open = false;
  Span cur;
  auto close = [&]() {
    if (open) spans.insert(cur);
    open = false;
  };
  for (int i = 0; i < static_cast<int>(tags.size()); ++i) {
    const std::string& t = tags[static_cast<size_t>(i)];
    if (t == "O") {
      close();
    } else if (has_prefix(t, "B-") && t.size() > 2) {
      close();
      cur = {i, i, t.substr(2)};
      open = true;
    } else if (has_prefix(t, "I-") && t.size() > 2) {
      std::string role = t.substr(2);
      if (open && cur.role == role) {
        cur.end = i;
      } else {
        close();
        cur = {i, i, role};  // stray I- opens a span rather than failing
        open = true;
      }
    } else {
      throw LabelError("unrecognized BIO tag '" + t + "' at position " + std::to_string(i));
    }
  }
  close();
  return spans;
}

std::vector<std::string> encode_bio(const SpanSet& spans, int len) {
  std::vector<std::string> tags(static_cast<size_t>(len), "O");
  for (const Span& s : spans) {
    if (s.start < 0 || s.end < s.start || s.end >= len)
      throw LabelError("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                       "] does not fit a length-" + std::to_string(len) + " sentence");
    for (int i = s.start; i <= s.end; ++i) {
      if (tags[static_cast<size_t>(i)] != "O")
        throw LabelError("overlapping spans at word " + std::to_string(i));
      tags[static_cast<size_t>(i)] = (i == s.start ? "B-" : "I-") + s.role;
    }
  }
  return tags;
}

ScoreReport from_counts(long gold, long predicted, long matched) {
  ScoreReport r;
  r.gold = gold;
  r.predicted = predicted;
  r.matched = matched;
  r.precision = predicted > 0 ? static_cast<double>(matched) / static_cast<double>(predicted) : 0.0;
  r.recall = gold > 0 ? static_cast<double>(matched) / static_cast<double>(gold) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                        : 0.0;
  return r;
}

ScoreReport score_spans(const std::vector<SpanSet>& gold, const std::vector<SpanSet>& pred) {
  check_paired(gold.size(), pred.size(), "span scorer");
  long g = 0, p = 0, m = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    g += static_cast<long>(gold[i].size());
    p += static_cast<long>(pred[i].size());
    for (const Span& s : pred[i])
      if (gold[i].count(s)) ++m;
  }
  return from_counts(g, p, m);
}

ScoreReport score_dependency(const std::vector<SpanSet>& gold, const std::vector<SpanSet>& pred) {
  auto check_width = [](const std::vector<SpanSet>& sets, const char* side) {
    for (size_t i = 0; i < sets.size(); ++i)
      for (const Span& s : sets[i])
        if (s.end != s.start)
          throw InstanceError(std::string("dependency scorer: ") + side + " instance " +
                              std::to_string(i) + " has a span wider than one word");
  };
  check_width(gold, "gold");
  check_width(pred, "predicted");
  return score_spans(gold, pred);
}

ScoreReport score_dependency_combined(const std::vector<SpanSet>& gold_args,
                                      const std::vector<SpanSet>& pred_args,
                                      const std::vector<std::string>& gold_senses,
                                      const std::vector<std::string>& pred_senses) {
  check_paired(gold_senses.size(), pred_senses.size(), "combined scorer (senses)");
  check_paired(gold_args.size(), gold_senses.size(), "combined scorer (args vs senses)");
  ScoreReport args = score_dependency(gold_args, pred_args);
  long g = args.gold, p = args.predicted, m = args.matched;
  for (size_t i = 0; i < gold_senses.size(); ++i) {
    ++g;
    ++p;  // the tagger always assigns some sense to each predicate
    if (gold_senses[i] == pred_senses[i]) ++m;
  }
  return from_counts(g, p, m);
}

double sense_accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
  check_paired(gold.size(), pred.size(), "sense accuracy");
  if (gold.empty()) return 1.0;
  long hit = 0;
  for (size_t i = 0; i < gold.size(); ++i)
    if (gold[i] == pred[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

ScoreReport score_re(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                     const std::string& null_label) {
  check_paired(gold.size(), pred.size(), "relation scorer");
  long g = 0, p = 0, m = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    const bool gold_real = gold[i] != null_label;
    const bool pred_real = pred[i] != null_label;
    if (gold_real) ++g;
    if (pred_real) ++p;
    if (gold_real && pred_real && gold[i] == pred[i]) ++m;
  }
  return from_counts(g, p, m);
}

void write_report_text(std::ostream& out, const std::string& title, const ScoreReport& r) {
  out << title << "\n";
  out << "  gold:      " << r.gold << "\n";
  out << "  predicted: " << r.predicted << "\n";
  out << "  matched:   " << r.matched << "\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "  P: %.4f  R: %.4f  F1: %.4f\n", r.precision, r.recall, r.f1);
  out << buf;
}

void write_report_kv(std::ostream& out, const ScoreReport& r) {
  out << "gold\t" << r.gold << "\n";
  out << "predicted\t" << r.predicted << "\n";
  out << "matched\t" << r.matched << "\n";
  out << "precision\t" << r.precision << "\n";
  out << "recall\t" << r.recall << "\n";
  out << "f1\t" << r.f1 << "\n";
}

}  // namespace relsem::eval
