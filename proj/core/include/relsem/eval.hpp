// Span decoding and task metrics: BIO tag <-> span-set conversion, micro
// precision/recall/F1 over labeled spans, sense accuracy, and relation
// micro-F1 with the null class excluded.
#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "relsem/errors.hpp"

namespace relsem::eval {

struct Span {
  int start = 0;  // word indices, inclusive
  int end = 0;
  std::string role;

  friend bool operator==(const Span& a, const Span& b) {
    return a.start == b.start && a.end == b.end && a.role == b.role;
  }
  friend bool operator<(const Span& a, const Span& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.role < b.role;
  }
};

using SpanSet = std::set<Span>;

// Relaxed BIO reading: an I- tag continues the open span when the role
// matches and otherwise starts a new span, so no tag sequence is rejected
// for structure.  Unknown tag shapes raise LabelError.
SpanSet decode_bio(const std::vector<std::string>& tags);

// Inverse of decode_bio for well-formed, non-overlapping spans inside
// [0, len).  Throws LabelError on overlap or out-of-range spans.
std::vector<std::string> encode_bio(const SpanSet& spans, int len);

struct ScoreReport {
  long gold = 0;
  long predicted = 0;
  long matched = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro-averaged counts -> P/R/F1 with the fixed empty-side conventions:
// no predictions => P = 0, no gold => R = 0, P + R = 0 => F1 = 0.
ScoreReport from_counts(long gold, long predicted, long matched);

// Exact-match labeled span scoring over paired instance lists.
ScoreReport score_spans(const std::vector<SpanSet>& gold, const std::vector<SpanSet>& pred);

// Same scorer restricted to single-word spans; wider spans are rejected.
ScoreReport score_dependency(const std::vector<SpanSet>& gold, const std::vector<SpanSet>& pred);

// Dependency scoring where each instance additionally contributes its
// predicate sense as one scored item, mirroring combined argument+sense
// evaluation.
ScoreReport score_dependency_combined(const std::vector<SpanSet>& gold_args,
                                      const std::vector<SpanSet>& pred_args,
                                      const std::vector<std::string>& gold_senses,
                                      const std::vector<std::string>& pred_senses);

// Fraction of predicates whose sense label matches exactly.
double sense_accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& pred);

// Relation micro-F1 that ignores the null class: a correct null prediction
// counts neither toward precision nor recall.
ScoreReport score_re(const std::vector<std::string>& gold, const std::vector<std::string>& pred,
                     const std::string& null_label);

// Human-readable and machine-readable (key<TAB>value) report forms.
void write_report_text(std::ostream& out, const std::string& title, const ScoreReport& r);
void write_report_kv(std::ostream& out, const ScoreReport& r);

}  // namespace relsem::eval
