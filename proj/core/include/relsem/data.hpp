// Corpus ingestion and synthesis: JSON relation records, a compact column
// dialect for predicate-argument frames, and deterministic generators with
// closed-form labeling rules for desk-scale experiments.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relsem/encoding.hpp"
#include "relsem/errors.hpp"

namespace relsem::data {

struct ReDataset {
  std::vector<enc::ReInstance> instances;
  std::vector<std::string> relations;  // sorted unique gold labels
};

struct SrlDataset {
  std::vector<enc::SrlInstance> instances;
  std::vector<std::string> roles;   // sorted unique argument roles
  std::vector<std::string> senses;  // sorted unique non-empty senses
};

enum class SrlStyle { spans, dependency };

// JSON records (one top-level array, or one object per line) with fields:
// token (string list), subj_start/subj_end/obj_start/obj_end (0-based,
// inclusive), subj_type/obj_type, relation, and an optional id.
ReDataset load_re_json(const std::string& path);
void write_re_json(const std::string& path, const std::vector<enc::ReInstance>& instances);

// Column dialect, blank-line separated sentences.  Column 0: word.  Column 1:
// "-" on non-predicate rows; on predicate rows the sense label, or "*" when
// the sense is unknown.  One argument column per predicate row, in predicate
// order: BIO tags for span style, role-or-"_" for dependency style (width-1
// arguments).  This is a deliberate reduction of the usual 14+-column
// predicate-argument formats to the fields the models consume: words,
// predicate position, sense, argument spans.
SrlDataset load_srl_columns(const std::string& path, SrlStyle style);
void write_srl_columns(const std::string& path, const std::vector<enc::SrlInstance>& instances,
                       SrlStyle style);

// Deterministic synthetic relation corpus.  Labeling rule: relation =
// "no_relation" when the entity types match, otherwise
// "rel_<SUBJ_TYPE>_<OBJ_TYPE>" — learnable from the mask tokens alone.
ReDataset synth_re(uint64_t seed, int size);
// Token inventory covering everything synth_re can emit, including the
// sub-word pieces of the deliberately split filler words.
std::vector<std::string> synth_re_vocab();

// Deterministic synthetic predicate-argument corpus.  Labeling rules:
// sense = "<verb>.01" for verbs at even inventory positions, "<verb>.02"
// otherwise; ARG1 = the word(s) left of the predicate (width 2 for span
// style when available, width 1 for dependency style); ARG2 = the word(s)
// right of the predicate when present.
SrlDataset synth_srl(uint64_t seed, int size, SrlStyle style);
std::vector<std::string> synth_srl_vocab();

// Provenance sidecar for generated corpora: generator name, seed, size, and
// the labeling rule in prose, as a small JSON object.
void write_synth_meta(const std::string& path, const std::string& generator, uint64_t seed,
                      int size, const std::string& rule);

}  // namespace relsem::data
