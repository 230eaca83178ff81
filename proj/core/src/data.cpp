#include "relsem/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "relsem/errors.hpp"
#include "relsem/eval.hpp"
#include "relsem/rng.hpp"

using json = nlohmann::json;

namespace relsem::data {

namespace {

std::vector<std::string> sorted_unique(std::set<std::string> s) {
  return {s.begin(), s.end()};
}

enc::ReInstance re_from_json(const json& j, int index) {
  const std::string where = "record " + std::to_string(index);
  if (!j.is_object()) throw FormatError(where + ": expected a JSON object");
  auto need = [&](const char* field) -> const json& {
    auto it = j.find(field);
    if (it == j.end()) throw FormatError(where + ": missing field '" + field + "'");
    return *it;
  };
  enc::ReInstance inst;
  inst.id = j.value("id", "r" + std::to_string(index));
  const json& toks = need("token");
  if (!toks.is_array()) throw FormatError(where + ": field 'token' must be a string array");
  for (const json& t : toks) {
    if (!t.is_string()) throw FormatError(where + ": field 'token' must be a string array");
    inst.words.push_back(t.get<std::string>());
  }
  auto geti = [&](const char* field) {
    const json& v = need(field);
    if (!v.is_number_integer()) throw FormatError(where + ": field '" + std::string(field) + "' must be an integer");
    return v.get<int>();
  };
  auto gets = [&](const char* field) {
    const json& v = need(field);
    if (!v.is_string()) throw FormatError(where + ": field '" + std::string(field) + "' must be a string");
    return v.get<std::string>();
  };
  inst.subj_start = geti("subj_start");
  inst.subj_end = geti("subj_end");
  inst.obj_start = geti("obj_start");
  inst.obj_end = geti("obj_end");
  inst.subj_type = gets("subj_type");
  inst.obj_type = gets("obj_type");
  inst.relation = gets("relation");
  inst.validate();
  return inst;
}

json re_to_json(const enc::ReInstance& inst) {
  json j;
  j["id"] = inst.id;
  j["token"] = inst.words;
  j["subj_start"] = inst.subj_start;
  j["subj_end"] = inst.subj_end;
  j["obj_start"] = inst.obj_start;
  j["obj_end"] = inst.obj_end;
  j["subj_type"] = inst.subj_type;
  j["obj_type"] = inst.obj_type;
  j["relation"] = inst.relation;
  return j;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

}  // namespace

ReDataset load_re_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open relation corpus: " + path);
  ReDataset ds;
  std::set<std::string> relations;

  // Sniff the container form: a top-level array, or one object per line.
  char first = 0;
  in >> std::ws;
  first = static_cast<char>(in.peek());
  if (first == '[') {
    json arr;
    try {
      arr = json::parse(in);
    } catch (const json::parse_error& e) {
      throw FormatError(path + ": " + e.what());
    }
    int index = 0;
    for (const json& j : arr) {
      ds.instances.push_back(re_from_json(j, index++));
      relations.insert(ds.instances.back().relation);
    }
  } else {
    std::string line;
    int lineno = 0, index = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw FormatError(path + " line " + std::to_string(lineno) + ": " + e.what());
      }
      ds.instances.push_back(re_from_json(j, index++));
      relations.insert(ds.instances.back().relation);
    }
  }
  ds.relations = sorted_unique(std::move(relations));
  return ds;
}

void write_re_json(const std::string& path, const std::vector<enc::ReInstance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write relation corpus: " + path);
  out << "[\n";
  for (size_t i = 0; i < instances.size(); ++i) {
    out << "  " << re_to_json(instances[i]).dump();
    out << (i + 1 < instances.size() ? ",\n" : "\n");
  }
  out << "]\n";
  if (!out) throw FormatError("failed writing relation corpus: " + path);
}

SrlDataset load_srl_columns(const std::string& path, SrlStyle style) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open frame corpus: " + path);
  SrlDataset ds;
  std::set<std::string> roles, senses;

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  lines.push_back("");  // sentinel blank flushes the last sentence

  std::vector<std::vector<std::string>> rows;
  int sentence_start_line = 1;
  int sentence_index = 0;
  auto flush = [&]() {
    if (rows.empty()) return;
    const size_t ncols = rows[0].size();
    for (size_t r = 0; r < rows.size(); ++r)
      if (rows[r].size() != ncols)
        throw FormatError(path + " line " + std::to_string(sentence_start_line + static_cast<int>(r)) +
                          ": ragged row (" + std::to_string(rows[r].size()) + " columns, sentence has " +
                          std::to_string(ncols) + ")");
    if (ncols < 2)
      throw FormatError(path + " line " + std::to_string(sentence_start_line) +
                        ": rows need at least word and predicate columns");
    std::vector<int> pred_rows;
    for (size_t r = 0; r < rows.size(); ++r)
      if (rows[r][1] != "-") pred_rows.push_back(static_cast<int>(r));
    if (ncols != 2 + pred_rows.size())
      throw FormatError(path + " line " + std::to_string(sentence_start_line) + ": sentence has " +
                        std::to_string(pred_rows.size()) + " predicates but " +
                        std::to_string(ncols - 2) + " argument columns");
    std::vector<std::string> words;
    words.reserve(rows.size());
    for (const auto& r : rows) words.push_back(r[0]);

    for (size_t f = 0; f < pred_rows.size(); ++f) {
      enc::SrlInstance inst;
      inst.id = "s" + std::to_string(sentence_index) + ".p" + std::to_string(pred_rows[f]);
      inst.words = words;
      inst.predicate = pred_rows[f];
      const std::string& marker = rows[static_cast<size_t>(pred_rows[f])][1];
      inst.sense = marker == "*" ? "" : marker;
      const size_t col = 2 + f;
      if (style == SrlStyle::spans) {
        std::vector<std::string> tags;
        tags.reserve(rows.size());
        for (const auto& r : rows) tags.push_back(r[col]);
        eval::SpanSet spans;
        try {
          spans = eval::decode_bio(tags);
        } catch (const LabelError& e) {
          throw FormatError(path + " line " + std::to_string(sentence_start_line) + ": " + e.what());
        }
        for (const eval::Span& s : spans) inst.arguments.push_back({s.start, s.end, s.role});
      } else {
        for (size_t r = 0; r < rows.size(); ++r) {
          const std::string& tag = rows[r][col];
          if (tag != "_")
            inst.arguments.push_back({static_cast<int>(r), static_cast<int>(r), tag});
        }
      }
      inst.validate();
      if (!inst.sense.empty()) senses.insert(inst.sense);
      for (const auto& a : inst.arguments) roles.insert(a.role);
      ds.instances.push_back(std::move(inst));
    }
    rows.clear();
    ++sentence_index;
  };

  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (l.find_first_not_of(" \t") == std::string::npos) {
      flush();
      sentence_start_line = static_cast<int>(i) + 2;
    } else {
      if (rows.empty()) sentence_start_line = static_cast<int>(i) + 1;
      rows.push_back(split_fields(l));
    }
  }
  ds.roles = sorted_unique(std::move(roles));
  ds.senses = sorted_unique(std::move(senses));
  return ds;
}

void write_srl_columns(const std::string& path, const std::vector<enc::SrlInstance>& instances,
                       SrlStyle style) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write frame corpus: " + path);

  // Consecutive instances over the identical word sequence form one sentence
  // block with one argument column per frame.
  size_t i = 0;
  bool first_block = true;
  while (i < instances.size()) {
    const int n = static_cast<int>(instances[i].words.size());
    std::vector<std::string> markers(static_cast<size_t>(n), "-");

    // A block extends while the word sequence repeats and each frame has a
    // fresh predicate slot; a repeated predicate starts a new sentence block.
    size_t j = i;
    while (j < instances.size() && instances[j].words == instances[i].words) {
      const enc::SrlInstance& inst = instances[j];
      inst.validate();
      std::string& slot = markers[static_cast<size_t>(inst.predicate)];
      if (slot != "-") break;
      slot = inst.sense.empty() ? "*" : inst.sense;
      ++j;
    }
    // Frames must appear in predicate order for the column<->predicate pairing.
    std::vector<size_t> order(j - i);
    for (size_t f = 0; f < order.size(); ++f) order[f] = i + f;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return instances[a].predicate < instances[b].predicate; });

    std::vector<std::vector<std::string>> arg_cols;
    for (size_t f : order) {
      const enc::SrlInstance& inst = instances[f];
      if (style == SrlStyle::spans) {
        eval::SpanSet spans;
        for (const auto& a : inst.arguments) spans.insert({a.start, a.end, a.role});
        arg_cols.push_back(eval::encode_bio(spans, n));
      } else {
        std::vector<std::string> col(static_cast<size_t>(n), "_");
        for (const auto& a : inst.arguments) {
          if (a.end != a.start)
            throw InstanceError("instance " + inst.id +
                                ": dependency-style output requires width-1 arguments");
          col[static_cast<size_t>(a.start)] = a.role;
        }
        arg_cols.push_back(std::move(col));
      }
    }

    if (!first_block) out << "\n";
    first_block = false;
    for (int r = 0; r < n; ++r) {
      out << instances[i].words[static_cast<size_t>(r)] << '\t' << markers[static_cast<size_t>(r)];
      for (const auto& col : arg_cols) out << '\t' << col[static_cast<size_t>(r)];
      out << '\n';
    }
    i = j;
  }
  if (!out) throw FormatError("failed writing frame corpus: " + path);
}

// ------------------------------------------------------------ synthesis

namespace {

const std::vector<std::string> kFillerWords = {
    "the", "a",  "of",   "and",  "near",  "visited", "works",    "at",      "in",      "with",
    "said", "met", "saw", "old",  "new",   "house",   "city",    "firm",    "river",   "today",
    "unhappily", "walking", "reported"};

// Pieces for the deliberately multi-piece fillers above.
const std::vector<std::string> kFillerPieces = {"un",     "##happ", "##ily", "walk",
                                                "##ing", "report", "##ed"};

const std::vector<std::string> kEntityTypes = {"PER", "ORG", "LOC", "MISC"};

const std::vector<std::vector<std::string>> kEntityWords = {
    {"alice", "bob", "carol", "dave", "katarina"},  // PER ("katarina" splits into pieces)
    {"acme", "globex", "initech"},                  // ORG
    {"paris", "berlin", "tokyo"},                   // LOC
    {"widget", "gadget"},                           // MISC
};
const std::vector<std::string> kEntityPieces = {"kat", "##ar", "##ina"};

const std::vector<std::string> kNouns = {"cat",  "dog",  "bird", "fish",
                                         "tree", "car",  "book", "lamp", "doghouse"};
const std::vector<std::string> kNounPieces = {"##house"};

// Verb inventory: even positions take sense .01, odd positions .02.
const std::vector<std::string> kVerbs = {"runs", "jumped", "walks", "sleeps", "flies"};
const std::vector<std::string> kVerbPieces = {"jump", "##ed", "sleep", "##s"};

std::string pick(const std::vector<std::string>& pool, Rng& rng) {
  return pool[static_cast<size_t>(rng.next_below(pool.size()))];
}

}  // namespace

std::vector<std::string> synth_re_vocab() {
  std::vector<std::string> v;
  for (const std::string& t : kEntityTypes) {
    v.push_back("SUBJ-" + t);
    v.push_back("OBJ-" + t);
  }
  v.insert(v.end(), kFillerWords.begin(), kFillerWords.end());
  v.insert(v.end(), kFillerPieces.begin(), kFillerPieces.end());
  for (size_t t = 0; t < kEntityWords.size(); ++t)
    for (const std::string& w : kEntityWords[t])
      if (w != "katarina") v.push_back(w);  // present only as pieces
  v.insert(v.end(), kEntityPieces.begin(), kEntityPieces.end());
  std::vector<std::string> keep;
  for (std::string& t : v) {
    if (t == "unhappily" || t == "walking" || t == "reported") continue;  // pieces only
    keep.push_back(std::move(t));
  }
  return keep;
}

ReDataset synth_re(uint64_t seed, int size) {
  if (size <= 0) throw ConfigError("synthetic corpus size must be positive");
  Rng rng(seed);
  ReDataset ds;
  std::set<std::string> relations;
  for (int k = 0; k < size; ++k) {
    enc::ReInstance inst;
    inst.id = "r" + std::to_string(k);
    const int subj_t = static_cast<int>(rng.next_below(kEntityTypes.size()));
    const int obj_t = static_cast<int>(rng.next_below(kEntityTypes.size()));
    inst.subj_type = kEntityTypes[static_cast<size_t>(subj_t)];
    inst.obj_type = kEntityTypes[static_cast<size_t>(obj_t)];
    inst.relation = subj_t == obj_t ? "no_relation" : "rel_" + inst.subj_type + "_" + inst.obj_type;

    const int subj_w = 1 + static_cast<int>(rng.next_below(2));
    const int obj_w = 1 + static_cast<int>(rng.next_below(2));
    std::vector<std::string> subj_words, obj_words;
    for (int i = 0; i < subj_w; ++i)
      subj_words.push_back(pick(kEntityWords[static_cast<size_t>(subj_t)], rng));
    for (int i = 0; i < obj_w; ++i)
      obj_words.push_back(pick(kEntityWords[static_cast<size_t>(obj_t)], rng));

    const int fill_a = static_cast<int>(rng.next_below(3));
    const int fill_b = 1 + static_cast<int>(rng.next_below(3));
    const int fill_c = static_cast<int>(rng.next_below(3));
    const bool subj_first = rng.next_below(2) == 0;
    auto push_fill = [&](int count) {
      for (int i = 0; i < count; ++i) inst.words.push_back(pick(kFillerWords, rng));
    };
    auto push_span = [&](const std::vector<std::string>& ws, int& start, int& end) {
      start = static_cast<int>(inst.words.size());
      inst.words.insert(inst.words.end(), ws.begin(), ws.end());
      end = static_cast<int>(inst.words.size()) - 1;
    };
    push_fill(fill_a);
    if (subj_first) {
      push_span(subj_words, inst.subj_start, inst.subj_end);
      push_fill(fill_b);
      push_span(obj_words, inst.obj_start, inst.obj_end);
    } else {
      push_span(obj_words, inst.obj_start, inst.obj_end);
      push_fill(fill_b);
      push_span(subj_words, inst.subj_start, inst.subj_end);
    }
    push_fill(fill_c);
    inst.validate();
    relations.insert(inst.relation);
    ds.instances.push_back(std::move(inst));
  }
  ds.relations = sorted_unique(std::move(relations));
  return ds;
}

std::vector<std::string> synth_srl_vocab() {
  std::vector<std::string> v;
  for (const std::string& n : kNouns)
    if (n != "doghouse") v.push_back(n);  // whole nouns; "doghouse" = dog + ##house
  v.insert(v.end(), kNounPieces.begin(), kNounPieces.end());
  for (const std::string& verb : kVerbs)
    if (verb != "jumped" && verb != "sleeps") v.push_back(verb);  // pieces only
  v.insert(v.end(), kVerbPieces.begin(), kVerbPieces.end());
  return v;
}

SrlDataset synth_srl(uint64_t seed, int size, SrlStyle style) {
  if (size <= 0) throw ConfigError("synthetic corpus size must be positive");
  Rng rng(seed);
  SrlDataset ds;
  std::set<std::string> roles, senses;
  for (int k = 0; k < size; ++k) {
    enc::SrlInstance inst;
    inst.id = "s" + std::to_string(k);
    const int n = 4 + static_cast<int>(rng.next_below(6));  // 4..9 words
    const int v = 1 + static_cast<int>(rng.next_below(static_cast<size_t>(n - 1)));
    const int verb_idx = static_cast<int>(rng.next_below(kVerbs.size()));
    for (int i = 0; i < n; ++i)
      inst.words.push_back(i == v ? kVerbs[static_cast<size_t>(verb_idx)] : pick(kNouns, rng));
    inst.predicate = v;
    inst.sense = kVerbs[static_cast<size_t>(verb_idx)] + (verb_idx % 2 == 0 ? ".01" : ".02");

    if (style == SrlStyle::spans) {
      inst.arguments.push_back({std::max(0, v - 2), v - 1, "ARG1"});
      if (v + 1 < n) inst.arguments.push_back({v + 1, std::min(n - 1, v + 2), "ARG2"});
    } else {
      inst.arguments.push_back({v - 1, v - 1, "ARG1"});
      if (v + 1 < n) inst.arguments.push_back({v + 1, v + 1, "ARG2"});
    }
    inst.validate();
    senses.insert(inst.sense);
    for (const auto& a : inst.arguments) roles.insert(a.role);
    ds.instances.push_back(std::move(inst));
  }
  ds.roles = sorted_unique(std::move(roles));
  ds.senses = sorted_unique(std::move(senses));
  return ds;
}

void write_synth_meta(const std::string& path, const std::string& generator, uint64_t seed,
                      int size, const std::string& rule) {
  json j;
  j["generator"] = generator;
  j["seed"] = seed;
  j["size"] = size;
  j["rule"] = rule;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write metadata file: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("failed writing metadata file: " + path);
}

}  // namespace relsem::data
