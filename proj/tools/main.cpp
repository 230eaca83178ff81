// Command-line driver: train, evaluate, predict, and synthesize corpora for
// the relation classifier and the predicate sense / argument taggers.
//
//   relsem synth   --task re --seed 7 --size 50 --out data/
//   relsem train   --task re --train data/corpus.json --vocab data/vocab.txt --out run/
//   relsem eval    --task re --test data/corpus.json --vocab data/vocab.txt \
//                  --checkpoint run/model.bin --out run/
//   relsem predict --task re --test data/corpus.json --vocab data/vocab.txt \
//                  --checkpoint run/model.bin --out run/
//
// Every flag can also be given in a flat key=value config file (--config);
// explicit flags win over file values.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relsem/data.hpp"
#include "relsem/encoding.hpp"
#include "relsem/errors.hpp"
#include "relsem/eval.hpp"
#include "relsem/models.hpp"
#include "relsem/tokenizer.hpp"
#include "relsem/train.hpp"

namespace fs = std::filesystem;
using namespace relsem;

namespace {

struct RunConfig {
    std::string task;  // re | srl-sense | srl-span | srl-dep
    std::string train_path, dev_path, test_path;
    std::string vocab_path, labels_path, checkpoint_path;
    std::string out_dir;
    std::string config_path;
    std::string preset = "tiny";
    std::string null_label = "no_relation";
    uint64_t seed = 1;
    double lr = 5e-5;
    int batch_size = 8;
    int max_epochs = 50;
    int eval_every = 1;
    int patience = 10;
    bool freeze_encoder = false;
    double dropout = 0.1;
    double clip_norm = 1.0;
    int size = 50;  // synth corpus size
};

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

bool is_arg_task(const std::string& task) { return task == "srl-span" || task == "srl-dep"; }

data::SrlStyle style_of(const std::string& task) {
    // The sense task ignores argument columns but still has to parse them;
    // span-style files are the convention for it.
    return task == "srl-dep" ? data::SrlStyle::dependency : data::SrlStyle::spans;
}

void check_task(const std::string& task) {
    require(task == "re" || task == "srl-sense" || is_arg_task(task),
            "unknown task '" + task + "' (expected re, srl-sense, srl-span, or srl-dep)");
}

// ---- config file ------------------------------------------------------------

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

// Applies `path` (lines of key=value; '#' comments) to every field whose flag
// was not given on the command line, so explicit flags keep precedence.
void apply_config_file(const CLI::App& cmd, const std::string& path, RunConfig& rc) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);

    std::map<std::string, std::function<void(const std::string&)>> set;
    auto str = [](std::string& field) {
        return [&field](const std::string& v) { field = v; };
    };
    set["task"] = str(rc.task);
    set["train"] = str(rc.train_path);
    set["dev"] = str(rc.dev_path);
    set["test"] = str(rc.test_path);
    set["vocab"] = str(rc.vocab_path);
    set["labels"] = str(rc.labels_path);
    set["checkpoint"] = str(rc.checkpoint_path);
    set["out"] = str(rc.out_dir);
    set["preset"] = str(rc.preset);
    set["null_label"] = str(rc.null_label);
    set["seed"] = [&rc](const std::string& v) { rc.seed = std::stoull(v); };
    set["lr"] = [&rc](const std::string& v) { rc.lr = std::stod(v); };
    set["batch_size"] = [&rc](const std::string& v) { rc.batch_size = std::stoi(v); };
    set["max_epochs"] = [&rc](const std::string& v) { rc.max_epochs = std::stoi(v); };
    set["eval_every"] = [&rc](const std::string& v) { rc.eval_every = std::stoi(v); };
    set["patience"] = [&rc](const std::string& v) { rc.patience = std::stoi(v); };
    set["freeze_encoder"] = [&rc](const std::string& v) {
        rc.freeze_encoder = parse_bool("freeze_encoder", v);
    };
    set["dropout"] = [&rc](const std::string& v) { rc.dropout = std::stod(v); };
    set["clip_norm"] = [&rc](const std::string& v) { rc.clip_norm = std::stod(v); };
    set["size"] = [&rc](const std::string& v) { rc.size = std::stoi(v); };

    // Config keys map onto flags by s/_/-/: batch_size <-> --batch-size.
    auto flag_of = [](std::string key) {
        for (char& c : key)
            if (c == '_') c = '-';
        return "--" + key;
    };

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(first, eq - first);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = line.substr(eq + 1);
        const size_t v0 = value.find_first_not_of(" \t");
        value = v0 == std::string::npos ? "" : value.substr(v0);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) value.pop_back();

        auto it = set.find(key);
        if (it == set.end())
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown config key '" +
                              key + "'");
        const std::string flag = flag_of(key);
        const bool overridden = cmd.count(flag) > 0;
        if (overridden) continue;
        try {
            it->second(value);
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value '" + value +
                              "' for key '" + key + "'");
        }
    }
}

void echo_config(const std::string& verb, const RunConfig& rc) {
    if (rc.out_dir.empty()) return;
    const fs::path path = fs::path(rc.out_dir) / "config.txt";
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    out << "# effective configuration (" << verb << ")\n";
    out << "task=" << rc.task << "\n";
    out << "train=" << rc.train_path << "\n";
    out << "dev=" << rc.dev_path << "\n";
    out << "test=" << rc.test_path << "\n";
    out << "vocab=" << rc.vocab_path << "\n";
    out << "labels=" << rc.labels_path << "\n";
    out << "checkpoint=" << rc.checkpoint_path << "\n";
    out << "out=" << rc.out_dir << "\n";
    out << "preset=" << rc.preset << "\n";
    out << "null_label=" << rc.null_label << "\n";
    out << "seed=" << rc.seed << "\n";
    out << "lr=" << rc.lr << "\n";
    out << "batch_size=" << rc.batch_size << "\n";
    out << "max_epochs=" << rc.max_epochs << "\n";
    out << "eval_every=" << rc.eval_every << "\n";
    out << "patience=" << rc.patience << "\n";
    out << "freeze_encoder=" << (rc.freeze_encoder ? "true" : "false") << "\n";
    out << "dropout=" << rc.dropout << "\n";
    out << "clip_norm=" << rc.clip_norm << "\n";
    out << "size=" << rc.size << "\n";
}

// ---- shared loading helpers ---------------------------------------------------

train::TrainConfig to_train_config(const RunConfig& rc) {
    train::TrainConfig tc;
    tc.lr = rc.lr;
    tc.batch_size = rc.batch_size;
    tc.max_epochs = rc.max_epochs;
    tc.seed = rc.seed;
    tc.freeze_encoder = rc.freeze_encoder;
    tc.eval_every = rc.eval_every;
    tc.patience = rc.patience;
    tc.dropout = rc.dropout;
    tc.clip_norm = rc.clip_norm;
    return tc;
}

std::vector<enc::ReEncoded> encode_re_set(const std::vector<enc::ReInstance>& xs,
                                          const tok::Vocab& vocab, int max_positions) {
    enc::ReOptions opt;
    opt.max_positions = max_positions;
    std::vector<enc::ReEncoded> out;
    out.reserve(xs.size());
    for (const enc::ReInstance& inst : xs) out.push_back(enc::encode_re(inst, vocab, opt));
    return out;
}

std::vector<enc::SrlEncoded> encode_srl_set(const std::vector<enc::SrlInstance>& xs,
                                            const tok::Vocab& vocab,
                                            const enc::LabelVocab& labels, bool sense_task,
                                            int max_positions) {
    enc::SrlOptions opt;
    opt.max_positions = max_positions;
    std::vector<enc::SrlEncoded> out;
    out.reserve(xs.size());
    for (const enc::SrlInstance& inst : xs)
        out.push_back(sense_task ? enc::encode_sense(inst, vocab, labels, opt)
                                 : enc::encode_arguments(inst, vocab, labels, opt));
    return out;
}

// The sense slot only feeds training labels, which inference never reads;
// instances arriving with an unknown sense ("*" in the column files) get a
// placeholder so encoding validates.
std::vector<enc::SrlInstance> with_placeholder_senses(std::vector<enc::SrlInstance> xs,
                                                      const enc::LabelVocab& sense_labels) {
    require(sense_labels.size() > 2, "checkpoint's label vocabulary has no sense labels");
    for (enc::SrlInstance& inst : xs)
        if (inst.sense.empty()) inst.sense = sense_labels.label(2);
    return xs;
}

// Dependency-style outputs are single head words; a decoded span wider than
// one word is reduced to its first word.
eval::SpanSet clip_to_heads(const eval::SpanSet& spans) {
    eval::SpanSet out;
    for (const eval::Span& s : spans) out.insert({s.start, s.start, s.role});
    return out;
}

eval::SpanSet gold_spans_of(const enc::SrlInstance& inst) {
    eval::SpanSet out;
    for (const enc::SrlInstance::Arg& a : inst.arguments) out.insert({a.start, a.end, a.role});
    return out;
}

std::vector<std::string> read_label_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open label file " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path.string());
    for (const std::string& l : lines) out << l << "\n";
}

void write_history_files(const fs::path& dir, const train::History& h) {
    std::ofstream txt(dir / "history.txt");
    if (!txt) throw FormatError("cannot write " + (dir / "history.txt").string());
    train::write_history_text(txt, h);
    std::ofstream tsv(dir / "history.tsv");
    if (!tsv) throw FormatError("cannot write " + (dir / "history.tsv").string());
    train::write_history_tsv(tsv, h);
}

void write_report_files(const fs::path& dir, const std::string& title,
                        const eval::ScoreReport& r) {
    std::ofstream txt(dir / "report.txt");
    if (!txt) throw FormatError("cannot write " + (dir / "report.txt").string());
    eval::write_report_text(txt, title, r);
    std::ofstream tsv(dir / "report.tsv");
    if (!tsv) throw FormatError("cannot write " + (dir / "report.tsv").string());
    eval::write_report_kv(tsv, r);
}

// ---- subcommands ------------------------------------------------------------

int cmd_synth(const RunConfig& rc) {
    check_task(rc.task);
    require(!rc.out_dir.empty(), "synth requires --out");
    require(rc.size > 0, "synth requires a positive --size");
    fs::create_directories(rc.out_dir);
    const fs::path dir(rc.out_dir);

    if (rc.task == "re") {
        data::ReDataset ds = data::synth_re(rc.seed, rc.size);
        data::write_re_json((dir / "corpus.json").string(), ds.instances);
        tok::Vocab::from_tokens(data::synth_re_vocab()).save((dir / "vocab.txt").string());
        write_lines(dir / "labels.txt", ds.relations);
        data::write_synth_meta((dir / "meta.json").string(), "synth_re", rc.seed, rc.size,
                               "relation = no_relation when entity types match, else "
                               "rel_<SUBJ_TYPE>_<OBJ_TYPE>");
        std::cout << "wrote " << ds.instances.size() << " relation instances to " << dir.string()
                  << "\n";
    } else {
        const data::SrlStyle style = style_of(rc.task);
        data::SrlDataset ds = data::synth_srl(rc.seed, rc.size, style);
        data::write_srl_columns((dir / "corpus.tsv").string(), ds.instances, style);
        tok::Vocab::from_tokens(data::synth_srl_vocab()).save((dir / "vocab.txt").string());
        write_lines(dir / "roles.txt", ds.roles);
        write_lines(dir / "senses.txt", ds.senses);
        data::write_synth_meta((dir / "meta.json").string(), "synth_srl", rc.seed, rc.size,
                               "sense = verb.01 for even verb inventory positions else verb.02; "
                               "ARG1 left of the predicate, ARG2 right when present");
        std::cout << "wrote " << ds.instances.size() << " predicate frames to " << dir.string()
                  << "\n";
    }
    echo_config("synth", rc);
    return 0;
}

int cmd_train(const RunConfig& rc) {
    check_task(rc.task);
    require(!rc.train_path.empty(), "train requires --train");
    require(!rc.vocab_path.empty(), "train requires --vocab");
    require(!rc.out_dir.empty(), "train requires --out");
    fs::create_directories(rc.out_dir);
    const fs::path dir(rc.out_dir);
    echo_config("train", rc);

    const tok::Vocab vocab = tok::Vocab::from_file(rc.vocab_path);
    models::Preset p = models::preset(rc.preset);
    p.encoder.vocab_size = vocab.size();
    p.encoder.dropout = rc.dropout;
    const train::TrainConfig tc = to_train_config(rc);

    train::History hist;
    if (rc.task == "re") {
        data::ReDataset tr = data::load_re_json(rc.train_path);
        data::ReDataset dv = rc.dev_path.empty() ? tr : data::load_re_json(rc.dev_path);
        enc::LabelVocab labels = rc.labels_path.empty()
                                     ? enc::LabelVocab(tr.relations)
                                     : enc::LabelVocab::from_file(rc.labels_path);
        models::ReModel model(p.encoder, p.head, labels, rc.seed);
        auto train_enc = encode_re_set(tr.instances, vocab, p.encoder.max_positions);
        auto dev_enc = encode_re_set(dv.instances, vocab, p.encoder.max_positions);
        std::function<double(const models::ReModel&, const std::vector<enc::ReEncoded>&)> metric =
            [&rc](const models::ReModel& m, const std::vector<enc::ReEncoded>& d) {
                return train::relation_micro_f1(m, d, rc.null_label);
            };
        hist = train::fit(model, train_enc, dev_enc, tc, metric);
        model.save((dir / "model.bin").string());
    } else {
        const data::SrlStyle style = style_of(rc.task);
        data::SrlDataset tr = data::load_srl_columns(rc.train_path, style);
        data::SrlDataset dv =
            rc.dev_path.empty() ? tr : data::load_srl_columns(rc.dev_path, style);
        const bool sense_task = rc.task == "srl-sense";
        const std::vector<std::string> inventory =
            rc.labels_path.empty() ? (sense_task ? tr.senses : tr.roles)
                                   : read_label_lines(rc.labels_path);
        enc::LabelVocab labels =
            sense_task ? enc::make_sense_labels(inventory) : enc::make_arg_labels(inventory);
        auto train_enc =
            encode_srl_set(tr.instances, vocab, labels, sense_task, p.encoder.max_positions);
        auto dev_enc =
            encode_srl_set(dv.instances, vocab, labels, sense_task, p.encoder.max_positions);
        if (sense_task) {
            models::SenseModel model(p.encoder, p.head, labels, rc.seed);
            std::function<double(const models::SenseModel&, const std::vector<enc::SrlEncoded>&)>
                metric = train::sense_accuracy_on;
            hist = train::fit(model, train_enc, dev_enc, tc, metric);
            model.save((dir / "model.bin").string());
        } else {
            models::ArgModel model(p.encoder, p.head, labels, rc.seed);
            std::function<double(const models::ArgModel&, const std::vector<enc::SrlEncoded>&)>
                metric = train::argument_micro_f1;
            hist = train::fit(model, train_enc, dev_enc, tc, metric);
            model.save((dir / "model.bin").string());
        }
    }

    write_history_files(dir, hist);
    std::cout << "best dev metric " << hist.best_metric << " at epoch " << hist.best_epoch
              << " (" << hist.epochs_run << (hist.epochs_run == 1 ? " epoch" : " epochs")
              << (hist.stopped_early ? ", stopped early" : "") << "); model written to "
              << (dir / "model.bin").string() << "\n";
    return 0;
}

int cmd_eval(const RunConfig& rc) {
    check_task(rc.task);
    require(!rc.test_path.empty(), "eval requires --test");
    require(!rc.vocab_path.empty(), "eval requires --vocab");
    require(!rc.checkpoint_path.empty(), "eval requires --checkpoint");
    const tok::Vocab vocab = tok::Vocab::from_file(rc.vocab_path);
    if (!rc.out_dir.empty()) fs::create_directories(rc.out_dir);

    if (rc.task == "re") {
        models::ReModel model = models::ReModel::load(rc.checkpoint_path);
        data::ReDataset ds = data::load_re_json(rc.test_path);
        auto enc_set =
            encode_re_set(ds.instances, vocab, model.encoder_config().max_positions);
        std::vector<std::string> gold, pred;
        for (size_t i = 0; i < enc_set.size(); ++i) {
            gold.push_back(ds.instances[i].relation);
            pred.push_back(model.predict(enc_set[i]).label);
        }
        eval::ScoreReport r = eval::score_re(gold, pred, rc.null_label);
        eval::write_report_text(std::cout, "relation micro-F1 (null excluded)", r);
        if (!rc.out_dir.empty())
            write_report_files(rc.out_dir, "relation micro-F1 (null excluded)", r);
    } else if (rc.task == "srl-sense") {
        models::SenseModel model = models::SenseModel::load(rc.checkpoint_path);
        data::SrlDataset ds = data::load_srl_columns(rc.test_path, style_of(rc.task));
        auto enc_set = encode_srl_set(ds.instances, vocab, model.labels(), true,
                                      model.encoder_config().max_positions);
        std::vector<std::string> gold, pred;
        for (size_t i = 0; i < enc_set.size(); ++i) {
            gold.push_back(ds.instances[i].sense);
            pred.push_back(model.predict(enc_set[i]).label);
        }
        const double acc = eval::sense_accuracy(gold, pred);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.4f", acc);
        std::cout << "predicate sense accuracy: " << buf << " over " << gold.size()
                  << (gold.size() == 1 ? " predicate" : " predicates") << "\n";
        if (!rc.out_dir.empty()) {
            std::ofstream tsv(fs::path(rc.out_dir) / "report.tsv");
            if (!tsv) throw FormatError("cannot write report.tsv");
            std::snprintf(buf, sizeof(buf), "%.6f", acc);
            tsv << "predicates\t" << gold.size() << "\naccuracy\t" << buf << "\n";
        }
    } else {
        models::ArgModel model = models::ArgModel::load(rc.checkpoint_path);
        const data::SrlStyle style = style_of(rc.task);
        data::SrlDataset ds = data::load_srl_columns(rc.test_path, style);
        // Arguments must be encoded with the checkpoint's own tag inventory.
        auto enc_set = encode_srl_set(ds.instances, vocab, model.labels(), false,
                                      model.encoder_config().max_positions);
        std::vector<eval::SpanSet> gold, pred;
        const bool dep = style == data::SrlStyle::dependency;
        for (size_t i = 0; i < enc_set.size(); ++i) {
            gold.push_back(gold_spans_of(ds.instances[i]));
            eval::SpanSet spans = model.predict(enc_set[i]).spans;
            pred.push_back(dep ? clip_to_heads(spans) : spans);
        }
        eval::ScoreReport r =
            dep ? eval::score_dependency(gold, pred) : eval::score_spans(gold, pred);
        const std::string title =
            dep ? "argument head micro-F1" : "argument span micro-F1";
        eval::write_report_text(std::cout, title, r);
        if (!rc.out_dir.empty()) write_report_files(rc.out_dir, title, r);
    }
    if (!rc.out_dir.empty()) echo_config("eval", rc);
    return 0;
}

int cmd_predict(const RunConfig& rc) {
    check_task(rc.task);
    require(!rc.test_path.empty(), "predict requires --test");
    require(!rc.vocab_path.empty(), "predict requires --vocab");
    require(!rc.checkpoint_path.empty(), "predict requires --checkpoint");
    require(!rc.out_dir.empty(), "predict requires --out");
    const tok::Vocab vocab = tok::Vocab::from_file(rc.vocab_path);
    fs::create_directories(rc.out_dir);
    const fs::path out_path = fs::path(rc.out_dir) / "predictions.tsv";

    size_t n = 0;
    if (rc.task == "re") {
        models::ReModel model = models::ReModel::load(rc.checkpoint_path);
        data::ReDataset ds = data::load_re_json(rc.test_path);
        auto enc_set =
            encode_re_set(ds.instances, vocab, model.encoder_config().max_positions);
        std::ofstream out(out_path);
        if (!out) throw FormatError("cannot write " + out_path.string());
        for (size_t i = 0; i < enc_set.size(); ++i)
            out << ds.instances[i].id << "\t" << model.predict(enc_set[i]).label << "\n";
        n = enc_set.size();
    } else if (rc.task == "srl-sense") {
        models::SenseModel model = models::SenseModel::load(rc.checkpoint_path);
        data::SrlDataset ds = data::load_srl_columns(rc.test_path, style_of(rc.task));
        auto instances = with_placeholder_senses(ds.instances, model.labels());
        auto enc_set = encode_srl_set(instances, vocab, model.labels(), true,
                                      model.encoder_config().max_positions);
        std::ofstream out(out_path);
        if (!out) throw FormatError("cannot write " + out_path.string());
        for (size_t i = 0; i < enc_set.size(); ++i)
            out << instances[i].id << "\t" << model.predict(enc_set[i]).label << "\n";
        n = enc_set.size();
    } else {
        models::ArgModel model = models::ArgModel::load(rc.checkpoint_path);
        const data::SrlStyle style = style_of(rc.task);
        data::SrlDataset ds = data::load_srl_columns(rc.test_path, style);
        auto enc_set = encode_srl_set(ds.instances, vocab, model.labels(), false,
                                      model.encoder_config().max_positions);
        std::vector<enc::SrlInstance> predicted = ds.instances;
        const bool dep = style == data::SrlStyle::dependency;
        for (size_t i = 0; i < enc_set.size(); ++i) {
            eval::SpanSet spans = model.predict(enc_set[i]).spans;
            if (dep) spans = clip_to_heads(spans);
            predicted[i].arguments.clear();
            for (const eval::Span& s : spans)
                predicted[i].arguments.push_back({s.start, s.end, s.role});
        }
        data::write_srl_columns(out_path.string(), predicted, style);
        n = predicted.size();
    }

    echo_config("predict", rc);
    std::cout << "wrote " << n << (n == 1 ? " prediction" : " predictions") << " to "
              << out_path.string() << "\n";
    return 0;
}

void add_common(CLI::App* cmd, RunConfig& rc) {
    cmd->add_option("--task", rc.task, "task: re | srl-sense | srl-span | srl-dep");
    cmd->add_option("--config", rc.config_path, "flat key=value configuration file");
}

void add_io(CLI::App* cmd, RunConfig& rc) {
    cmd->add_option("--vocab", rc.vocab_path, "word-piece vocabulary, one token per line");
    cmd->add_option("--out", rc.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig rc;
    CLI::App app{"relation extraction and predicate-argument tagging toolkit"};
    app.require_subcommand(1);
    app.footer(
        "Config file keys mirror the long flags with '-' replaced by '_'\n"
        "(task, train, dev, test, vocab, labels, checkpoint, out, preset,\n"
        "null_label, seed, lr, batch_size, max_epochs, eval_every, patience,\n"
        "freeze_encoder, dropout, clip_norm, size). Explicit flags win.");

    CLI::App* train_cmd = app.add_subcommand("train", "fit a model and write its checkpoint");
    add_common(train_cmd, rc);
    add_io(train_cmd, rc);
    train_cmd->add_option("--train", rc.train_path, "training corpus");
    train_cmd->add_option("--dev", rc.dev_path, "development corpus (default: training corpus)");
    train_cmd->add_option("--labels", rc.labels_path,
                          "label inventory file (default: derived from the training corpus)");
    train_cmd->add_option("--preset", rc.preset, "model size preset: tiny | base | large");
    train_cmd->add_option("--seed", rc.seed, "random seed");
    train_cmd->add_option("--lr", rc.lr, "Adam learning rate");
    train_cmd->add_option("--batch-size", rc.batch_size, "mini-batch size");
    train_cmd->add_option("--max-epochs", rc.max_epochs, "maximum training epochs");
    train_cmd->add_option("--eval-every", rc.eval_every, "epochs between dev evaluations");
    train_cmd->add_option("--patience", rc.patience,
                          "dev evaluations without improvement before stopping");
    train_cmd->add_flag("--freeze-encoder", rc.freeze_encoder,
                        "train only the task head, leaving encoder weights fixed");
    train_cmd->add_option("--dropout", rc.dropout, "dropout rate during training");
    train_cmd->add_option("--clip-norm", rc.clip_norm, "global gradient-norm clip");
    train_cmd->add_option("--null-label", rc.null_label,
                          "relation label excluded from micro-F1");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a labeled corpus");
    add_common(eval_cmd, rc);
    add_io(eval_cmd, rc);
    eval_cmd->add_option("--test", rc.test_path, "evaluation corpus");
    eval_cmd->add_option("--checkpoint", rc.checkpoint_path, "model archive to load");
    eval_cmd->add_option("--null-label", rc.null_label,
                         "relation label excluded from micro-F1");

    CLI::App* predict_cmd =
        app.add_subcommand("predict", "write one prediction per input instance");
    add_common(predict_cmd, rc);
    add_io(predict_cmd, rc);
    predict_cmd->add_option("--test", rc.test_path, "input corpus");
    predict_cmd->add_option("--checkpoint", rc.checkpoint_path, "model archive to load");

    CLI::App* synth_cmd =
        app.add_subcommand("synth", "generate a deterministic synthetic corpus");
    add_common(synth_cmd, rc);
    add_io(synth_cmd, rc);
    synth_cmd->add_option("--seed", rc.seed, "generator seed");
    synth_cmd->add_option("--size", rc.size, "number of instances to generate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        if (!rc.config_path.empty()) apply_config_file(*cmd, rc.config_path, rc);
        require(!rc.task.empty(), cmd->get_name() + " requires --task");
        if (cmd == train_cmd) return cmd_train(rc);
        if (cmd == eval_cmd) return cmd_eval(rc);
        if (cmd == predict_cmd) return cmd_predict(rc);
        return cmd_synth(rc);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
