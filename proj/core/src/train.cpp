#include "relsem/train.hpp"

#include <cstdio>
#include <numeric>
#include <ostream>

#include "relsem/eval.hpp"

namespace relsem::train {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (max_epochs < 1) throw ConfigError("max epochs must be at least 1");
    if (eval_every < 1) throw ConfigError("eval interval must be at least 1");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    if (!(clip_norm > 0.0)) throw ConfigError("gradient clip norm must be positive");
}

std::vector<size_t> shuffled_indices(size_t n, uint64_t seed, int epoch) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(epoch)));
    rng.shuffle(order);
    return order;
}

void write_history_text(std::ostream& out, const History& h) {
    out << "epoch  train_loss  dev_metric\n";
    char buf[96];
    for (const EpochRecord& r : h.records) {
        if (r.evaluated) {
            std::snprintf(buf, sizeof(buf), "%5d  %10.6f  %10.6f\n", r.epoch, r.train_loss,
                          r.dev_metric);
        } else {
            std::snprintf(buf, sizeof(buf), "%5d  %10.6f  %10s\n", r.epoch, r.train_loss, "-");
        }
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "best dev metric %.6f at epoch %d", h.best_metric,
                  h.best_epoch);
    out << buf << "; ran " << h.epochs_run << (h.epochs_run == 1 ? " epoch" : " epochs")
        << (h.stopped_early ? " (stopped early)" : "") << "\n";
}

void write_history_tsv(std::ostream& out, const History& h) {
    out << "epoch\ttrain_loss\tdev_metric\n";
    char buf[64];
    for (const EpochRecord& r : h.records) {
        std::snprintf(buf, sizeof(buf), "%d\t%.6f\t", r.epoch, r.train_loss);
        out << buf;
        if (r.evaluated) {
            std::snprintf(buf, sizeof(buf), "%.6f", r.dev_metric);
            out << buf;
        }
        out << "\n";
    }
}

double relation_micro_f1(const models::ReModel& m, const std::vector<enc::ReEncoded>& dev,
                         const std::string& null_label) {
    std::vector<std::string> gold, pred;
    gold.reserve(dev.size());
    pred.reserve(dev.size());
    for (const enc::ReEncoded& e : dev) {
        gold.push_back(e.relation);
        pred.push_back(m.predict(e).label);
    }
    return eval::score_re(gold, pred, null_label).f1;
}

double sense_accuracy_on(const models::SenseModel& m, const std::vector<enc::SrlEncoded>& dev) {
    std::vector<std::string> gold, pred;
    gold.reserve(dev.size());
    pred.reserve(dev.size());
    for (const enc::SrlEncoded& e : dev) {
        gold.push_back(m.labels().label(e.labels[static_cast<size_t>(e.predicate_piece)]));
        pred.push_back(m.predict(e).label);
    }
    return eval::sense_accuracy(gold, pred);
}

double argument_micro_f1(const models::ArgModel& m, const std::vector<enc::SrlEncoded>& dev) {
    std::vector<eval::SpanSet> gold, pred;
    gold.reserve(dev.size());
    pred.reserve(dev.size());
    for (const enc::SrlEncoded& e : dev) {
        gold.push_back(eval::decode_bio(enc::gold_word_tags(e, m.labels())));
        pred.push_back(m.predict(e).spans);
    }
    return eval::score_spans(gold, pred).f1;
}

}  // namespace relsem::train
