// Microbenchmarks for the hot paths: sub-word segmentation, encoder and
// BiLSTM forwards, a full forward/backward sweep, one Adam update, and the
// span scorer.  Sizes follow the desk-scale preset so the numbers track what
// the test suite and the CLI actually run.
#include <benchmark/benchmark.h>

#include <string>
#include <utility>
#include <vector>

#include "relsem/eval.hpp"
#include "relsem/nn.hpp"
#include "relsem/rng.hpp"
#include "relsem/tensor.hpp"
#include "relsem/tokenizer.hpp"

namespace {

using relsem::Rng;
using relsem::Tensor;
namespace nn = relsem::nn;
namespace tok = relsem::tok;
namespace ev = relsem::eval;

tok::Vocab bench_vocab() {
    return tok::Vocab::from_tokens({
        "the",  "quick", "brown", "fox",  "jump", "##ed",  "##s",   "over",
        "lazy", "dog",   "un",    "##bel", "##iev", "##ab", "##ly", "fast",
        "re",   "##lent", "##less", "pace", "a",   "in",    "and",  "##ing",
    });
}

std::vector<std::string> bench_sentence() {
    return {"the",  "quick",        "brown", "fox", "jumped", "over",   "the",
            "lazy", "dog",          "at",    "an",  "unbelievably",     "fast",
            "and",  "relentless",   "pace"};
}

nn::EncoderConfig bench_encoder_config() {
    nn::EncoderConfig cfg;
    cfg.layers = 2;
    cfg.model_dim = 32;
    cfg.heads = 4;
    cfg.ff_dim = 64;
    cfg.vocab_size = 100;
    cfg.max_positions = 128;
    cfg.dropout = 0.1;
    return cfg;
}

struct EncoderFixture {
    nn::ParamMap pm;
    nn::Encoder enc;
    std::vector<int> token_ids;
    std::vector<int> segment_ids;
    std::vector<uint8_t> attn_mask;

    explicit EncoderFixture(int seq_len) {
        Rng rng(7);
        enc = nn::Encoder(pm, "encoder", bench_encoder_config(), rng);
        Rng ids(11);
        for (int i = 0; i < seq_len; ++i) {
            token_ids.push_back(static_cast<int>(ids.next_below(100)));
            segment_ids.push_back(0);
            attn_mask.push_back(1);
        }
    }
};

}  // namespace

static void BM_TokenizeWords(benchmark::State& state) {
    tok::Vocab vocab = bench_vocab();
    std::vector<std::string> words = bench_sentence();
    for (auto _ : state) {
        tok::TokenizedSentence sent = tok::tokenize_words(words, vocab);
        benchmark::DoNotOptimize(sent.ids.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(words.size()));
}
BENCHMARK(BM_TokenizeWords);

static void BM_Wordpiece(benchmark::State& state) {
    tok::Vocab vocab = bench_vocab();
    std::string word = "unbelievably";
    for (auto _ : state) {
        std::vector<std::string> pieces = tok::wordpiece(word, vocab);
        benchmark::DoNotOptimize(pieces.data());
    }
}
BENCHMARK(BM_Wordpiece);

static void BM_EncoderForward(benchmark::State& state) {
    EncoderFixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Tensor h = fx.enc.forward(fx.token_ids, fx.segment_ids, fx.attn_mask);
        benchmark::DoNotOptimize(h.values().data());
    }
}
BENCHMARK(BM_EncoderForward)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_EncoderForwardBackward(benchmark::State& state) {
    EncoderFixture fx(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Tensor h = fx.enc.forward(fx.token_ids, fx.segment_ids, fx.attn_mask);
        Tensor loss = relsem::sum(relsem::mul(h, relsem::sigmoid(h)));
        loss.backward();
        fx.pm.zero_grads();
        benchmark::DoNotOptimize(loss.item());
    }
}
BENCHMARK(BM_EncoderForwardBackward)->Arg(64)->Unit(benchmark::kMicrosecond);

static void BM_BiLstmForward(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    nn::ParamMap pm;
    Rng rng(13);
    nn::BiLstm lstm(pm, "lstm", 32, 32, rng);
    Tensor seq = Tensor::randn_trunc({n, 32}, 0.5, rng);
    for (auto _ : state) {
        nn::BiLstm::Out out = lstm.forward(seq);
        benchmark::DoNotOptimize(out.states.values().data());
    }
}
BENCHMARK(BM_BiLstmForward)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

static void BM_AdamStep(benchmark::State& state) {
    nn::ParamMap pm;
    Rng rng(7);
    nn::Encoder enc(pm, "encoder", bench_encoder_config(), rng);
    std::vector<Tensor> params = pm.tensors();
    for (Tensor& p : params) {
        std::vector<double>& g = p.grad();
        for (double& v : g) v = 1e-3;
    }
    nn::Adam opt(params, nn::AdamConfig{});
    for (auto _ : state) {
        opt.step();
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pm.total_values()));
}
BENCHMARK(BM_AdamStep);

static void BM_ScoreSpans(benchmark::State& state) {
    Rng rng(99);
    std::vector<ev::SpanSet> gold, pred;
    const std::vector<std::string> roles = {"ARG0", "ARG1", "ARG2", "ARGM-TMP"};
    for (int i = 0; i < 1000; ++i) {
        ev::SpanSet g, p;
        for (int k = 0; k < 3; ++k) {
            int start = static_cast<int>(rng.next_below(20));
            int end = start + static_cast<int>(rng.next_below(4));
            const std::string& role = roles[rng.next_below(roles.size())];
            g.insert({start, end, role});
            if (rng.next_below(2) == 0) {
                p.insert({start, end, role});  // agreeing prediction
            } else {
                p.insert({start, end + 1, role});  // boundary miss
            }
        }
        gold.push_back(std::move(g));
        pred.push_back(std::move(p));
    }
    for (auto _ : state) {
        ev::ScoreReport rep = ev::score_spans(gold, pred);
        benchmark::DoNotOptimize(rep.f1);
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_ScoreSpans);

static void BM_DecodeBio(benchmark::State& state) {
    std::vector<std::string> tags;
    for (int i = 0; i < 10; ++i) {
        tags.push_back("B-ARG0");
        tags.push_back("I-ARG0");
        tags.push_back("O");
        tags.push_back("B-ARG1");
        tags.push_back("O");
    }
    for (auto _ : state) {
        ev::SpanSet spans = ev::decode_bio(tags);
        benchmark::DoNotOptimize(spans.size());
    }
}
BENCHMARK(BM_DecodeBio);

BENCHMARK_MAIN();
