// Microbenchmarks for the projection/selection kernels and the per-token
// decode step, full vocabulary vs pruned.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "eevo/decoder.hpp"
#include "eevo/dvp.hpp"
#include "eevo/math.hpp"
#include "eevo/model.hpp"

namespace {

eevo::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    eevo::Matrix m(rows, cols);
    for (float& v : m.data) {
        v = dist(rng);
    }
    return m;
}

std::vector<float> random_vector(std::size_t n, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> v(n);
    for (float& x : v) {
        x = dist(rng);
    }
    return v;
}

void BM_full_projection(benchmark::State& state) {
    const auto d_vocab = static_cast<std::size_t>(state.range(0));
    const auto d_model = static_cast<std::size_t>(state.range(1));
    const eevo::Matrix w = random_matrix(d_vocab, d_model, 1);
    const auto h = random_vector(d_model, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eevo::matvec(w, h));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(d_vocab * d_model));
}
BENCHMARK(BM_full_projection)->Args({512, 64})->Args({6400, 64})->Args({32000, 64});

void BM_pruned_projection(benchmark::State& state) {
    const auto d_vocab = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const std::size_t d_model = 64;
    const eevo::Matrix w = random_matrix(d_vocab, d_model, 1);
    const auto selector = random_vector(d_vocab, 3);
    const auto h = random_vector(d_model, 2);
    const eevo::PrunedVocab pv = eevo::prune(w, selector, k, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eevo::project_pruned(pv, h));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(k * d_model));
}
BENCHMARK(BM_pruned_projection)->Args({6400, 64})->Args({32000, 64})->Args({32000, 512});

void BM_prune(benchmark::State& state) {
    const auto d_vocab = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const eevo::Matrix w = random_matrix(d_vocab, 64, 1);
    const auto logits = random_vector(d_vocab, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eevo::prune(w, logits, k, 2));
    }
}
BENCHMARK(BM_prune)->Args({6400, 64})->Args({32000, 64})->Args({32000, 512});

void BM_softmax(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto logits = random_vector(n, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eevo::softmax(logits));
    }
}
BENCHMARK(BM_softmax)->Arg(64)->Arg(512)->Arg(6400)->Arg(32000);

void decode_token_bench(benchmark::State& state, eevo::DecodeMode mode) {
    eevo::ModelConfig cfg;
    cfg.layers = 8;
    cfg.d_model = 64;
    cfg.d_vocab = 6400;
    cfg.n_heads = 4;
    cfg.d_ff = 128;
    cfg.max_seq = 4096;
    const eevo::ModelWeights w = eevo::init_random(cfg, 9);

    eevo::ExitPolicy policy;
    policy.measure = eevo::ConfidenceMeasure::top2_diff;
    policy.schedule.lambda = 0.99;  // decode runs the full stack
    policy.prune_exit = 2;
    policy.prune_size = 64;
    policy.max_new_tokens = cfg.max_seq;

    eevo::KvCache cache(cfg);
    eevo::FlopsLedger ledger;
    std::size_t position = 0;
    eevo::TokenId input = 1;
    for (auto _ : state) {
        if (position + 1 >= cfg.max_seq) {
            state.PauseTiming();
            cache = eevo::KvCache(cfg);
            position = 0;
            state.ResumeTiming();
        }
        const auto step =
            eevo::decode_token(w, cache, input, position, 0, policy, mode, ledger);
        benchmark::DoNotOptimize(step);
        input = step.token;
        ++position;
    }
}
void BM_decode_token_full(benchmark::State& state) {
    decode_token_bench(state, eevo::DecodeMode::full);
}
void BM_decode_token_dvp(benchmark::State& state) {
    decode_token_bench(state, eevo::DecodeMode::dvp);
}
BENCHMARK(BM_decode_token_full);
BENCHMARK(BM_decode_token_dvp);

}  // namespace

BENCHMARK_MAIN();
