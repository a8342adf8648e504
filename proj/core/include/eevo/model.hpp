#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eevo/flops.hpp"
#include "eevo/math.hpp"

namespace eevo {

using TokenId = std::int32_t;

struct ModelConfig {
    std::uint32_t layers = 8;     // L
    std::uint32_t d_model = 64;
    std::uint32_t d_vocab = 512;
    std::uint32_t n_heads = 4;
    std::uint32_t d_ff = 256;
    std::uint32_t max_seq = 256;

    // L >= 2, d_model % n_heads == 0, d_vocab >= 2, everything positive.
    // Throws InvalidInput naming the offending field.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

struct BlockWeights {
    std::vector<float> ln1_gain;  // d_model
    Matrix wq, wk, wv, wo;        // d_model x d_model
    std::vector<float> ln2_gain;  // d_model
    Matrix ff1;                   // d_ff x d_model
    Matrix ff2;                   // d_model x d_ff
};

// Decoder-only weights. `unembedding` is the single matrix W shared by the
// logit projection at every exit; it is independent of `embedding`.
struct ModelWeights {
    ModelConfig config;
    Matrix embedding;             // E, d_vocab x d_model
    Matrix positional;            // max_seq x d_model
    std::vector<BlockWeights> blocks;
    Matrix unembedding;           // W, d_vocab x d_model
};

// Deterministic seeded initialization: every Gaussian parameter is drawn
// with standard deviation 0.02/sqrt(L) from the counter-based generator in
// rng.hpp, numbered in serialization order. Layer-norm gains start at one
// and consume no randomness.
ModelWeights init_random(const ModelConfig& config, std::uint64_t seed);

// Binary little-endian format, no padding:
//   magic "EEVO" | version u32 (=1) | L, d_model, d_vocab, n_heads, d_ff,
//   max_seq as u32 | tensors as row-major IEEE-754 binary32 in the order
//   E, P, per layer (ln1_gain, Wq, Wk, Wv, Wo, ln2_gain, W1, W2), W.
// load(save(w)) reproduces w bit-exactly.
void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);

// Row token_id of E. Throws InvalidInput when token_id is out of range.
std::vector<float> embed(const ModelWeights& weights, TokenId token_id);

// E[token_id] + P[position]: the block-stack input for one token.
std::vector<float> input_state(const ModelWeights& weights, TokenId token_id,
                               std::size_t position);

// Per-layer key/value rows for all positions processed so far. One cache
// per decode stream; never shared.
class KvCache {
public:
    explicit KvCache(const ModelConfig& config);

    std::size_t size(std::uint32_t layer) const;  // positions stored, 1-based layer
    void append(std::uint32_t layer, std::span<const float> key, std::span<const float> value);

    const float* key_row(std::uint32_t layer, std::size_t position) const;
    const float* value_row(std::uint32_t layer, std::size_t position) const;

    const ModelConfig& config() const { return config_; }

private:
    ModelConfig config_;
    std::vector<std::vector<float>> keys_;    // per layer, size(layer)*d_model
    std::vector<std::vector<float>> values_;
};

// One pre-norm block: causal multi-head attention over the cached positions
// plus the current one, then a GELU feed-forward. Appends this position's
// key/value at `layer` (1-based). The cache must hold exactly `position`
// entries for that layer. Records attention/ffn/layernorm FLOPs when a
// ledger is given.
std::vector<float> forward_block(const ModelWeights& weights, std::uint32_t layer,
                                 std::span<const float> h, KvCache& cache,
                                 std::size_t position, FlopsLedger* ledger = nullptr);

}  // namespace eevo
