#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "eevo/exit_policy.hpp"
#include "eevo/flops.hpp"
#include "eevo/model.hpp"

namespace eevo {

// Record of one generated token: the exit cascade stops at the first layer
// whose confidence meets the threshold, so `confidences` has exactly
// `exit_layer` entries.
struct TokenStep {
    TokenId token = 0;
    std::uint32_t exit_layer = 0;                            // 1-based
    std::vector<std::pair<std::uint32_t, float>> confidences;  // (layer, c)
    std::optional<std::uint32_t> pruned_at;                  // p, when W_t was built
    double threshold = 0.0;                                  // lambda_t for this token
};

struct Timing {
    double total_s = 0.0;
    double confidence_s = 0.0;
};

struct GenerationResult {
    std::vector<TokenId> tokens;
    std::vector<TokenStep> steps;
    FlopsLedger ledger;
    Timing timing;

    double avg_exit() const;
    double flops_per_token() const;
    std::vector<std::uint32_t> exit_layers() const;
};

struct GenerationStop {
    // Overrides policy.max_new_tokens for this run (cap and decay
    // denominator alike); may be zero.
    std::optional<std::size_t> max_new_tokens;
    // Stop after emitting this token (it is included in the output).
    std::optional<TokenId> end_token;
};

// Runs the prompt prefix through all layers, filling the cache. Prompt
// positions are not exit sites and incur no confidence cost.
void ingest_context(const ModelWeights& weights, KvCache& cache,
                    std::span<const TokenId> context, FlopsLedger& ledger);

// One early-exit decode step for `input` at absolute position `position`
// (generated-token index `token_index` drives the threshold schedule).
// Walks layers 1..L, projecting logits with W — or with W_t once pruning
// has happened in DVP mode — and exits at the first layer whose confidence
// meets the threshold; layer L exits unconditionally. In DVP mode the
// pruned vocabulary is built from exit p's logits when the cascade moves
// past p. After the exit, skipped layers receive copied-state keys/values
// so later tokens can attend to this position.
TokenStep decode_token(const ModelWeights& weights, KvCache& cache, TokenId input,
                       std::size_t position, std::size_t token_index,
                       const ExitPolicy& policy, DecodeMode mode, FlopsLedger& ledger,
                       double* confidence_seconds = nullptr);

// Fills keys/values for layers exit_layer+1..L at `position` from the exit
// layer's hidden state (CALM-style state copying). FLOPs recorded under
// state_propagation.
void propagate_state(const ModelWeights& weights, KvCache& cache, std::uint32_t exit_layer,
                     std::span<const float> h, std::size_t position,
                     FlopsLedger* ledger = nullptr);

// Prompt ingestion followed by up to N decode steps (or until the end
// token). Throws CapacityError before emitting anything when
// prompt.size() + N exceeds max_seq.
GenerationResult generate(const ModelWeights& weights, std::span<const TokenId> prompt,
                          const ExitPolicy& policy, DecodeMode mode,
                          const GenerationStop& stop = {});

}  // namespace eevo
