#include "eevo/decoder.hpp"

#include <chrono>

#include "eevo/dvp.hpp"
#include "eevo/errors.hpp"
#include "eevo/math.hpp"

namespace eevo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

double GenerationResult::avg_exit() const {
    if (steps.empty()) return 0.0;
    double sum = 0.0;
    for (const TokenStep& s : steps) {
        sum += static_cast<double>(s.exit_layer);
    }
    return sum / static_cast<double>(steps.size());
}

double GenerationResult::flops_per_token() const {
    if (tokens.empty()) return 0.0;
    return static_cast<double>(ledger.total()) / static_cast<double>(tokens.size());
}

std::vector<std::uint32_t> GenerationResult::exit_layers() const {
    std::vector<std::uint32_t> out;
    out.reserve(steps.size());
    for (const TokenStep& s : steps) {
        out.push_back(s.exit_layer);
    }
    return out;
}

void ingest_context(const ModelWeights& weights, KvCache& cache,
                    std::span<const TokenId> context, FlopsLedger& ledger) {
    std::size_t position = cache.size(1);
    for (TokenId token : context) {
        std::vector<float> h = input_state(weights, token, position);
        for (std::uint32_t layer = 1; layer <= weights.config.layers; ++layer) {
            h = forward_block(weights, layer, h, cache, position, &ledger);
        }
        ++position;
    }
}

void propagate_state(const ModelWeights& weights, KvCache& cache, std::uint32_t exit_layer,
                     std::span<const float> h, std::size_t position, FlopsLedger* ledger) {
    const ModelConfig& cfg = weights.config;
    if (exit_layer < 1 || exit_layer > cfg.layers) {
        throw InvalidInput("propagate_state: exit layer out of range");
    }
    const std::size_t d = cfg.d_model;
    for (std::uint32_t layer = exit_layer + 1; layer <= cfg.layers; ++layer) {
        const BlockWeights& block = weights.blocks[layer - 1];
        const std::vector<float> a = layer_norm(h, block.ln1_gain);
        const std::vector<float> k = matvec(block.wk, a);
        const std::vector<float> v = matvec(block.wv, a);
        if (cache.size(layer) != position) {
            throw InvalidInput("propagate_state: cache inconsistent with position");
        }
        cache.append(layer, k, v);
        if (ledger) {
            ledger->record(FlopCategory::state_propagation,
                           layer_norm_cost(d) + 2 * projection_cost(d, d));
        }
    }
}

TokenStep decode_token(const ModelWeights& weights, KvCache& cache, TokenId input,
                       std::size_t position, std::size_t token_index,
                       const ExitPolicy& policy, DecodeMode mode, FlopsLedger& ledger,
                       double* confidence_seconds) {
    const ModelConfig& cfg = weights.config;
    const Matrix& unembedding = weights.unembedding;
    const bool pruning_enabled = mode == DecodeMode::dvp && policy.prune_exit.has_value();
    const std::uint32_t prune_exit = pruning_enabled ? *policy.prune_exit : 0;

    const double lambda_t =
        threshold_at(policy.schedule, token_index, policy.max_new_tokens);

    TokenStep step;
    step.threshold = lambda_t;

    std::optional<PrunedVocab> pruned;
    std::vector<float> h = input_state(weights, input, position);

    for (std::uint32_t layer = 1; layer <= cfg.layers; ++layer) {
        h = forward_block(weights, layer, h, cache, position, &ledger);

        const bool use_pruned = pruned.has_value() && layer > prune_exit;
        const auto conf_start = Clock::now();
        std::vector<float> logits =
            use_pruned ? project_pruned(*pruned, h) : matvec(unembedding, h);
        const std::size_t rows = logits.size();
        ledger.record(FlopCategory::confidence_projection, projection_cost(rows, cfg.d_model));
        const std::vector<float> probs = softmax(logits);
        ledger.record(FlopCategory::confidence_softmax, softmax_cost(rows));
        const float c = confidence(probs, policy.measure);
        ledger.record(FlopCategory::confidence_measure, measure_cost(rows));
        if (confidence_seconds) {
            *confidence_seconds += seconds_since(conf_start);
        }

        step.confidences.emplace_back(layer, c);

        const bool exit_now = layer == cfg.layers || should_exit(c, lambda_t);
        if (exit_now) {
            const std::size_t best = argmax(logits);
            step.token = use_pruned ? remap(*pruned, best) : static_cast<TokenId>(best);
            step.exit_layer = layer;
            break;
        }
        if (pruning_enabled && layer == prune_exit) {
            // The cascade continues past p: fix the pruned vocabulary from
            // this exit's full logits. Selection scans the logits; the row
            // gather itself is free.
            pruned = prune(unembedding, logits, policy.prune_size, prune_exit);
            ledger.record(FlopCategory::topk_select, topk_cost(rows));
        }
    }

    if (pruned.has_value() && step.exit_layer > prune_exit) {
        step.pruned_at = prune_exit;
    }
    propagate_state(weights, cache, step.exit_layer, h, position, &ledger);
    return step;
}

GenerationResult generate(const ModelWeights& weights, std::span<const TokenId> prompt,
                          const ExitPolicy& policy, DecodeMode mode,
                          const GenerationStop& stop) {
    const ModelConfig& cfg = weights.config;
    validate_policy(policy, cfg.layers, cfg.d_vocab);
    if (mode == DecodeMode::dvp && !policy.prune_exit.has_value()) {
        throw InvalidInput("generate: dvp mode requires a prune exit p");
    }
    if (prompt.empty()) {
        throw InvalidInput("generate: prompt must not be empty");
    }
    const std::size_t n_tokens = stop.max_new_tokens.value_or(policy.max_new_tokens);
    if (prompt.size() + n_tokens > cfg.max_seq) {
        throw CapacityError("generate: prompt plus max_new_tokens exceeds max_seq");
    }

    const auto run_start = Clock::now();
    GenerationResult result;
    KvCache cache(cfg);

    // The last prompt token is the input to the first decode step; only the
    // prefix before it is plain context.
    ingest_context(weights, cache, prompt.first(prompt.size() - 1), result.ledger);

    if (n_tokens == 0) {
        result.timing.total_s = seconds_since(run_start);
        return result;
    }

    ExitPolicy run_policy = policy;
    run_policy.max_new_tokens = n_tokens;

    TokenId input = prompt.back();
    std::size_t position = prompt.size() - 1;
    for (std::size_t t = 0; t < n_tokens; ++t) {
        result.ledger.begin_token();
        TokenStep step = decode_token(weights, cache, input, position, t, run_policy, mode,
                                      result.ledger, &result.timing.confidence_s);
        result.ledger.end_token();
        result.tokens.push_back(step.token);
        input = step.token;
        ++position;
        result.steps.push_back(std::move(step));
        if (stop.end_token && result.tokens.back() == *stop.end_token) {
            break;
        }
    }

    result.timing.total_s = seconds_since(run_start);
    return result;
}

}  // namespace eevo
