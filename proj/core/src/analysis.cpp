#include "eevo/analysis.hpp"

#include <algorithm>

#include "eevo/errors.hpp"
#include "eevo/math.hpp"

namespace eevo {

namespace {

// Rank of `index` when the logits are sorted descending with the top_k
// tie-break (lower index first among equal values).
std::uint32_t rank_of(std::span<const float> logits, std::size_t index) {
    const float ref = logits[index];
    std::uint32_t rank = 1;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        if (logits[j] > ref || (logits[j] == ref && j < index)) {
            ++rank;
        }
    }
    return rank;
}

double prefix_agreement(std::span<const TokenId> base, std::span<const TokenId> other) {
    const std::size_t longer = std::max(base.size(), other.size());
    if (longer == 0) return 1.0;
    std::size_t common = 0;
    while (common < base.size() && common < other.size() && base[common] == other[common]) {
        ++common;
    }
    return static_cast<double>(common) / static_cast<double>(longer);
}

}  // namespace

RankTrace rank_trace(const ModelWeights& weights, std::span<const TokenId> prompt,
                     std::size_t n_tokens) {
    const ModelConfig& cfg = weights.config;
    if (prompt.empty()) {
        throw InvalidInput("rank_trace: prompt must not be empty");
    }
    if (prompt.size() + n_tokens > cfg.max_seq) {
        throw CapacityError("rank_trace: prompt plus n_tokens exceeds max_seq");
    }

    RankTrace trace;
    KvCache cache(cfg);
    FlopsLedger ledger;
    ingest_context(weights, cache, prompt.first(prompt.size() - 1), ledger);

    TokenId input = prompt.back();
    std::size_t position = prompt.size() - 1;
    std::vector<std::vector<float>> layer_logits(cfg.layers);
    for (std::size_t t = 0; t < n_tokens; ++t) {
        std::vector<float> h = input_state(weights, input, position);
        for (std::uint32_t layer = 1; layer <= cfg.layers; ++layer) {
            h = forward_block(weights, layer, h, cache, position, nullptr);
            layer_logits[layer - 1] = matvec(weights.unembedding, h);
        }
        const std::size_t token = argmax(layer_logits[cfg.layers - 1]);

        std::vector<std::uint32_t> ranks(cfg.layers);
        for (std::uint32_t layer = 1; layer <= cfg.layers; ++layer) {
            ranks[layer - 1] = rank_of(layer_logits[layer - 1], token);
        }
        trace.ranks.push_back(std::move(ranks));

        input = static_cast<TokenId>(token);
        ++position;
    }
    return trace;
}

std::vector<RankSummaryRow> rank_summary(std::span<const RankTrace> traces,
                                         std::span<const std::size_t> ks) {
    if (traces.empty()) {
        throw InvalidInput("rank_summary: no traces");
    }
    std::size_t layers = 0;
    for (const RankTrace& t : traces) {
        for (const auto& ranks : t.ranks) {
            if (layers == 0) {
                layers = ranks.size();
            } else if (ranks.size() != layers) {
                throw InvalidInput("rank_summary: traces disagree on layer count");
            }
        }
    }
    if (layers == 0) {
        throw InvalidInput("rank_summary: traces contain no tokens");
    }

    std::vector<RankSummaryRow> rows(layers);
    std::vector<std::uint32_t> pooled;
    for (std::size_t l = 0; l < layers; ++l) {
        pooled.clear();
        for (const RankTrace& t : traces) {
            for (const auto& ranks : t.ranks) {
                pooled.push_back(ranks[l]);
            }
        }
        std::sort(pooled.begin(), pooled.end());
        const std::size_t n = pooled.size();
        double sum = 0.0;
        for (std::uint32_t r : pooled) {
            sum += static_cast<double>(r);
        }
        RankSummaryRow& row = rows[l];
        row.layer = static_cast<std::uint32_t>(l + 1);
        row.mean_rank = sum / static_cast<double>(n);
        row.median_rank = n % 2 == 1 ? static_cast<double>(pooled[n / 2])
                                     : (static_cast<double>(pooled[n / 2 - 1]) +
                                        static_cast<double>(pooled[n / 2])) /
                                           2.0;
        row.coverage.reserve(ks.size());
        for (std::size_t k : ks) {
            const auto it = std::upper_bound(pooled.begin(), pooled.end(), k);
            row.coverage.push_back(static_cast<double>(it - pooled.begin()) /
                                   static_cast<double>(n));
        }
    }
    return rows;
}

CalibrationReport calibrate(const ModelWeights& weights,
                            const std::vector<std::vector<TokenId>>& prompts,
                            std::span<const std::uint32_t> p_grid,
                            std::span<const std::size_t> k_grid, double epsilon,
                            const ExitPolicy& policy_template) {
    if (p_grid.empty() || k_grid.empty()) {
        throw InvalidInput("calibrate: grid must not be empty");
    }
    if (prompts.empty()) {
        throw InvalidInput("calibrate: calibration prompts must not be empty");
    }
    if (epsilon < 0.0) {
        throw InvalidInput("calibrate: epsilon must be non-negative");
    }
    const ModelConfig& cfg = weights.config;

    std::vector<std::vector<TokenId>> baselines;
    baselines.reserve(prompts.size());
    for (const auto& prompt : prompts) {
        baselines.push_back(generate(weights, prompt, policy_template, DecodeMode::full).tokens);
    }

    CalibrationReport report;
    report.epsilon = epsilon;
    for (std::uint32_t p : p_grid) {
        for (std::size_t k : k_grid) {
            ExitPolicy policy = policy_template;
            policy.prune_exit = p;
            policy.prune_size = k;
            validate_policy(policy, cfg.layers, cfg.d_vocab);

            CalibrationCell cell;
            cell.p = p;
            cell.k = k;
            double agreement_sum = 0.0;
            for (std::size_t i = 0; i < prompts.size(); ++i) {
                const GenerationResult run =
                    generate(weights, prompts[i], policy, DecodeMode::dvp);
                agreement_sum += prefix_agreement(baselines[i], run.tokens);
                const auto exits = run.exit_layers();
                cell.expected_confidence_flops +=
                    expected_confidence_flops(DecodeMode::dvp, policy, exits, cfg.d_vocab,
                                              cfg.d_model)
                        .total();
            }
            cell.score = agreement_sum / static_cast<double>(prompts.size());
            cell.drop = 1.0 - cell.score;
            cell.feasible = cell.drop <= epsilon;
            report.grid.push_back(cell);
        }
    }

    const CalibrationCell* best = nullptr;
    for (const CalibrationCell& cell : report.grid) {
        if (!cell.feasible) continue;
        if (best == nullptr ||
            cell.expected_confidence_flops < best->expected_confidence_flops ||
            (cell.expected_confidence_flops == best->expected_confidence_flops &&
             (cell.k < best->k || (cell.k == best->k && cell.p < best->p)))) {
            best = &cell;
        }
    }
    if (best != nullptr) {
        report.chosen_p = best->p;
        report.chosen_k = best->k;
    } else {
        report.fallback = true;
        report.chosen_p = *std::min_element(p_grid.begin(), p_grid.end());
        report.chosen_k = cfg.d_vocab;
    }
    return report;
}

}  // namespace eevo
