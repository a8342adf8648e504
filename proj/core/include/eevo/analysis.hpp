#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eevo/decoder.hpp"
#include "eevo/model.hpp"

namespace eevo {

// Per generated token, the 1-based rank of the final (layer L) argmax token
// within every layer's full-vocabulary logits, descending order with the
// top_k tie-break. ranks[t][l-1] is the rank at layer l; ranks[t][L-1] == 1.
struct RankTrace {
    std::vector<std::vector<std::uint32_t>> ranks;
};

// Greedy full-depth generation (exiting disabled), recording the rank of
// the final predicted token at every layer.
RankTrace rank_trace(const ModelWeights& weights, std::span<const TokenId> prompt,
                     std::size_t n_tokens);

struct RankSummaryRow {
    std::uint32_t layer = 0;
    double mean_rank = 0.0;
    double median_rank = 0.0;          // midpoint of the two middle values when even
    std::vector<double> coverage;      // fraction of tokens with rank <= ks[i]
};

// Pools tokens across traces. Throws InvalidInput on empty input or
// mismatched layer counts.
std::vector<RankSummaryRow> rank_summary(std::span<const RankTrace> traces,
                                         std::span<const std::size_t> ks);

struct CalibrationCell {
    std::uint32_t p = 0;
    std::size_t k = 0;
    double score = 0.0;  // mean prefix-agreement with the full-mode baseline
    double drop = 0.0;   // 1 - score
    std::uint64_t expected_confidence_flops = 0;
    bool feasible = false;
};

struct CalibrationReport {
    double epsilon = 0.0;
    std::vector<CalibrationCell> grid;  // p-major, in the given grid order
    std::uint32_t chosen_p = 0;
    std::size_t chosen_k = 0;
    // Set when no grid point met the drop budget; the report then names the
    // full-vocabulary configuration instead of a grid cell.
    bool fallback = false;
};

// Grid search over (p, K): score each cell against full-mode baselines on
// the calibration prompts, keep cells with drop <= epsilon, and pick the
// one with the smallest expected confidence cost (ties: smaller K, then
// smaller p).
CalibrationReport calibrate(const ModelWeights& weights,
                            const std::vector<std::vector<TokenId>>& prompts,
                            std::span<const std::uint32_t> p_grid,
                            std::span<const std::size_t> k_grid, double epsilon,
                            const ExitPolicy& policy_template);

}  // namespace eevo
