#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "eevo/exit_policy.hpp"

namespace eevo {

// Counting conventions, applied identically in both decode modes so that
// ratios are meaningful:
//   dot product of length n        2n   (one multiply + one add per entry)
//   softmax over n                 5n   (max, subtract, exp, sum, divide)
//   confidence measure over n       n   (one scan)
//   top-k selection over n          n   (one scan)
//   layer norm over n            6n+2   (mean, center, square, accumulate,
//                                        scale, gain; sqrt + divide)
//   gelu over n                     n
//   gathers/copies                  0   (memory traffic, not arithmetic)

enum class FlopCategory : std::size_t {
    attention = 0,
    ffn,
    layernorm,
    confidence_projection,
    confidence_softmax,
    confidence_measure,
    topk_select,
    state_propagation,
};

inline constexpr std::size_t kFlopCategoryCount = 8;

std::string_view to_string(FlopCategory c);
FlopCategory flop_category_from_name(std::string_view name);  // throws InvalidInput

constexpr std::uint64_t projection_cost(std::uint64_t rows, std::uint64_t cols) {
    return 2 * rows * cols;
}
constexpr std::uint64_t softmax_cost(std::uint64_t n) { return 5 * n; }
constexpr std::uint64_t measure_cost(std::uint64_t n) { return n; }
constexpr std::uint64_t topk_cost(std::uint64_t n) { return n; }
constexpr std::uint64_t layer_norm_cost(std::uint64_t n) { return 6 * n + 2; }
constexpr std::uint64_t gelu_cost(std::uint64_t n) { return n; }

using FlopCounters = std::array<std::uint64_t, kFlopCategoryCount>;

class FlopsLedger {
public:
    void record(FlopCategory category, std::uint64_t count);
    void record(std::string_view category_name, std::uint64_t count);

    std::uint64_t count(FlopCategory category) const;
    std::uint64_t total() const;
    const FlopCounters& counters() const { return counters_; }

    // Per-token subtotals: begin_token snapshots the counters, end_token
    // stores the delta as one entry.
    void begin_token();
    void end_token();
    const std::vector<FlopCounters>& per_token() const { return per_token_; }

    void merge(const FlopsLedger& other);

private:
    FlopCounters counters_{};
    FlopCounters token_mark_{};
    std::vector<FlopCounters> per_token_;
};

// Closed-form confidence-estimation cost for a run with the given exit
// layers, split by category. Full mode per token: projection
// 2*d_model*d_vocab*exit, softmax 5*d_vocab*exit, measure d_vocab*exit.
// DVP mode replaces d_vocab by K for the exits past p:
// rows = d_vocab*min(exit, p) + K*max(exit - p, 0).
struct ConfidenceFlops {
    std::uint64_t projection = 0;
    std::uint64_t softmax = 0;
    std::uint64_t measure = 0;

    std::uint64_t total() const { return projection + softmax + measure; }
};

ConfidenceFlops expected_confidence_flops(DecodeMode mode, const ExitPolicy& policy,
                                          std::span<const std::uint32_t> exit_layers,
                                          std::uint64_t d_vocab, std::uint64_t d_model);

}  // namespace eevo
