#include "eevo/flops.hpp"

#include <algorithm>
#include <string>

#include "eevo/errors.hpp"

namespace eevo {

namespace {

constexpr std::array<std::string_view, kFlopCategoryCount> kCategoryNames = {
    "attention",          "ffn",
    "layernorm",          "confidence_projection",
    "confidence_softmax", "confidence_measure",
    "topk_select",        "state_propagation",
};

}  // namespace

std::string_view to_string(FlopCategory c) {
    return kCategoryNames[static_cast<std::size_t>(c)];
}

FlopCategory flop_category_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == name) {
            return static_cast<FlopCategory>(i);
        }
    }
    throw InvalidInput("unknown flop category: " + std::string(name));
}

void FlopsLedger::record(FlopCategory category, std::uint64_t count) {
    counters_[static_cast<std::size_t>(category)] += count;
}

void FlopsLedger::record(std::string_view category_name, std::uint64_t count) {
    record(flop_category_from_name(category_name), count);
}

std::uint64_t FlopsLedger::count(FlopCategory category) const {
    return counters_[static_cast<std::size_t>(category)];
}

std::uint64_t FlopsLedger::total() const {
    std::uint64_t sum = 0;
    for (std::uint64_t v : counters_) {
        sum += v;
    }
    return sum;
}

void FlopsLedger::begin_token() { token_mark_ = counters_; }

void FlopsLedger::end_token() {
    FlopCounters delta{};
    for (std::size_t i = 0; i < counters_.size(); ++i) {
        delta[i] = counters_[i] - token_mark_[i];
    }
    per_token_.push_back(delta);
}

void FlopsLedger::merge(const FlopsLedger& other) {
    for (std::size_t i = 0; i < counters_.size(); ++i) {
        counters_[i] += other.counters_[i];
    }
    per_token_.insert(per_token_.end(), other.per_token_.begin(), other.per_token_.end());
}

ConfidenceFlops expected_confidence_flops(DecodeMode mode, const ExitPolicy& policy,
                                          std::span<const std::uint32_t> exit_layers,
                                          std::uint64_t d_vocab, std::uint64_t d_model) {
    ConfidenceFlops out;
    for (std::uint32_t exit : exit_layers) {
        std::uint64_t rows = 0;
        if (mode == DecodeMode::dvp && policy.prune_exit) {
            const std::uint64_t p = *policy.prune_exit;
            const std::uint64_t full_exits = std::min<std::uint64_t>(exit, p);
            const std::uint64_t pruned_exits = exit > p ? exit - p : 0;
            rows = d_vocab * full_exits + policy.prune_size * pruned_exits;
        } else {
            rows = d_vocab * exit;
        }
        out.projection += projection_cost(rows, d_model);
        out.softmax += softmax_cost(rows);
        out.measure += measure_cost(rows);
    }
    return out;
}

}  // namespace eevo
