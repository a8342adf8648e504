#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace eevo {

enum class ConfidenceMeasure {
    max_softmax,  // largest probability
    top2_diff,    // gap between the two largest probabilities
};

enum class ScheduleKind {
    fixed,     // "static" at the CLI: lambda for every token
    decaying,  // threshold decreases with the token index
};

enum class DecodeMode {
    full,  // full-vocabulary confidence at every exit
    dvp,   // pruned vocabulary after exit p
};

std::string_view to_string(ConfidenceMeasure m);
std::string_view to_string(ScheduleKind k);
std::string_view to_string(DecodeMode m);
ConfidenceMeasure confidence_measure_from_name(std::string_view name);
ScheduleKind schedule_kind_from_name(std::string_view name);
DecodeMode decode_mode_from_name(std::string_view name);

struct ThresholdSchedule {
    ScheduleKind kind = ScheduleKind::fixed;
    double lambda = 0.6;
    double tau = 4.0;  // decaying only
};

struct ExitPolicy {
    ConfidenceMeasure measure = ConfidenceMeasure::top2_diff;
    ThresholdSchedule schedule;
    std::optional<std::uint32_t> prune_exit;  // p, 1-based; empty disables pruning
    std::size_t prune_size = 64;              // K
    std::size_t max_new_tokens = 16;          // N
};

// Scalar confidence in [0,1] from a probability vector. For top2_diff the
// vector must have at least two entries.
float confidence(std::span<const float> probs, ConfidenceMeasure measure);

// Threshold for the 0-based generated-token index t of a run emitting at
// most n tokens. fixed -> lambda. decaying ->
// clamp_[0,1](0.9*lambda + 0.1*exp(-tau*t/n)), non-increasing in t.
// Throws InvalidInput unless t < n.
double threshold_at(const ThresholdSchedule& schedule, std::size_t t, std::size_t n);

// Eq.-style inclusive comparison: exit as soon as c >= threshold.
inline bool should_exit(double c, double threshold) { return c >= threshold; }

// Checks schedule ranges plus, when p is set, 1 <= p < layers and
// 1 <= K <= d_vocab; N >= 1 always. Throws InvalidInput naming the field.
void validate_policy(const ExitPolicy& policy, std::uint32_t layers, std::size_t d_vocab);

}  // namespace eevo
