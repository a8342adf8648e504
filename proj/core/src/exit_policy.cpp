#include "eevo/exit_policy.hpp"

#include <algorithm>
#include <cmath>

#include "eevo/errors.hpp"

namespace eevo {

std::string_view to_string(ConfidenceMeasure m) {
    switch (m) {
        case ConfidenceMeasure::max_softmax: return "max-softmax";
        case ConfidenceMeasure::top2_diff: return "top2-diff";
    }
    return "?";
}

std::string_view to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::fixed: return "static";
        case ScheduleKind::decaying: return "decaying";
    }
    return "?";
}

std::string_view to_string(DecodeMode m) {
    switch (m) {
        case DecodeMode::full: return "full";
        case DecodeMode::dvp: return "dvp";
    }
    return "?";
}

ConfidenceMeasure confidence_measure_from_name(std::string_view name) {
    if (name == "max-softmax") return ConfidenceMeasure::max_softmax;
    if (name == "top2-diff") return ConfidenceMeasure::top2_diff;
    throw InvalidInput("unknown confidence measure: " + std::string(name));
}

ScheduleKind schedule_kind_from_name(std::string_view name) {
    if (name == "static") return ScheduleKind::fixed;
    if (name == "decaying") return ScheduleKind::decaying;
    throw InvalidInput("unknown threshold schedule: " + std::string(name));
}

DecodeMode decode_mode_from_name(std::string_view name) {
    if (name == "full") return DecodeMode::full;
    if (name == "dvp") return DecodeMode::dvp;
    throw InvalidInput("unknown decode mode: " + std::string(name));
}

float confidence(std::span<const float> probs, ConfidenceMeasure measure) {
    if (probs.empty()) {
        throw InvalidInput("confidence: empty probability vector");
    }
    switch (measure) {
        case ConfidenceMeasure::max_softmax: {
            float best = probs[0];
            for (float p : probs) {
                best = std::max(best, p);
            }
            return best;
        }
        case ConfidenceMeasure::top2_diff: {
            if (probs.size() < 2) {
                throw InvalidInput("confidence: top2-diff needs at least two entries");
            }
            float first = -1.0f;
            float second = -1.0f;
            for (float p : probs) {
                if (p > first) {
                    second = first;
                    first = p;
                } else if (p > second) {
                    second = p;
                }
            }
            return first - second;
        }
    }
    throw InvalidInput("confidence: unknown measure");
}

double threshold_at(const ThresholdSchedule& schedule, std::size_t t, std::size_t n) {
    if (t >= n) {
        throw InvalidInput("threshold_at: token index past the generation cap");
    }
    if (schedule.kind == ScheduleKind::fixed) {
        return schedule.lambda;
    }
    const double decay =
        std::exp(-schedule.tau * static_cast<double>(t) / static_cast<double>(n));
    return std::clamp(0.9 * schedule.lambda + 0.1 * decay, 0.0, 1.0);
}

void validate_policy(const ExitPolicy& policy, std::uint32_t layers, std::size_t d_vocab) {
    if (policy.schedule.lambda < 0.0 || policy.schedule.lambda > 1.0) {
        throw InvalidInput("policy: lambda must be in [0,1]");
    }
    if (policy.schedule.tau < 0.0) {
        throw InvalidInput("policy: tau must be non-negative");
    }
    if (policy.max_new_tokens < 1) {
        throw InvalidInput("policy: max_new_tokens must be at least 1");
    }
    if (policy.prune_exit) {
        const std::uint32_t p = *policy.prune_exit;
        if (p < 1 || p >= layers) {
            throw InvalidInput("policy: prune exit p must satisfy 1 <= p < layers");
        }
        if (policy.prune_size < 1 || policy.prune_size > d_vocab) {
            throw InvalidInput("policy: prune size K must satisfy 1 <= K <= d_vocab");
        }
    }
}

}  // namespace eevo
