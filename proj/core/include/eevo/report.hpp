#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eevo/analysis.hpp"
#include "eevo/decoder.hpp"
#include "eevo/exit_policy.hpp"
#include "eevo/model.hpp"

namespace eevo {

// Emitted reports are byte-stable for fixed seeds and flags; only the
// values under "timing" vary between runs.

struct TraceRunInfo {
    ModelConfig model;
    ExitPolicy policy;
    DecodeMode mode = DecodeMode::full;
    std::size_t prompt_length = 0;
};

// Trace schema, version 1: schema_version, config, tokens,
// steps[{token, exit_layer, confidences[[layer, c]], pruned_at, threshold}],
// ledger{categories..., total, per_token}, timing{total_s, confidence_s}.
std::string trace_json(const GenerationResult& result, const TraceRunInfo& info);

struct BenchRow {
    std::string dataset;
    DecodeMode mode = DecodeMode::full;
    double lambda = 0.0;
    double score = 0.0;  // token agreement against the full-mode baseline
    double flops_per_token = 0.0;
    double avg_exit = 0.0;
    double conf_time_s = 0.0;
};

// Header: dataset,mode,lambda,score,flops_per_token,avg_exit,conf_time_s
std::string bench_csv(std::span<const BenchRow> rows);

// Header: layer,mean_rank,median_rank,coverage_<k> for each k.
std::string rank_summary_csv(std::span<const RankSummaryRow> rows,
                             std::span<const std::size_t> ks);

std::string calibration_json(const CalibrationReport& report);

}  // namespace eevo
