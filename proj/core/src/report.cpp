#include "eevo/report.hpp"

#include <cstdio>

#include <json.hpp>

#include "eevo/flops.hpp"

namespace eevo {

namespace {

using Json = nlohmann::ordered_json;

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string compact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

Json policy_json(const ExitPolicy& policy) {
    Json j;
    j["measure"] = to_string(policy.measure);
    j["schedule"] = to_string(policy.schedule.kind);
    j["lambda"] = policy.schedule.lambda;
    j["tau"] = policy.schedule.tau;
    if (policy.prune_exit) {
        j["p"] = *policy.prune_exit;
    } else {
        j["p"] = nullptr;
    }
    j["K"] = policy.prune_size;
    j["N"] = policy.max_new_tokens;
    return j;
}

Json ledger_json(const FlopsLedger& ledger) {
    Json j;
    for (std::size_t i = 0; i < kFlopCategoryCount; ++i) {
        j[std::string(to_string(static_cast<FlopCategory>(i)))] = ledger.counters()[i];
    }
    j["total"] = ledger.total();
    Json per_token = Json::array();
    for (const auto& counters : ledger.per_token()) {
        Json row = Json::array();
        for (std::uint64_t v : counters) {
            row.push_back(v);
        }
        per_token.push_back(std::move(row));
    }
    j["per_token"] = std::move(per_token);
    return j;
}

}  // namespace

std::string trace_json(const GenerationResult& result, const TraceRunInfo& info) {
    Json j;
    j["schema_version"] = 1;

    Json config;
    config["model"] = {
        {"layers", info.model.layers},   {"d_model", info.model.d_model},
        {"d_vocab", info.model.d_vocab}, {"n_heads", info.model.n_heads},
        {"d_ff", info.model.d_ff},       {"max_seq", info.model.max_seq},
    };
    config["policy"] = policy_json(info.policy);
    config["mode"] = to_string(info.mode);
    config["prompt_length"] = info.prompt_length;
    j["config"] = std::move(config);

    j["tokens"] = result.tokens;

    Json steps = Json::array();
    for (const TokenStep& s : result.steps) {
        Json step;
        step["token"] = s.token;
        step["exit_layer"] = s.exit_layer;
        Json confs = Json::array();
        for (const auto& [layer, c] : s.confidences) {
            confs.push_back(Json::array({layer, static_cast<double>(c)}));
        }
        step["confidences"] = std::move(confs);
        if (s.pruned_at) {
            step["pruned_at"] = *s.pruned_at;
        } else {
            step["pruned_at"] = nullptr;
        }
        step["threshold"] = s.threshold;
        steps.push_back(std::move(step));
    }
    j["steps"] = std::move(steps);

    j["ledger"] = ledger_json(result.ledger);
    j["timing"] = {
        {"total_s", result.timing.total_s},
        {"confidence_s", result.timing.confidence_s},
    };
    return j.dump(2) + "\n";
}

std::string bench_csv(std::span<const BenchRow> rows) {
    std::string out = "dataset,mode,lambda,score,flops_per_token,avg_exit,conf_time_s\n";
    for (const BenchRow& r : rows) {
        out += r.dataset;
        out += ',';
        out += to_string(r.mode);
        out += ',';
        out += compact(r.lambda);
        out += ',';
        out += fixed(r.score, 6);
        out += ',';
        out += fixed(r.flops_per_token, 3);
        out += ',';
        out += fixed(r.avg_exit, 4);
        out += ',';
        out += fixed(r.conf_time_s, 6);
        out += '\n';
    }
    return out;
}

std::string rank_summary_csv(std::span<const RankSummaryRow> rows,
                             std::span<const std::size_t> ks) {
    std::string out = "layer,mean_rank,median_rank";
    for (std::size_t k : ks) {
        out += ",coverage_" + std::to_string(k);
    }
    out += '\n';
    for (const RankSummaryRow& r : rows) {
        out += std::to_string(r.layer);
        out += ',';
        out += fixed(r.mean_rank, 4);
        out += ',';
        out += fixed(r.median_rank, 4);
        for (double c : r.coverage) {
            out += ',';
            out += fixed(c, 6);
        }
        out += '\n';
    }
    return out;
}

std::string calibration_json(const CalibrationReport& report) {
    Json j;
    j["schema_version"] = 1;
    j["epsilon"] = report.epsilon;
    Json grid = Json::array();
    for (const CalibrationCell& cell : report.grid) {
        Json c;
        c["p"] = cell.p;
        c["K"] = cell.k;
        c["score"] = cell.score;
        c["drop"] = cell.drop;
        c["expected_confidence_flops"] = cell.expected_confidence_flops;
        c["feasible"] = cell.feasible;
        grid.push_back(std::move(c));
    }
    j["grid"] = std::move(grid);
    j["chosen"] = {
        {"p", report.chosen_p},
        {"K", report.chosen_k},
        {"fallback", report.fallback},
    };
    return j.dump(2) + "\n";
}

}  // namespace eevo
