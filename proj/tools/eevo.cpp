// eevo - early-exit decoding with dynamic vocabulary pruning.
//
// Subcommands: init-model, generate, bench, rank-analyze, calibrate.
// Exit status: 0 ok, 2 usage, 3 I/O, 4 numeric/invariant violation.
// All errors print a single line "eevo: error: <class>: <message>".

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eevo/analysis.hpp"
#include "eevo/decoder.hpp"
#include "eevo/errors.hpp"
#include "eevo/model.hpp"
#include "eevo/report.hpp"

namespace {

using eevo::DecodeMode;
using eevo::ExitPolicy;
using eevo::ModelConfig;
using eevo::ModelWeights;
using eevo::TokenId;

// Bundled demo corpus: plain byte strings mapped to token ids mod d_vocab,
// so every subcommand runs end to end with no external data.
constexpr const char* kDemoCorpus[] = {
    "the quick brown fox jumps over the lazy dog",
    "pack my box with five dozen liquor jugs",
    "how vexingly quick daft zebras jump",
    "sphinx of black quartz judge my vow",
    "the five boxing wizards jump quickly",
    "jived fox nymph grabs quick waltz",
    "glib jocks quiz nymph to vex dwarf",
    "crazy frederick bought many very exquisite opal jewels",
    "we promptly judged antique ivory buckles for the next prize",
    "a wizards job is to vex chumps quickly in fog",
    "jackdaws love my big sphinx of quartz",
    "the jay pig fox zebra and my wolves quack",
    "bright vixens jump dozy fowl quack",
    "quick zephyrs blow vexing daft jim",
    "two driven jocks help fax my big quiz",
    "five quacking zephyrs jolt my wax bed",
};
constexpr std::size_t kDemoPromptMaxTokens = 24;

struct ModelOpts {
    std::string path;
    ModelConfig config;
    std::uint64_t seed = 1;
    bool config_flag_used = false;
};

struct PromptOpts {
    std::string inline_ids;
    std::string file;
    bool demo = false;
};

struct PolicyOpts {
    std::string measure = "top2-diff";
    std::string schedule = "static";
    double lambda = 0.6;
    double tau = 4.0;
    std::uint32_t p = 2;
    std::size_t k = 64;
    std::size_t n = 16;
};

void add_model_options(CLI::App* cmd, ModelOpts& o) {
    cmd->add_option("--model", o.path, "weight file to load (exclusive with config flags)");
    cmd->add_option("--L", o.config.layers, "layer count")
        ->each([&o](const std::string&) { o.config_flag_used = true; });
    cmd->add_option("--d-model", o.config.d_model, "hidden width")
        ->each([&o](const std::string&) { o.config_flag_used = true; });
    cmd->add_option("--d-vocab", o.config.d_vocab, "vocabulary size")
        ->each([&o](const std::string&) { o.config_flag_used = true; });
    cmd->add_option("--n-heads", o.config.n_heads, "attention heads")
        ->each([&o](const std::string&) { o.config_flag_used = true; });
    cmd->add_option("--d-ff", o.config.d_ff, "feed-forward width")
        ->each([&o](const std::string&) { o.config_flag_used = true; });
    cmd->add_option("--max-seq", o.config.max_seq, "maximum context length")
        ->each([&o](const std::string&) { o.config_flag_used = true; });
    cmd->add_option("--seed", o.seed, "init seed (EEVO_SEED overrides)");
}

void add_prompt_options(CLI::App* cmd, PromptOpts& o) {
    auto* group = cmd->add_option_group("prompt source");
    group->add_option("--prompt", o.inline_ids, "inline comma/space separated token ids");
    group->add_option("--prompt-file", o.file, "file with one prompt per line");
    group->add_flag("--demo", o.demo, "use the bundled byte-level demo corpus");
    group->require_option(1);
}

void add_policy_options(CLI::App* cmd, PolicyOpts& o) {
    cmd->add_option("--measure", o.measure, "confidence measure: max-softmax|top2-diff")
        ->check(CLI::IsMember({"max-softmax", "top2-diff"}));
    cmd->add_option("--schedule", o.schedule, "threshold schedule: static|decaying")
        ->check(CLI::IsMember({"static", "decaying"}));
    cmd->add_option("--lambda", o.lambda, "exit threshold in [0,1]");
    cmd->add_option("--tau", o.tau, "decay rate for the decaying schedule");
    cmd->add_option("--p", o.p, "pruning exit layer");
    cmd->add_option("--K", o.k, "pruned vocabulary size");
    cmd->add_option("--N", o.n, "max new tokens per prompt");
}

ExitPolicy make_policy(const PolicyOpts& o, DecodeMode mode = DecodeMode::dvp) {
    ExitPolicy policy;
    policy.measure = eevo::confidence_measure_from_name(o.measure);
    policy.schedule.kind = eevo::schedule_kind_from_name(o.schedule);
    policy.schedule.lambda = o.lambda;
    policy.schedule.tau = o.tau;
    if (mode == DecodeMode::dvp) {
        policy.prune_exit = o.p;
        policy.prune_size = o.k;
    }
    policy.max_new_tokens = o.n;
    return policy;
}

std::uint64_t effective_seed(std::uint64_t flag_seed) {
    if (const char* env = std::getenv("EEVO_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return flag_seed;
}

ModelWeights acquire_model(const ModelOpts& o) {
    if (!o.path.empty()) {
        if (o.config_flag_used) {
            throw eevo::InvalidInput("give either --model or config flags, not both");
        }
        return eevo::load_weights(o.path);
    }
    o.config.validate();
    return eevo::init_random(o.config, effective_seed(o.seed));
}

std::vector<TokenId> parse_id_list(const std::string& text, const std::string& what) {
    std::vector<TokenId> ids;
    std::string normalized = text;
    for (char& c : normalized) {
        if (c == ',') c = ' ';
    }
    std::istringstream in(normalized);
    long long v = 0;
    while (in >> v) {
        ids.push_back(static_cast<TokenId>(v));
    }
    if (!in.eof()) {
        throw eevo::IoError(what + ": unparseable token id list");
    }
    return ids;
}

std::vector<std::vector<TokenId>> demo_prompts(std::uint32_t d_vocab) {
    std::vector<std::vector<TokenId>> prompts;
    for (const char* line : kDemoCorpus) {
        std::vector<TokenId> ids;
        for (const char* c = line; *c != '\0' && ids.size() < kDemoPromptMaxTokens; ++c) {
            ids.push_back(static_cast<TokenId>(
                static_cast<unsigned char>(*c) % d_vocab));
        }
        prompts.push_back(std::move(ids));
    }
    return prompts;
}

std::vector<std::vector<TokenId>> load_prompts(const PromptOpts& o, std::uint32_t d_vocab) {
    std::vector<std::vector<TokenId>> prompts;
    if (o.demo) {
        prompts = demo_prompts(d_vocab);
    } else if (!o.file.empty()) {
        std::ifstream in(o.file);
        if (!in) {
            throw eevo::IoError("cannot open prompt file: " + o.file);
        }
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto ids = parse_id_list(line, o.file + ":" + std::to_string(lineno));
            if (!ids.empty()) prompts.push_back(std::move(ids));
        }
    } else {
        prompts.push_back(parse_id_list(o.inline_ids, "--prompt"));
    }
    if (prompts.empty()) {
        throw eevo::InvalidInput("no prompts found in the selected source");
    }
    return prompts;
}

std::string dataset_name(const PromptOpts& o) {
    if (o.demo) return "demo";
    if (!o.file.empty()) return std::filesystem::path(o.file).stem().string();
    return "inline";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw eevo::IoError("cannot open for writing: " + path);
    }
    out << content;
    out.flush();
    if (!out) {
        throw eevo::IoError("write failed: " + path);
    }
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        write_file(out_path, content);
    }
}

double pooled_avg_exit(const std::vector<eevo::GenerationResult>& runs) {
    std::uint64_t layers = 0;
    std::uint64_t count = 0;
    for (const auto& r : runs) {
        for (const auto& s : r.steps) {
            layers += s.exit_layer;
            ++count;
        }
    }
    return count == 0 ? 0.0 : static_cast<double>(layers) / static_cast<double>(count);
}

double prefix_agreement(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
    const std::size_t longer = std::max(a.size(), b.size());
    if (longer == 0) return 1.0;
    std::size_t common = 0;
    while (common < a.size() && common < b.size() && a[common] == b[common]) ++common;
    return static_cast<double>(common) / static_cast<double>(longer);
}

// ---------------------------------------------------------------- commands

int cmd_init_model(const ModelOpts& model_opts, const std::string& out_path) {
    model_opts.config.validate();
    const std::uint64_t seed = effective_seed(model_opts.seed);
    const ModelWeights weights = eevo::init_random(model_opts.config, seed);
    eevo::save_weights(weights, out_path);
    const ModelConfig& c = model_opts.config;
    std::uint64_t params = 0;
    params += static_cast<std::uint64_t>(c.d_vocab) * c.d_model * 2;  // E, W
    params += static_cast<std::uint64_t>(c.max_seq) * c.d_model;
    params += static_cast<std::uint64_t>(c.layers) *
              (4ull * c.d_model * c.d_model + 2ull * c.d_ff * c.d_model + 2ull * c.d_model);
    std::printf("model: L=%u d_model=%u d_vocab=%u n_heads=%u d_ff=%u max_seq=%u seed=%llu "
                "params=%llu -> %s\n",
                c.layers, c.d_model, c.d_vocab, c.n_heads, c.d_ff, c.max_seq,
                static_cast<unsigned long long>(seed),
                static_cast<unsigned long long>(params), out_path.c_str());
    return 0;
}

int cmd_generate(const ModelOpts& model_opts, const PromptOpts& prompt_opts,
                 const PolicyOpts& policy_opts, const std::string& mode_name,
                 std::optional<TokenId> end_token, const std::string& trace_out) {
    const ModelWeights weights = acquire_model(model_opts);
    const DecodeMode mode = eevo::decode_mode_from_name(mode_name);
    const ExitPolicy policy = make_policy(policy_opts, mode);
    const auto prompts = load_prompts(prompt_opts, weights.config.d_vocab);
    const std::vector<TokenId>& prompt = prompts.front();

    eevo::GenerationStop stop;
    stop.end_token = end_token;
    const eevo::GenerationResult result = eevo::generate(weights, prompt, policy, mode, stop);

    if (!trace_out.empty()) {
        eevo::TraceRunInfo info{weights.config, policy, mode, prompt.size()};
        write_file(trace_out, eevo::trace_json(result, info));
    }

    std::string tokens_line = "generated:";
    for (TokenId t : result.tokens) {
        tokens_line += ' ';
        tokens_line += std::to_string(t);
    }
    std::puts(tokens_line.c_str());
    std::printf("tokens=%zu avg_exit=%.4f flops_per_token=%.3f conf_time_s=%.6f\n",
                result.tokens.size(), result.avg_exit(), result.flops_per_token(),
                result.timing.confidence_s);
    return 0;
}

int cmd_bench(const ModelOpts& model_opts, const PromptOpts& prompt_opts,
              const PolicyOpts& policy_opts, const std::vector<double>& lambdas,
              const std::string& out_path) {
    const ModelWeights weights = acquire_model(model_opts);
    const auto prompts = load_prompts(prompt_opts, weights.config.d_vocab);
    const std::string dataset = dataset_name(prompt_opts);

    std::vector<eevo::BenchRow> rows;
    for (double lambda : lambdas) {
        PolicyOpts cell = policy_opts;
        cell.lambda = lambda;
        const ExitPolicy policy = make_policy(cell);

        std::vector<eevo::GenerationResult> full_runs;
        for (const auto& prompt : prompts) {
            full_runs.push_back(eevo::generate(weights, prompt, policy, DecodeMode::full));
        }
        std::vector<eevo::GenerationResult> dvp_runs;
        for (const auto& prompt : prompts) {
            dvp_runs.push_back(eevo::generate(weights, prompt, policy, DecodeMode::dvp));
        }

        const auto make_row = [&](DecodeMode mode,
                                  const std::vector<eevo::GenerationResult>& runs) {
            eevo::BenchRow row;
            row.dataset = dataset;
            row.mode = mode;
            row.lambda = lambda;
            std::uint64_t flops = 0;
            std::size_t tokens = 0;
            double agreement = 0.0;
            for (std::size_t i = 0; i < runs.size(); ++i) {
                flops += runs[i].ledger.total();
                tokens += runs[i].tokens.size();
                agreement += prefix_agreement(full_runs[i].tokens, runs[i].tokens);
                row.conf_time_s += runs[i].timing.confidence_s;
            }
            row.score = agreement / static_cast<double>(runs.size());
            row.flops_per_token =
                tokens == 0 ? 0.0 : static_cast<double>(flops) / static_cast<double>(tokens);
            row.avg_exit = pooled_avg_exit(runs);
            return row;
        };
        rows.push_back(make_row(DecodeMode::full, full_runs));
        rows.push_back(make_row(DecodeMode::dvp, dvp_runs));
    }

    emit(eevo::bench_csv(rows), out_path);
    return 0;
}

int cmd_rank_analyze(const ModelOpts& model_opts, const PromptOpts& prompt_opts,
                     std::size_t n_tokens, const std::vector<std::size_t>& ks,
                     const std::string& out_path) {
    const ModelWeights weights = acquire_model(model_opts);
    const auto prompts = load_prompts(prompt_opts, weights.config.d_vocab);
    std::vector<eevo::RankTrace> traces;
    for (const auto& prompt : prompts) {
        traces.push_back(eevo::rank_trace(weights, prompt, n_tokens));
    }
    const auto rows = eevo::rank_summary(traces, ks);
    emit(eevo::rank_summary_csv(rows, ks), out_path);
    return 0;
}

int cmd_calibrate(const ModelOpts& model_opts, const PromptOpts& prompt_opts,
                  const PolicyOpts& policy_opts, const std::vector<std::uint32_t>& p_grid,
                  const std::vector<std::size_t>& k_grid, double epsilon,
                  bool exhaustive_check, const std::string& out_path) {
    const ModelWeights weights = acquire_model(model_opts);
    const auto prompts = load_prompts(prompt_opts, weights.config.d_vocab);
    // Grid cells set (p, K) themselves; the template only carries the
    // measure/schedule/N fields.
    const ExitPolicy policy = make_policy(policy_opts, DecodeMode::full);

    const eevo::CalibrationReport report =
        eevo::calibrate(weights, prompts, p_grid, k_grid, epsilon, policy);
    const std::string rendered = eevo::calibration_json(report);

    if (exhaustive_check) {
        // Re-run from scratch and re-derive the selection by brute force
        // over the fresh grid; both must match the first report.
        const eevo::CalibrationReport again =
            eevo::calibrate(weights, prompts, p_grid, k_grid, epsilon, policy);
        if (eevo::calibration_json(again) != rendered) {
            throw eevo::Error("exhaustive check: calibration is not reproducible");
        }
        const eevo::CalibrationCell* best = nullptr;
        for (const auto& cell : again.grid) {
            if (!cell.feasible) continue;
            if (best == nullptr ||
                cell.expected_confidence_flops < best->expected_confidence_flops ||
                (cell.expected_confidence_flops == best->expected_confidence_flops &&
                 (cell.k < best->k || (cell.k == best->k && cell.p < best->p)))) {
                best = &cell;
            }
        }
        const bool matches = best == nullptr
                                 ? again.fallback
                                 : (!again.fallback && best->p == again.chosen_p &&
                                    best->k == again.chosen_k);
        if (!matches) {
            throw eevo::Error("exhaustive check: selection mismatch");
        }
        std::fputs("exhaustive check: ok\n", stderr);
    }

    emit(rendered, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"early-exit decoding with dynamic vocabulary pruning"};
    app.require_subcommand(1);
    // Key-value config file mirroring every flag; subcommand options live
    // under a [subcommand] section.
    app.set_config("--config", "", "read options from a key-value config file");

    ModelOpts model_opts;
    PromptOpts prompt_opts;
    PolicyOpts policy_opts;

    // init-model
    auto* init = app.add_subcommand("init-model", "create a seeded weight file");
    add_model_options(init, model_opts);
    std::string init_out;
    init->add_option("--out", init_out, "output weight file")->required();

    // generate
    auto* gen = app.add_subcommand("generate", "early-exit generation with a trace");
    add_model_options(gen, model_opts);
    add_prompt_options(gen, prompt_opts);
    add_policy_options(gen, policy_opts);
    std::string gen_mode = "dvp";
    gen->add_option("--mode", gen_mode, "full|dvp")->check(CLI::IsMember({"full", "dvp"}));
    std::optional<TokenId> gen_end_token;
    gen->add_option("--end-token", gen_end_token, "stop after emitting this token");
    std::string gen_trace_out;
    gen->add_option("--trace-out", gen_trace_out, "write the trace JSON here");

    // bench
    auto* bench = app.add_subcommand("bench", "full-vs-dvp comparison table (CSV)");
    add_model_options(bench, model_opts);
    add_prompt_options(bench, prompt_opts);
    add_policy_options(bench, policy_opts);
    std::vector<double> bench_lambdas{0.6, 0.99};
    bench->add_option("--lambdas", bench_lambdas, "thresholds to benchmark")
        ->delimiter(',');
    std::string bench_out;
    bench->add_option("--out", bench_out, "CSV output path (stdout when omitted)");

    // rank-analyze
    auto* rank = app.add_subcommand("rank-analyze",
                                    "rank of the final predicted token per layer (CSV)");
    add_model_options(rank, model_opts);
    add_prompt_options(rank, prompt_opts);
    std::size_t rank_n = 16;
    rank->add_option("--N", rank_n, "tokens to generate per prompt");
    std::vector<std::size_t> rank_ks{1, 10, 100};
    rank->add_option("--ks", rank_ks, "coverage cutoffs")->delimiter(',');
    std::string rank_out;
    rank->add_option("--out", rank_out, "CSV output path (stdout when omitted)");

    // calibrate
    auto* calib = app.add_subcommand("calibrate", "grid search for (p, K)");
    add_model_options(calib, model_opts);
    add_prompt_options(calib, prompt_opts);
    add_policy_options(calib, policy_opts);
    std::vector<std::uint32_t> p_grid{1, 2};
    calib->add_option("--p-grid", p_grid, "candidate pruning exits")->delimiter(',');
    std::vector<std::size_t> k_grid{16, 64, 256};
    calib->add_option("--k-grid", k_grid, "candidate pruned sizes")->delimiter(',');
    double epsilon = 0.01;
    calib->add_option("--epsilon", epsilon, "allowed score drop");
    bool exhaustive_check = false;
    calib->add_flag("--exhaustive-check", exhaustive_check)->group("");
    std::string calib_out;
    calib->add_option("--out", calib_out, "JSON output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "eevo: error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (init->parsed()) {
            return cmd_init_model(model_opts, init_out);
        }
        if (gen->parsed()) {
            return cmd_generate(model_opts, prompt_opts, policy_opts, gen_mode,
                                gen_end_token, gen_trace_out);
        }
        if (bench->parsed()) {
            return cmd_bench(model_opts, prompt_opts, policy_opts, bench_lambdas, bench_out);
        }
        if (rank->parsed()) {
            return cmd_rank_analyze(model_opts, prompt_opts, rank_n, rank_ks, rank_out);
        }
        if (calib->parsed()) {
            return cmd_calibrate(model_opts, prompt_opts, policy_opts, p_grid, k_grid,
                                 epsilon, exhaustive_check, calib_out);
        }
    } catch (const eevo::IoError& e) {
        std::cerr << "eevo: error: io: " << e.what() << "\n";
        return 3;
    } catch (const eevo::InvalidInput& e) {
        std::cerr << "eevo: error: usage: " << e.what() << "\n";
        return 2;
    } catch (const eevo::Error& e) {
        std::cerr << "eevo: error: invariant: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "eevo: error: invariant: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
