#include <doctest.h>

#include <random>

#include "eevo/decoder.hpp"
#include "eevo/errors.hpp"
#include "eevo/flops.hpp"
#include "test_util.hpp"

using eevo::DecodeMode;
using eevo::FlopCategory;
using eevo::FlopsLedger;

TEST_CASE("ledger record and name lookup") {
    FlopsLedger ledger;
    ledger.record(FlopCategory::attention, 0);
    CHECK(ledger.count(FlopCategory::attention) == 0);
    ledger.record(FlopCategory::attention, 5);
    ledger.record("attention", 5);
    CHECK(ledger.count(FlopCategory::attention) == 10);
    CHECK(ledger.total() == 10);
    CHECK_THROWS_AS(ledger.record("warp_drive", 1), eevo::InvalidInput);

    FlopsLedger other;
    other.record(FlopCategory::ffn, 7);
    ledger.merge(other);
    CHECK(ledger.total() == 17);
}

TEST_CASE("projection cost convention") {
    CHECK(eevo::projection_cost(32128, 1024) == 65798144);
    CHECK(eevo::projection_cost(64, 1024) == 131072);
    CHECK(eevo::projection_cost(1, 1) == 2);
}

TEST_CASE("per-token subtotals sum to the counters") {
    const auto c = test_util::tiny_config(4, 16, 16);
    const auto w = eevo::init_random(c, 2);
    eevo::ExitPolicy policy;
    policy.schedule.lambda = 0.07;
    policy.measure = eevo::ConfidenceMeasure::max_softmax;
    policy.prune_exit = 2;
    policy.prune_size = 4;
    policy.max_new_tokens = 6;
    const auto run =
        eevo::generate(w, std::vector<eevo::TokenId>{1, 2, 3}, policy, DecodeMode::dvp);

    REQUIRE(run.ledger.per_token().size() == run.tokens.size());
    eevo::FlopCounters sum{};
    for (const auto& tok : run.ledger.per_token()) {
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += tok[i];
        }
    }
    // Counters = prompt ingestion + per-token work; the ingestion only
    // touches block categories.
    for (std::size_t i = 0; i < sum.size(); ++i) {
        const auto cat = static_cast<FlopCategory>(i);
        if (cat == FlopCategory::attention || cat == FlopCategory::ffn ||
            cat == FlopCategory::layernorm) {
            CHECK(sum[i] < run.ledger.counters()[i]);
        } else {
            CHECK(sum[i] == run.ledger.counters()[i]);
        }
    }
    CHECK(run.flops_per_token() ==
          doctest::Approx(static_cast<double>(run.ledger.total()) /
                          static_cast<double>(run.tokens.size())));
}

TEST_CASE("instrumented confidence flops equal the closed form in both modes") {
    std::mt19937 rng(61);
    const auto c = test_util::tiny_config(6, 16, 32);
    const auto w = eevo::init_random(c, 4);
    for (double lambda : {0.0, 0.032, 1.0}) {
        for (DecodeMode mode : {DecodeMode::full, DecodeMode::dvp}) {
            eevo::ExitPolicy policy;
            policy.measure = eevo::ConfidenceMeasure::max_softmax;
            policy.schedule.lambda = lambda;
            policy.prune_exit = 2;
            policy.prune_size = 8;
            policy.max_new_tokens = 8;
            const auto prompt = test_util::random_prompt(rng, c.d_vocab, 2, 6);
            const auto run = eevo::generate(w, prompt, policy, mode);
            const auto exits = run.exit_layers();
            const auto expected = eevo::expected_confidence_flops(mode, policy, exits,
                                                                  c.d_vocab, c.d_model);
            CHECK(run.ledger.count(FlopCategory::confidence_projection) == expected.projection);
            CHECK(run.ledger.count(FlopCategory::confidence_softmax) == expected.softmax);
            CHECK(run.ledger.count(FlopCategory::confidence_measure) == expected.measure);
        }
    }
}

TEST_CASE("dvp exits at or below p cost the same as full mode") {
    eevo::ExitPolicy policy;
    policy.prune_exit = 3;
    policy.prune_size = 16;
    const std::vector<std::uint32_t> exits{1, 2, 3};
    const auto full = eevo::expected_confidence_flops(DecodeMode::full, policy, exits, 128, 32);
    const auto dvp = eevo::expected_confidence_flops(DecodeMode::dvp, policy, exits, 128, 32);
    CHECK(full.projection == dvp.projection);
    CHECK(full.softmax == dvp.softmax);
    CHECK(full.measure == dvp.measure);
}

TEST_CASE("dvp confidence cost never exceeds full and drops once pruned") {
    eevo::ExitPolicy policy;
    policy.prune_exit = 2;
    for (std::size_t k : {std::size_t{1}, std::size_t{16}, std::size_t{128}}) {
        policy.prune_size = k;
        const std::vector<std::uint32_t> exits{1, 2, 4, 8, 8, 3};
        const auto full =
            eevo::expected_confidence_flops(DecodeMode::full, policy, exits, 128, 32);
        const auto dvp =
            eevo::expected_confidence_flops(DecodeMode::dvp, policy, exits, 128, 32);
        CHECK(dvp.total() <= full.total());
        if (k < 128) {
            CHECK(dvp.total() < full.total());
        } else {
            CHECK(dvp.total() == full.total());
        }
    }
}
